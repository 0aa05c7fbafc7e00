#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { convert, STANDARD_GRAVITY } from './convert.js';
import { ConversionError } from './errors.js';

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .scriptName('blocktrack-convert')
    .command(
      'convert <sources..>',
      'convert NetCDF geopotential archives to daily-height containers',
      (args) =>
        args
          .positional('sources', {
            describe: 'NetCDF v3 source files',
            type: 'string',
            array: true,
            demandOption: true,
          })
          .option('var', {
            describe: 'name of the geopotential or height variable',
            type: 'string',
            demandOption: true,
          })
          .option('level', {
            describe: 'pressure level to extract, hPa',
            type: 'number',
            default: 500,
          })
          .option('out', {
            describe: 'output directory',
            type: 'string',
            demandOption: true,
          })
          .option('gravity', {
            describe: 'gravity used to turn geopotential into height, m s-2',
            type: 'number',
            default: STANDARD_GRAVITY,
          }),
      (argv) => {
        const results = convert({
          sources: argv.sources as string[],
          variable: argv.var,
          levelHpa: argv.level,
          outDir: argv.out,
          gravity: argv.gravity,
        });
        for (const r of results) {
          const drops = r.daysDropped.length > 0 ? `, dropped ${r.daysDropped.join(', ')}` : '';
          console.log(`${r.source} -> ${r.output}: ${r.daysWritten} days (${r.calendar})${drops}`);
        }
      },
    )
    .demandCommand(1)
    .strict()
    .help()
    .parseAsync();
}

main().catch((err) => {
  if (err instanceof ConversionError) {
    console.error(`error: ${err.message}`);
  } else {
    console.error(err);
  }
  process.exit(1);
});
