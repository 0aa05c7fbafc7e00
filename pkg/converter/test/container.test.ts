import { describe, expect, it } from 'vitest';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { readContainer, writeContainer, ContainerSeries } from '../src/container.js';
import { ConversionError } from '../src/errors.js';

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), 'container-'));
}

function sample(): ContainerSeries {
  return {
    variable: 'z500',
    units: 'm',
    calendar: 'gregorian365',
    dates: ['2000-01-01', '2000-01-02'],
    latCenters: [65, 60],
    lonCenters: [0, 5, 10],
    values: Float32Array.from({ length: 12 }, (_, i) => 5000 + i * 0.5),
  };
}

describe('container', () => {
  it('round-trips a series', () => {
    const dir = tmpdir();
    const out = path.join(dir, 'sample.json');
    writeContainer(sample(), out);
    const back = readContainer(out);
    expect(back.variable).toBe('z500');
    expect(back.units).toBe('m');
    expect(back.calendar).toBe('gregorian365');
    expect(back.dates).toEqual(['2000-01-01', '2000-01-02']);
    expect(back.latCenters).toEqual([65, 60]);
    expect(back.lonCenters).toEqual([0, 5, 10]);
    expect(Array.from(back.values)).toEqual(Array.from(sample().values));
  });

  it('writes the header with sorted keys and a sibling payload', () => {
    const dir = tmpdir();
    const out = path.join(dir, 'era5.z500.json');
    writeContainer(sample(), out);
    const text = fs.readFileSync(out, 'utf8');
    expect(text.endsWith('\n')).toBe(true);
    const header = JSON.parse(text);
    expect(Object.keys(header)).toEqual([...Object.keys(header)].sort());
    expect(Object.keys(header.grid)).toEqual([...Object.keys(header.grid)].sort());
    expect(header.payload).toBe('era5.z500.bin');
    expect(header.dtype).toBe('<f4');
    expect(header.format_version).toBe(1);
    expect(header.payload_bytes).toBe(48);
    expect(fs.statSync(path.join(dir, 'era5.z500.bin')).size).toBe(48);
  });

  it('stores the payload little-endian', () => {
    const dir = tmpdir();
    const out = path.join(dir, 'one.json');
    const series = sample();
    series.dates = ['2000-01-01'];
    series.values = Float32Array.from([1, 2, 3, 4, 5, 6]);
    writeContainer(series, out);
    const bin = fs.readFileSync(path.join(dir, 'one.bin'));
    expect(bin.readFloatLE(0)).toBe(1);
    expect(bin.readFloatLE(20)).toBe(6);
  });

  it('rejects a flipped payload byte on read', () => {
    const dir = tmpdir();
    const out = path.join(dir, 'bad.json');
    writeContainer(sample(), out);
    const binPath = path.join(dir, 'bad.bin');
    const bin = fs.readFileSync(binPath);
    bin[5] ^= 0xff;
    fs.writeFileSync(binPath, bin);
    expect(() => readContainer(out)).toThrow(/checksum/);
  });

  it('rejects a payload/grid mismatch on write', () => {
    const series = sample();
    series.values = Float32Array.from([1, 2, 3]);
    expect(() => writeContainer(series, path.join(tmpdir(), 'x.json'))).toThrow(ConversionError);
  });
});
