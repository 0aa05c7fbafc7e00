import * as fs from 'node:fs';
import * as path from 'node:path';

import { crc32 } from './crc32.js';
import { ConversionError } from './errors.js';
import type { CalendarName } from './calendar.js';

export interface ContainerSeries {
  variable: string;
  units: string;
  calendar: CalendarName;
  /** ISO dates, one per time slab. */
  dates: string[];
  latCenters: number[];
  lonCenters: number[];
  /** Row-major (date, lat, lon) values. */
  values: Float32Array;
}

const FORMAT_VERSION = 1;

/**
 * Write a daily-field container: a JSON header with deterministic key order
 * next to a raw little-endian float32 payload. The header references the
 * payload by basename, so the pair stays portable as long as it moves
 * together.
 */
export function writeContainer(series: ContainerSeries, outPath: string): void {
  const nLat = series.latCenters.length;
  const nLon = series.lonCenters.length;
  const expected = series.dates.length * nLat * nLon;
  if (series.values.length !== expected) {
    throw new ConversionError(
      `payload holds ${series.values.length} values, expected ${expected} `
      + `for ${series.dates.length} dates on a ${nLat}x${nLon} grid`,
    );
  }
  const payload = new Uint8Array(series.values.length * 4);
  const view = new DataView(payload.buffer);
  for (let i = 0; i < series.values.length; i++) {
    view.setFloat32(4 * i, series.values[i], true);
  }
  const payloadName = path.basename(outPath).replace(/\.json$/, '') + '.bin';
  const header = {
    calendar: series.calendar,
    dates: series.dates,
    dtype: '<f4',
    format_version: FORMAT_VERSION,
    grid: {
      lat_centers: series.latCenters,
      lon_centers: series.lonCenters,
      n_lat: nLat,
      n_lon: nLon,
    },
    offset: 0.0,
    payload: payloadName,
    payload_bytes: payload.length,
    payload_crc32: crc32(payload),
    scale: 1.0,
    units: series.units,
    variable: series.variable,
  };
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  fs.writeFileSync(path.join(path.dirname(outPath), payloadName), payload);
  fs.writeFileSync(outPath, sortedJson(header) + '\n');
}

/** Read a container back; verifies the payload checksum. */
export function readContainer(headerPath: string): ContainerSeries {
  const header = JSON.parse(fs.readFileSync(headerPath, 'utf8'));
  if (header.format_version !== FORMAT_VERSION) {
    throw new ConversionError(`${headerPath}: unsupported format_version ${header.format_version}`);
  }
  if (header.dtype !== '<f4') {
    throw new ConversionError(`${headerPath}: unsupported dtype ${header.dtype}`);
  }
  const payloadPath = path.join(path.dirname(headerPath), header.payload);
  const payload = fs.readFileSync(payloadPath);
  const bytes = new Uint8Array(payload.buffer, payload.byteOffset, payload.byteLength);
  if (bytes.length !== header.payload_bytes) {
    throw new ConversionError(
      `${payloadPath}: payload is ${bytes.length} bytes, expected ${header.payload_bytes}`,
    );
  }
  if (crc32(bytes) !== header.payload_crc32) {
    throw new ConversionError(`${payloadPath}: checksum mismatch`);
  }
  const values = new Float32Array(bytes.length / 4);
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  for (let i = 0; i < values.length; i++) {
    values[i] = view.getFloat32(4 * i, true);
  }
  return {
    variable: header.variable,
    units: header.units,
    calendar: header.calendar,
    dates: header.dates,
    latCenters: header.grid.lat_centers,
    lonCenters: header.grid.lon_centers,
    values,
  };
}

function sortedJson(value: unknown): string {
  return JSON.stringify(
    value,
    (_key, v) =>
      v !== null && typeof v === 'object' && !Array.isArray(v)
        ? Object.fromEntries(Object.entries(v).sort(([a], [b]) => (a < b ? -1 : 1)))
        : v,
    2,
  );
}
