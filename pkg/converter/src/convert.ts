import * as fs from 'node:fs';
import * as path from 'node:path';

import { ConversionError } from './errors.js';
import { Dataset, VariableInfo } from './netcdf.js';
import { CalendarName, dateKey, decodeTimes, detectCalendar, parseTimeUnits } from './calendar.js';
import { writeContainer } from './container.js';

export const STANDARD_GRAVITY = 9.80665;

export interface ConversionSpec {
  sources: string[];
  /** Name of the geopotential (or height) variable in the source files. */
  variable: string;
  levelHpa?: number;
  outDir: string;
  gravity?: number;
  warn?: (message: string) => void;
}

export interface ConversionResult {
  source: string;
  output: string;
  calendar: CalendarName;
  daysWritten: number;
  daysDropped: string[];
}

interface Axes {
  time?: string;
  level?: string;
  lat: string;
  lon: string;
}

/** Convert each source archive into a daily-height container in outDir. */
export function convert(spec: ConversionSpec): ConversionResult[] {
  if (spec.sources.length === 0) {
    throw new ConversionError('no source files given');
  }
  return spec.sources.map((source) => convertFile(source, spec));
}

export function convertFile(source: string, spec: ConversionSpec): ConversionResult {
  const levelHpa = spec.levelHpa ?? 500;
  const gravity = spec.gravity ?? STANDARD_GRAVITY;
  const warn = spec.warn ?? ((m: string) => console.warn(m));

  const data = new Dataset(fs.readFileSync(source));
  const info = data.variable(spec.variable);
  if (info === undefined) {
    throw new ConversionError(
      `${source}: variable '${spec.variable}' not found\n${data.inventory()}`,
    );
  }
  const axes = classifyAxes(data, info, source);
  if (axes.time === undefined) {
    throw new ConversionError(
      `${source}: variable '${spec.variable}' has no time axis\n${data.inventory()}`,
    );
  }

  const latCenters = Array.from(data.values(axes.lat));
  const lonCenters = Array.from(data.values(axes.lon));
  if (!strictlyMonotone(latCenters)) {
    throw new ConversionError(`${source}: latitude axis is not strictly monotone`);
  }
  if (!strictlyMonotone(lonCenters)) {
    throw new ConversionError(`${source}: longitude axis is not strictly monotone`);
  }

  const levelIndex = axes.level === undefined
    ? 0
    : pickLevel(data, axes.level, levelHpa, source);
  const nLevels = axes.level === undefined ? 1 : data.dimensionSize(axes.level);

  const calendar = detectCalendar(data.attribute(axes.time, 'calendar'));
  const timeUnits = data.attribute(axes.time, 'units');
  if (typeof timeUnits !== 'string') {
    throw new ConversionError(`${source}: time variable '${axes.time}' has no units attribute`);
  }
  const timeValues = data.values(axes.time);
  if (timeValues.length === 0) {
    throw new ConversionError(`${source}: time axis is empty`);
  }
  const points = decodeTimes(timeValues, timeUnits, calendar);
  const stepsPerDay = inferStepsPerDay(timeValues, parseTimeUnits(timeUnits).unitHours);

  // group time steps by calendar day, in coordinate order
  const byDay = new Map<string, number[]>();
  for (let t = 0; t < points.length; t++) {
    const key = dateKey(points[t]);
    const bucket = byDay.get(key);
    if (bucket === undefined) byDay.set(key, [t]);
    else bucket.push(t);
  }
  const days = [...byDay.keys()].sort();
  const dropped: string[] = [];
  for (const edge of [days[0], days[days.length - 1]]) {
    if (byDay.get(edge)!.length < stepsPerDay && !dropped.includes(edge)) {
      dropped.push(edge);
      warn(
        `${source}: dropping partial day ${edge} `
        + `(${byDay.get(edge)!.length}/${stepsPerDay} steps)`,
      );
    }
  }
  const kept = days.filter((d) => !dropped.includes(d));
  if (kept.length === 0) {
    throw new ConversionError(`${source}: no complete days after dropping partial edges`);
  }

  const raw = data.values(spec.variable);
  const toMeters = heightScale(info, gravity, source, data);
  const packScale = numberAttribute(info, 'scale_factor') ?? 1;
  const packOffset = numberAttribute(info, 'add_offset') ?? 0;
  const fill = numberAttribute(info, '_FillValue') ?? numberAttribute(info, 'missing_value');

  const nLat = latCenters.length;
  const nLon = lonCenters.length;
  const cells = nLat * nLon;
  const values = new Float32Array(kept.length * cells);
  for (let d = 0; d < kept.length; d++) {
    const steps = byDay.get(kept[d])!;
    for (let c = 0; c < cells; c++) {
      let sum = 0;
      for (const t of steps) {
        const packed = raw[(t * nLevels + levelIndex) * cells + c];
        if (packed === fill || !Number.isFinite(packed)) {
          throw new ConversionError(
            `${source}: missing values in '${spec.variable}' on ${kept[d]}`,
          );
        }
        sum += (packed * packScale + packOffset) * toMeters;
      }
      values[d * cells + c] = sum / steps.length;
    }
  }

  const output = path.join(spec.outDir, stem(source) + '.json');
  writeContainer(
    {
      variable: `z${levelHpa}`,
      units: 'm',
      calendar,
      dates: kept,
      latCenters,
      lonCenters,
      values,
    },
    output,
  );
  return { source, output, calendar, daysWritten: kept.length, daysDropped: dropped };
}

function stem(source: string): string {
  return path.basename(source).replace(/\.[^.]*$/, '');
}

function strictlyMonotone(values: number[]): boolean {
  if (values.length < 2) return true;
  const up = values[1] > values[0];
  for (let i = 1; i < values.length; i++) {
    if (up ? values[i] <= values[i - 1] : values[i] >= values[i - 1]) return false;
  }
  return true;
}

function numberAttribute(info: VariableInfo, name: string): number | undefined {
  const v = info.attributes[name];
  if (typeof v === 'number') return v;
  if (Array.isArray(v) && v.length === 1) return v[0];
  return undefined;
}

/**
 * Sort the data variable's dimensions into time/level/lat/lon roles by
 * inspecting the coordinate variable of the same name. Requires the two
 * trailing dimensions to be latitude then longitude so slabs stay row-major.
 */
function classifyAxes(data: Dataset, info: VariableInfo, source: string): Axes {
  const roles = info.dimensions.map((dim) => axisRole(data, dim));
  const latPos = roles.indexOf('lat');
  const lonPos = roles.indexOf('lon');
  if (latPos === -1 || lonPos === -1) {
    throw new ConversionError(
      `${source}: variable '${info.name}' lacks latitude/longitude axes\n${data.inventory()}`,
    );
  }
  if (latPos !== info.dimensions.length - 2 || lonPos !== info.dimensions.length - 1) {
    throw new ConversionError(
      `${source}: variable '${info.name}' must end in (latitude, longitude), `
      + `got (${info.dimensions.join(', ')})`,
    );
  }
  const axes: Axes = { lat: info.dimensions[latPos], lon: info.dimensions[lonPos] };
  for (let i = 0; i < roles.length; i++) {
    if (roles[i] === 'time') axes.time = info.dimensions[i];
    if (roles[i] === 'level') axes.level = info.dimensions[i];
    if (roles[i] === undefined) {
      throw new ConversionError(
        `${source}: cannot classify dimension '${info.dimensions[i]}' of '${info.name}'\n`
        + data.inventory(),
      );
    }
  }
  // slab indexing below assumes (time[, level], lat, lon) storage order
  if (roles.indexOf('level') !== -1 && roles.indexOf('level') !== roles.length - 3) {
    throw new ConversionError(
      `${source}: variable '${info.name}' must store the level axis just before latitude, `
      + `got (${info.dimensions.join(', ')})`,
    );
  }
  if (roles.indexOf('time') > 0) {
    throw new ConversionError(
      `${source}: variable '${info.name}' must store the time axis first, `
      + `got (${info.dimensions.join(', ')})`,
    );
  }
  for (const dim of [axes.time, axes.lat, axes.lon]) {
    if (dim !== undefined && data.variable(dim) === undefined) {
      throw new ConversionError(
        `${source}: dimension '${dim}' has no coordinate variable\n${data.inventory()}`,
      );
    }
  }
  return axes;
}

function axisRole(data: Dataset, dim: string): 'time' | 'level' | 'lat' | 'lon' | undefined {
  const coord = data.variable(dim);
  const units = typeof coord?.attributes['units'] === 'string'
    ? (coord.attributes['units'] as string).toLowerCase()
    : '';
  const standard = typeof coord?.attributes['standard_name'] === 'string'
    ? (coord.attributes['standard_name'] as string).toLowerCase()
    : '';
  const name = dim.toLowerCase();
  if (units.includes(' since ') || name === 'time' || name === 't') return 'time';
  if (units.startsWith('degrees_n') || units.startsWith('degree_n')
    || standard === 'latitude' || name === 'lat' || name === 'latitude') return 'lat';
  if (units.startsWith('degrees_e') || units.startsWith('degree_e')
    || standard === 'longitude' || name === 'lon' || name === 'longitude') return 'lon';
  if (units === 'pa' || units === 'hpa' || units === 'mb' || units === 'mbar'
    || units === 'millibar' || units === 'millibars'
    || standard === 'air_pressure'
    || ['level', 'lev', 'plev', 'pressure', 'pres', 'isobaric'].includes(name)) return 'level';
  return undefined;
}

function pickLevel(data: Dataset, levelDim: string, levelHpa: number, source: string): number {
  const coord = data.variable(levelDim);
  if (coord === undefined) {
    throw new ConversionError(
      `${source}: level dimension '${levelDim}' has no coordinate variable\n${data.inventory()}`,
    );
  }
  const units = typeof coord.attributes['units'] === 'string'
    ? (coord.attributes['units'] as string).toLowerCase()
    : '';
  const toHpa = units === 'pa' ? 0.01 : 1;
  const levels = Array.from(data.values(levelDim), (v) => v * toHpa);
  const index = levels.findIndex((v) => Math.abs(v - levelHpa) < 1e-6);
  if (index === -1) {
    throw new ConversionError(
      `${source}: level ${levelHpa} hPa not found in '${levelDim}' `
      + `(available: ${levels.join(', ')} hPa)\n${data.inventory()}`,
    );
  }
  return index;
}

/**
 * Factor that turns the stored values into geopotential height in meters.
 * Geopotential (m2 s-2 or J kg-1) divides by gravity; height passes through.
 */
function heightScale(info: VariableInfo, gravity: number, source: string, data: Dataset): number {
  const rawUnits = info.attributes['units'];
  const standard = typeof info.attributes['standard_name'] === 'string'
    ? (info.attributes['standard_name'] as string).toLowerCase()
    : '';
  if (typeof rawUnits === 'string') {
    const compact = rawUnits.toLowerCase().replace(/[\s*^]/g, '');
    if (compact === 'm2s-2' || compact === 'm2/s2' || compact === 'jkg-1' || compact === 'j/kg') {
      return 1 / gravity;
    }
    if (compact === 'm' || compact === 'meter' || compact === 'meters'
      || compact === 'metre' || compact === 'metres' || compact === 'gpm') {
      return 1;
    }
    throw new ConversionError(
      `${source}: cannot interpret units '${rawUnits}' of '${info.name}' as geopotential `
      + `or height\n${data.inventory()}`,
    );
  }
  if (standard === 'geopotential') return 1 / gravity;
  if (standard === 'geopotential_height') return 1;
  throw new ConversionError(
    `${source}: variable '${info.name}' declares neither units nor a usable standard_name\n`
    + data.inventory(),
  );
}

/** Steps per day, from the median spacing of the time axis. */
export function inferStepsPerDay(timeValues: ArrayLike<number>, unitHours: number): number {
  if (timeValues.length < 2) return 1;
  const deltas: number[] = [];
  for (let i = 1; i < timeValues.length; i++) {
    deltas.push(timeValues[i] - timeValues[i - 1]);
  }
  deltas.sort((a, b) => a - b);
  const hours = deltas[Math.floor(deltas.length / 2)] * unitHours;
  if (hours <= 0) return 1;
  return Math.max(1, Math.round(24 / hours));
}
