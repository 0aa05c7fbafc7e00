import { ConversionError } from './errors.js';

export type CalendarName = 'gregorian365' | 'fixed360';

export interface TimePoint {
  year: number;
  month: number;
  day: number;
  /** Fractional hour within the day, 0 <= hour < 24. */
  hour: number;
}

const UNIT_HOURS: Record<string, number> = {
  seconds: 1 / 3600,
  second: 1 / 3600,
  secs: 1 / 3600,
  minutes: 1 / 60,
  minute: 1 / 60,
  mins: 1 / 60,
  hours: 1,
  hour: 1,
  hrs: 1,
  days: 24,
  day: 24,
};

export interface TimeBase {
  unitHours: number;
  year: number;
  month: number;
  day: number;
  hour: number;
  minute: number;
  second: number;
}

/** Map a CF calendar attribute onto the two calendars the container knows. */
export function detectCalendar(attr: string | number | number[] | undefined): CalendarName {
  if (attr === undefined) return 'gregorian365';
  const name = String(attr).trim().toLowerCase();
  if (name === '' || name === 'standard' || name === 'gregorian' || name === 'proleptic_gregorian') {
    return 'gregorian365';
  }
  if (name === '360_day' || name === 'fixed360') return 'fixed360';
  throw new ConversionError(`unsupported calendar '${attr}'`);
}

/** Parse a CF units string such as "hours since 1900-01-01 00:00:0.0". */
export function parseTimeUnits(units: string): TimeBase {
  const match = units
    .trim()
    .match(
      /^(\w+)\s+since\s+(-?\d{1,4})-(\d{1,2})-(\d{1,2})(?:[T ](\d{1,2}):(\d{1,2})(?::(\d{1,2}(?:\.\d+)?))?)?/i,
    );
  if (!match) {
    throw new ConversionError(`cannot parse time units '${units}'`);
  }
  const unitHours = UNIT_HOURS[match[1].toLowerCase()];
  if (unitHours === undefined) {
    throw new ConversionError(`unsupported time unit '${match[1]}' in '${units}'`);
  }
  return {
    unitHours,
    year: parseInt(match[2], 10),
    month: parseInt(match[3], 10),
    day: parseInt(match[4], 10),
    hour: match[5] === undefined ? 0 : parseInt(match[5], 10),
    minute: match[6] === undefined ? 0 : parseInt(match[6], 10),
    second: match[7] === undefined ? 0 : parseFloat(match[7]),
  };
}

/** Decode raw time coordinates into calendar dates plus hour-of-day. */
export function decodeTimes(
  values: ArrayLike<number>,
  units: string,
  calendar: CalendarName,
): TimePoint[] {
  const base = parseTimeUnits(units);
  const points: TimePoint[] = [];
  if (calendar === 'fixed360') {
    // 12 months of 30 days; do the arithmetic in hours from year 0
    const baseHours =
      ((base.year * 360 + (base.month - 1) * 30 + (base.day - 1)) * 24)
      + base.hour + base.minute / 60 + base.second / 3600;
    for (let i = 0; i < values.length; i++) {
      const total = baseHours + values[i] * base.unitHours;
      const dayIndex = Math.floor(total / 24);
      const year = Math.floor(dayIndex / 360);
      const ofYear = dayIndex - year * 360;
      points.push({
        year,
        month: Math.floor(ofYear / 30) + 1,
        day: (ofYear % 30) + 1,
        hour: total - dayIndex * 24,
      });
    }
    return points;
  }
  const epoch = new Date(0);
  epoch.setUTCFullYear(base.year, base.month - 1, base.day);
  epoch.setUTCHours(base.hour, base.minute, Math.floor(base.second), Math.round((base.second % 1) * 1000));
  const epochMs = epoch.getTime();
  for (let i = 0; i < values.length; i++) {
    const t = new Date(epochMs + values[i] * base.unitHours * 3_600_000);
    points.push({
      year: t.getUTCFullYear(),
      month: t.getUTCMonth() + 1,
      day: t.getUTCDate(),
      hour:
        t.getUTCHours()
        + t.getUTCMinutes() / 60
        + (t.getUTCSeconds() + t.getUTCMilliseconds() / 1000) / 3600,
    });
  }
  return points;
}

export function dateKey(p: TimePoint): string {
  const y = String(p.year).padStart(4, '0');
  const m = String(p.month).padStart(2, '0');
  const d = String(p.day).padStart(2, '0');
  return `${y}-${m}-${d}`;
}
