import { NetCDFReader } from 'netcdfjs';

export interface DimensionInfo {
  name: string;
  size: number;
}

export interface VariableInfo {
  name: string;
  /** Dimension names in storage order. */
  dimensions: string[];
  shape: number[];
  attributes: Record<string, string | number | number[]>;
}

/**
 * Thin wrapper over netcdfjs that resolves dimension ids to names, expands
 * the record dimension to its actual length, and flattens record variables
 * into one row-major array.
 */
export class Dataset {
  private reader: NetCDFReader;
  readonly dimensions: DimensionInfo[];
  readonly variables: VariableInfo[];
  readonly globalAttributes: Record<string, string | number | number[]>;

  constructor(data: Uint8Array) {
    this.reader = new NetCDFReader(data);
    const recordName = this.reader.recordDimension.name;
    const recordLength = this.reader.recordDimension.length;
    this.dimensions = this.reader.dimensions.map((d) => ({
      name: d.name,
      // the header stores 0 for the unlimited dimension
      size: d.name === recordName ? recordLength : d.size,
    }));
    this.variables = this.reader.variables.map((v) => {
      const names = v.dimensions.map((d) =>
        typeof d === 'number' ? this.dimensions[d].name : String(d),
      );
      return {
        name: v.name,
        dimensions: names,
        shape: names.map((n) => this.dimensionSize(n)),
        attributes: attributeMap(v.attributes),
      };
    });
    this.globalAttributes = attributeMap(this.reader.globalAttributes);
  }

  dimensionSize(name: string): number {
    const dim = this.dimensions.find((d) => d.name === name);
    if (dim === undefined) throw new Error(`unknown dimension '${name}'`);
    return dim.size;
  }

  variable(name: string): VariableInfo | undefined {
    return this.variables.find((v) => v.name === name);
  }

  attribute(variableName: string, attributeName: string): string | number | number[] | undefined {
    return this.variable(variableName)?.attributes[attributeName];
  }

  /**
   * All values of a numeric variable, flattened row-major. netcdfjs reads
   * through the 4-byte alignment padding of each slab, so the extra values
   * are trimmed here, per record for record variables.
   */
  values(name: string): Float64Array {
    const info = this.variable(name);
    if (info === undefined) throw new Error(`unknown variable '${name}'`);
    const raw = this.reader.getDataVariable(name);
    const total = info.shape.reduce((a, b) => a * b, 1);
    const out = new Float64Array(total);
    const isRecord = info.dimensions.length > 0
      && info.dimensions[0] === this.reader.recordDimension.name;
    const slab = isRecord && info.shape[0] > 0 ? total / info.shape[0] : total;
    let i = 0;
    for (const entry of raw) {
      if (typeof entry === 'string') {
        throw new Error(`variable '${name}' holds characters, not numbers`);
      }
      const group = Array.isArray(entry) ? entry : [entry];
      for (let k = 0; k < group.length && k < slab && i < total; k++) {
        out[i++] = group[k];
      }
    }
    if (i !== total) {
      throw new Error(`variable '${name}': expected ${total} values, read ${i}`);
    }
    return out;
  }

  /** Human-readable listing of what the file holds, for error messages. */
  inventory(): string {
    const dims = this.dimensions.map((d) => `${d.name}=${d.size}`).join(', ');
    const vars = this.variables.map((v) => {
      const units = v.attributes['units'];
      const suffix = units === undefined ? '' : `  units=${JSON.stringify(units)}`;
      return `  ${v.name}(${v.dimensions.join(', ')})${suffix}`;
    });
    return [`dimensions: ${dims}`, 'variables:', ...vars].join('\n');
  }
}

function attributeMap(
  attributes: Array<{ name: string; value: unknown }>,
): Record<string, string | number | number[]> {
  const out: Record<string, string | number | number[]> = {};
  for (const att of attributes) {
    const v = att.value;
    if (typeof v === 'string' || typeof v === 'number') {
      out[att.name] = v;
    } else if (Array.isArray(v)) {
      out[att.name] = v.map(Number);
    }
  }
  return out;
}
