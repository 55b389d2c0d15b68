import { describe, expect, it } from "vitest";

import { parseNpy, valueRange } from "../src/npy.js";

/** Build a v1.0 npy file in memory. */
function makeNpy(
  shape: number[],
  values: number[],
  descr = "<f8",
): Uint8Array {
  const shapeText =
    shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(", ")})`;
  let header = `{'descr': '${descr}', 'fortran_order': False, 'shape': ${shapeText}, }`;
  const unpadded = 10 + header.length + 1;
  header = header.padEnd(header.length + ((64 - (unpadded % 64)) % 64)) + "\n";
  const itemsize = descr === "<f8" ? 8 : 4;
  const bytes = new Uint8Array(10 + header.length + itemsize * values.length);
  bytes.set([0x93, 0x4e, 0x55, 0x4d, 0x50, 0x59, 1, 0]);
  const view = new DataView(bytes.buffer);
  view.setUint16(8, header.length, true);
  for (let i = 0; i < header.length; i++) bytes[10 + i] = header.charCodeAt(i);
  const start = 10 + header.length;
  values.forEach((v, i) => {
    if (descr === "<f8") view.setFloat64(start + 8 * i, v, true);
    else view.setFloat32(start + 4 * i, v, true);
  });
  return bytes;
}

describe("parseNpy", () => {
  it("reads a little-endian float64 2-D array", () => {
    const arr = parseNpy(makeNpy([2, 3], [1, 2, 3, 4, 5, 6]));
    expect(arr.shape).toEqual([2, 3]);
    expect(Array.from(arr.data)).toEqual([1, 2, 3, 4, 5, 6]);
  });

  it("reads float32 data", () => {
    const arr = parseNpy(makeNpy([4], [0.5, 1.5, 2.5, 3.5], "<f4"));
    expect(arr.shape).toEqual([4]);
    expect(Array.from(arr.data)).toEqual([0.5, 1.5, 2.5, 3.5]);
  });

  it("handles 1-element tuple shapes", () => {
    expect(parseNpy(makeNpy([3], [7, 8, 9])).shape).toEqual([3]);
  });

  it("rejects non-npy bytes", () => {
    expect(() => parseNpy(new Uint8Array([1, 2, 3, 4, 5, 6, 7, 8, 9, 10]))).toThrow(
      /not an npy/,
    );
  });

  it("rejects unsupported dtypes", () => {
    expect(() => parseNpy(makeNpy([1], [1], "<i8"))).toThrow(/unsupported dtype/);
  });

  it("computes finite value ranges", () => {
    const arr = parseNpy(makeNpy([4], [3, Infinity, -2, 10]));
    expect(valueRange(arr)).toEqual({ min: -2, max: 10 });
  });
});
