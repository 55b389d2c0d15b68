/** Minimal reader for .npy depth artifacts (little-endian float32/float64). */

export interface NpyArray {
  shape: number[];
  /** Row-major values, length = product of shape. */
  data: Float64Array;
}

const MAGIC = [0x93, 0x4e, 0x55, 0x4d, 0x50, 0x59]; // \x93NUMPY

export function parseNpy(bytes: Uint8Array): NpyArray {
  if (bytes.length < 10 || MAGIC.some((b, i) => bytes[i] !== b)) {
    throw new Error("not an npy file");
  }
  const major = bytes[6]!;
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  let headerLen: number;
  let offset: number;
  if (major === 1) {
    headerLen = view.getUint16(8, true);
    offset = 10;
  } else {
    headerLen = view.getUint32(8, true);
    offset = 12;
  }
  const header = new TextDecoder("latin1").decode(
    bytes.subarray(offset, offset + headerLen),
  );
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeText === undefined) {
    throw new Error("malformed npy header");
  }
  if (fortran === "True") throw new Error("fortran order is not supported");
  const shape = shapeText
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map(Number);
  const count = shape.reduce((a, b) => a * b, 1);
  const start = offset + headerLen;
  const data = new Float64Array(count);
  if (descr === "<f8") {
    for (let i = 0; i < count; i++) data[i] = view.getFloat64(start + 8 * i, true);
  } else if (descr === "<f4") {
    for (let i = 0; i < count; i++) data[i] = view.getFloat32(start + 4 * i, true);
  } else {
    throw new Error(`unsupported dtype ${descr}`);
  }
  return { shape, data };
}

/** Min/max over finite values, for normalizing depth thumbnails. */
export function valueRange(arr: NpyArray): { min: number; max: number } {
  let min = Infinity;
  let max = -Infinity;
  for (const v of arr.data) {
    if (!Number.isFinite(v)) continue;
    if (v < min) min = v;
    if (v > max) max = v;
  }
  return { min, max };
}
