/**
 * Run-length-encoded segment maps, as produced by the session service.
 *
 * The wire form is {"width", "height", "rle": [label, run, label, run, ...]}
 * in row-major order. Decoding yields one Int32 label per pixel.
 */

export interface RleSegmentMap {
  width: number;
  height: number;
  rle: number[];
}

export interface SegmentMap {
  width: number;
  height: number;
  labels: Int32Array;
  count: number;
}

export function decodeRle(encoded: RleSegmentMap): SegmentMap {
  const { width, height, rle } = encoded;
  if (width <= 0 || height <= 0) {
    throw new Error(`invalid segment map dimensions ${width}x${height}`);
  }
  if (rle.length % 2 !== 0) {
    throw new Error("RLE payload must hold (label, run) pairs");
  }
  const total = width * height;
  const labels = new Int32Array(total);
  let pos = 0;
  let maxLabel = -1;
  for (let i = 0; i < rle.length; i += 2) {
    const label = rle[i];
    const run = rle[i + 1];
    if (!Number.isInteger(run) || run <= 0) {
      throw new Error(`invalid run length ${run}`);
    }
    if (pos + run > total) {
      throw new Error("RLE runs exceed image area");
    }
    labels.fill(label, pos, pos + run);
    pos += run;
    if (label > maxLabel) maxLabel = label;
  }
  if (pos !== total) {
    throw new Error(`RLE covers ${pos} pixels, expected ${total}`);
  }
  return { width, height, labels, count: maxLabel + 1 };
}

/** Label at integer pixel coordinates, or -1 when out of bounds. */
export function labelAt(map: SegmentMap, x: number, y: number): number {
  if (x < 0 || y < 0 || x >= map.width || y >= map.height) return -1;
  return map.labels[y * map.width + x];
}

/**
 * Pixels on the boundary between differently-labeled segments.
 *
 * A pixel is a boundary pixel when its right or bottom 4-neighbor carries a
 * different label; both sides of the edge are marked so strokes read as
 * two-pixel lines at 1:1 zoom.
 */
export function boundaryMask(map: SegmentMap): Uint8Array {
  const { width, height, labels } = map;
  const out = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      if (x + 1 < width && labels[i] !== labels[i + 1]) {
        out[i] = 1;
        out[i + 1] = 1;
      }
      if (y + 1 < height && labels[i] !== labels[i + width]) {
        out[i] = 1;
        out[i + width] = 1;
      }
    }
  }
  return out;
}

/** Tight bounding box of one segment, or null when the label is absent. */
export function segmentBounds(
  map: SegmentMap,
  label: number
): { x0: number; y0: number; x1: number; y1: number } | null {
  let x0 = map.width;
  let y0 = map.height;
  let x1 = -1;
  let y1 = -1;
  for (let y = 0; y < map.height; y++) {
    for (let x = 0; x < map.width; x++) {
      if (map.labels[y * map.width + x] === label) {
        if (x < x0) x0 = x;
        if (y < y0) y0 = y;
        if (x > x1) x1 = x;
        if (y > y1) y1 = y;
      }
    }
  }
  if (x1 < 0) return null;
  return { x0, y0, x1, y1 };
}
