/**
 * Segment overlay rendering.
 *
 * Overlays are produced as raw RGBA buffers so they can be unit-tested
 * without a canvas; the page shim wraps them in ImageData and draws them
 * onto the overlay layer above the grayscale base image.
 */

import { boundaryMask, type SegmentMap } from "./rle.js";

export interface Rgba {
  r: number;
  g: number;
  b: number;
  a: number;
}

export const BOUNDARY_COLOR: Rgba = { r: 255, g: 200, b: 0, a: 170 };
export const HOVER_COLOR: Rgba = { r: 80, g: 160, b: 255, a: 90 };
export const SELECT_COLOR: Rgba = { r: 255, g: 80, b: 80, a: 110 };

function fill(buf: Uint8ClampedArray, i: number, c: Rgba): void {
  buf[i * 4] = c.r;
  buf[i * 4 + 1] = c.g;
  buf[i * 4 + 2] = c.b;
  buf[i * 4 + 3] = c.a;
}

/**
 * RGBA overlay: translucent segment boundaries plus hover/select tints.
 * Pixels belonging to no highlighted segment stay fully transparent.
 */
export function renderOverlay(
  map: SegmentMap,
  hovered: number,
  selected: number
): Uint8ClampedArray<ArrayBuffer> {
  const buf = new Uint8ClampedArray(map.width * map.height * 4);
  for (let i = 0; i < map.labels.length; i++) {
    const label = map.labels[i];
    if (label === selected && selected >= 0) {
      fill(buf, i, SELECT_COLOR);
    } else if (label === hovered && hovered >= 0) {
      fill(buf, i, HOVER_COLOR);
    }
  }
  const edges = boundaryMask(map);
  for (let i = 0; i < edges.length; i++) {
    if (edges[i]) fill(buf, i, BOUNDARY_COLOR);
  }
  return buf;
}

/** Pixel indices tinted by the overlay for one segment label. */
export function highlightedPixels(
  buf: Uint8ClampedArray,
  color: Rgba
): Set<number> {
  const out = new Set<number>();
  for (let i = 0; i * 4 < buf.length; i++) {
    if (
      buf[i * 4] === color.r &&
      buf[i * 4 + 1] === color.g &&
      buf[i * 4 + 2] === color.b &&
      buf[i * 4 + 3] === color.a
    ) {
      out.add(i);
    }
  }
  return out;
}
