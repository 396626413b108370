import { describe, expect, it } from "vitest";
import {
  boundaryMask,
  decodeRle,
  labelAt,
  segmentBounds,
} from "../src/rle.js";

describe("decodeRle", () => {
  it("expands runs in row-major order", () => {
    const map = decodeRle({ width: 4, height: 2, rle: [0, 3, 1, 5] });
    expect(Array.from(map.labels)).toEqual([0, 0, 0, 1, 1, 1, 1, 1]);
    expect(map.count).toBe(2);
  });

  it("covered area equals the image area or decoding fails", () => {
    expect(() => decodeRle({ width: 4, height: 2, rle: [0, 7] })).toThrow(
      /covers 7 pixels, expected 8/
    );
    expect(() => decodeRle({ width: 2, height: 2, rle: [0, 5] })).toThrow(
      /exceed/
    );
  });

  it("rejects malformed payloads", () => {
    expect(() => decodeRle({ width: 2, height: 1, rle: [0, 1, 1] })).toThrow(
      /pairs/
    );
    expect(() => decodeRle({ width: 2, height: 1, rle: [0, 0, 1, 2] })).toThrow(
      /run length/
    );
    expect(() => decodeRle({ width: 0, height: 3, rle: [] })).toThrow(
      /dimensions/
    );
  });

  it("round trips a random label field", () => {
    const width = 13;
    const height = 7;
    const labels: number[] = [];
    let seed = 99;
    for (let i = 0; i < width * height; i++) {
      seed = (seed * 1103515245 + 12345) % 2147483648;
      labels.push(seed % 4);
    }
    const rle: number[] = [];
    let run = 1;
    for (let i = 1; i <= labels.length; i++) {
      if (i < labels.length && labels[i] === labels[i - 1]) {
        run += 1;
      } else {
        rle.push(labels[i - 1], run);
        run = 1;
      }
    }
    const map = decodeRle({ width, height, rle });
    expect(Array.from(map.labels)).toEqual(labels);
  });
});

describe("labelAt", () => {
  const map = decodeRle({ width: 3, height: 2, rle: [0, 3, 1, 3] });

  it("reads row-major coordinates", () => {
    expect(labelAt(map, 2, 0)).toBe(0);
    expect(labelAt(map, 0, 1)).toBe(1);
  });

  it("is -1 outside the image", () => {
    expect(labelAt(map, -1, 0)).toBe(-1);
    expect(labelAt(map, 3, 0)).toBe(-1);
    expect(labelAt(map, 0, 2)).toBe(-1);
  });
});

describe("boundaryMask", () => {
  it("marks both sides of a vertical split and nothing else", () => {
    const map = decodeRle({ width: 4, height: 2, rle: [0, 2, 1, 2, 0, 2, 1, 2] });
    const edges = boundaryMask(map);
    expect(Array.from(edges)).toEqual([0, 1, 1, 0, 0, 1, 1, 0]);
  });

  it("is all zero for a single segment", () => {
    const map = decodeRle({ width: 5, height: 4, rle: [0, 20] });
    expect(boundaryMask(map).every((v) => v === 0)).toBe(true);
  });
});

describe("segmentBounds", () => {
  it("returns the tight box of a label", () => {
    const map = decodeRle({ width: 4, height: 3, rle: [0, 5, 1, 2, 0, 5] });
    expect(segmentBounds(map, 1)).toEqual({ x0: 1, y0: 1, x1: 2, y1: 1 });
  });

  it("is null for absent labels", () => {
    const map = decodeRle({ width: 2, height: 2, rle: [0, 4] });
    expect(segmentBounds(map, 7)).toBeNull();
  });
});
