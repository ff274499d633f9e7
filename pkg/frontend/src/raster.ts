/** Tiny software raster surface: pixels, lines, markers, bitmap text. */

import { GLYPH_H, GLYPH_W, glyph } from "./font.js";

export type RGB = [number, number, number];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: RGB = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    for (let i = 0; i < width * height; i++) {
      this.data[3 * i] = background[0];
      this.data[3 * i + 1] = background[1];
      this.data[3 * i + 2] = background[2];
    }
  }

  set(x: number, y: number, c: RGB): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = 3 * (Math.round(y) * this.width + Math.round(x));
    this.data[i] = c[0];
    this.data[i + 1] = c[1];
    this.data[i + 2] = c[2];
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: RGB): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) {
        this.set(x, y, c);
      }
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: RGB): void {
    // Bresenham on rounded endpoints
    let xa = Math.round(x0);
    let ya = Math.round(y0);
    const xb = Math.round(x1);
    const yb = Math.round(y1);
    const dx = Math.abs(xb - xa);
    const dy = -Math.abs(yb - ya);
    const sx = xa < xb ? 1 : -1;
    const sy = ya < yb ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(xa, ya, c);
      if (xa === xb && ya === yb) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        xa += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ya += sy;
      }
    }
  }

  marker(x: number, y: number, c: RGB): void {
    for (let d = -2; d <= 2; d++) {
      this.set(x + d, y, c);
      this.set(x, y + d, c);
    }
  }

  text(x: number, y: number, s: string, c: RGB): void {
    for (let i = 0; i < s.length; i++) {
      const rows = glyph(s[i]);
      for (let r = 0; r < GLYPH_H; r++) {
        for (let b = 0; b < 5; b++) {
          if ((rows[r] >> (4 - b)) & 1) {
            this.set(x + i * GLYPH_W + b, y + r, c);
          }
        }
      }
    }
  }

  textWidth(s: string): number {
    return s.length * GLYPH_W;
  }
}

/** Ten-stop approximation of the viridis palette, linearly interpolated. */
const VIRIDIS: RGB[] = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [180, 222, 44],
  [253, 231, 37],
];

export function colormap(v: number): RGB {
  const t = Math.min(1, Math.max(0, v)) * (VIRIDIS.length - 1);
  const i = Math.min(VIRIDIS.length - 2, Math.floor(t));
  const f = t - i;
  const a = VIRIDIS[i];
  const b = VIRIDIS[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

export const LINE_COLORS: RGB[] = [
  [31, 119, 180],
  [214, 39, 40],
  [44, 160, 44],
  [255, 127, 14],
  [148, 103, 189],
  [140, 86, 75],
];
