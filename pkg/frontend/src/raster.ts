/** Minimal self-contained RGB raster with a PNG encoder (node zlib) and the
 * drawing primitives the figure renderers need. Deterministic output: the
 * same draw calls always produce byte-identical PNG files. */

import { deflateSync } from "node:zlib";

import { GLYPH_HEIGHT, GLYPH_WIDTH, glyphFor } from "./font.js";

export type Color = [number, number, number];

export const BLACK: Color = [0, 0, 0];
export const WHITE: Color = [255, 255, 255];
export const GREY: Color = [150, 150, 150];

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (const byte of buf) {
    c = CRC_TABLE[(c ^ byte) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Buffer): Buffer {
  const head = Buffer.concat([Buffer.from(type, "ascii"), data]);
  const out = Buffer.alloc(head.length + 8);
  out.writeUInt32BE(data.length, 0);
  head.copy(out, 4);
  out.writeUInt32BE(crc32(head), head.length + 4);
  return out;
}

export class Raster {
  readonly width: number;
  readonly height: number;
  private readonly pixels: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 3);
    for (let i = 0; i < width * height; i++) {
      this.pixels.set(background, i * 3);
    }
  }

  set(x: number, y: number, color: Color): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) {
      return;
    }
    this.pixels.set(color, (y * this.width + x) * 3);
  }

  line(x0: number, y0: number, x1: number, y1: number, color: Color): void {
    // Bresenham on rounded endpoints
    let x = Math.round(x0);
    let y = Math.round(y0);
    const xe = Math.round(x1);
    const ye = Math.round(y1);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(x, y, color);
      if (x === xe && y === ye) {
        break;
      }
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  rect(x0: number, y0: number, x1: number, y1: number, color: Color): void {
    this.line(x0, y0, x1, y0, color);
    this.line(x1, y0, x1, y1, color);
    this.line(x1, y1, x0, y1, color);
    this.line(x0, y1, x0, y0, color);
  }

  fillRect(x0: number, y0: number, x1: number, y1: number, color: Color): void {
    for (let y = Math.round(y0); y <= Math.round(y1); y++) {
      for (let x = Math.round(x0); x <= Math.round(x1); x++) {
        this.set(x, y, color);
      }
    }
  }

  polyline(xs: number[], ys: number[], color: Color): void {
    for (let i = 1; i < xs.length; i++) {
      this.line(xs[i - 1], ys[i - 1], xs[i], ys[i], color);
    }
  }

  marker(x: number, y: number, shape: string, color: Color, size = 3): void {
    switch (shape) {
      case "square":
        this.fillRect(x - size + 1, y - size + 1, x + size - 1, y + size - 1, color);
        break;
      case "diamond":
        for (let d = -size; d <= size; d++) {
          const w = size - Math.abs(d);
          this.line(x - w, y + d, x + w, y + d, color);
        }
        break;
      case "cross":
        this.line(x - size, y - size, x + size, y + size, color);
        this.line(x - size, y + size, x + size, y - size, color);
        break;
      case "plus":
        this.line(x - size, y, x + size, y, color);
        this.line(x, y - size, x, y + size, color);
        break;
      default: // circle
        for (let d = -size; d <= size; d++) {
          const w = Math.round(Math.sqrt(size * size - d * d));
          this.line(x - w, y + d, x + w, y + d, color);
        }
    }
  }

  text(x: number, y: number, s: string, color: Color, scale = 1): void {
    let cx = Math.round(x);
    for (const ch of s) {
      const cols = glyphFor(ch);
      for (let c = 0; c < GLYPH_WIDTH; c++) {
        for (let r = 0; r < GLYPH_HEIGHT; r++) {
          if (cols[c] & (1 << r)) {
            this.fillRect(
              cx + c * scale,
              y + r * scale,
              cx + c * scale + scale - 1,
              y + r * scale + scale - 1,
              color,
            );
          }
        }
      }
      cx += (GLYPH_WIDTH + 1) * scale;
    }
  }

  textWidth(s: string, scale = 1): number {
    return s.length * (GLYPH_WIDTH + 1) * scale - scale;
  }

  toPng(): Buffer {
    const stride = this.width * 3;
    const raw = Buffer.alloc((stride + 1) * this.height);
    for (let y = 0; y < this.height; y++) {
      raw[y * (stride + 1)] = 0; // filter: none
      raw.set(
        this.pixels.subarray(y * stride, (y + 1) * stride),
        y * (stride + 1) + 1,
      );
    }
    const ihdr = Buffer.alloc(13);
    ihdr.writeUInt32BE(this.width, 0);
    ihdr.writeUInt32BE(this.height, 4);
    ihdr[8] = 8; // bit depth
    ihdr[9] = 2; // color type: truecolor
    return Buffer.concat([
      Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
      chunk("IHDR", ihdr),
      chunk("IDAT", deflateSync(raw, { level: 9 })),
      chunk("IEND", Buffer.alloc(0)),
    ]);
  }
}
