/**
 * Binary PPM (P6) decoding for thumbnails.
 *
 * The service streams keyframe thumbnails as raw PPM; the client turns
 * them into RGBA pixel buffers and paints them onto canvases. Decoding is
 * pure so it stays testable without a canvas implementation.
 */

export interface RgbImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
}

const isSpace = (b: number): boolean => b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d;

class ByteReader {
  pos = 0;

  constructor(private bytes: Uint8Array) {}

  /* whitespace and # comments separate header tokens */
  private skipFiller(): void {
    while (this.pos < this.bytes.length) {
      const b = this.bytes[this.pos]!;
      if (isSpace(b)) {
        this.pos += 1;
      } else if (b === 0x23) {
        while (this.pos < this.bytes.length && this.bytes[this.pos] !== 0x0a) this.pos += 1;
      } else {
        return;
      }
    }
  }

  token(): string {
    this.skipFiller();
    const start = this.pos;
    while (this.pos < this.bytes.length && !isSpace(this.bytes[this.pos]!)) this.pos += 1;
    if (this.pos === start) throw new Error("truncated PPM header");
    return String.fromCharCode(...this.bytes.subarray(start, this.pos));
  }

  rest(): Uint8Array {
    return this.bytes.subarray(this.pos);
  }
}

export function decodePpm(bytes: Uint8Array): RgbImage {
  const reader = new ByteReader(bytes);
  const magic = reader.token();
  if (magic !== "P6") throw new Error(`expected P6 PPM, got ${magic}`);

  const width = Number(reader.token());
  const height = Number(reader.token());
  const maxval = Number(reader.token());
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new Error("bad PPM dimensions");
  }
  if (maxval !== 255) throw new Error(`unsupported PPM maxval ${maxval}`);

  reader.pos += 1; // single whitespace byte ends the header
  const pixels = reader.rest();
  const need = width * height * 3;
  if (pixels.length < need) throw new Error("truncated PPM pixel data");

  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0, o = 0; i < need; i += 3, o += 4) {
    rgba[o] = pixels[i]!;
    rgba[o + 1] = pixels[i + 1]!;
    rgba[o + 2] = pixels[i + 2]!;
    rgba[o + 3] = 255;
  }
  return { width, height, rgba };
}

/**
 * Paint a decoded image onto a canvas, scaling the canvas buffer to the
 * image's pixel size. Returns false when no 2d context is available
 * (headless test DOM); the canvas then keeps its placeholder styling.
 */
export function paintImage(canvas: HTMLCanvasElement, image: RgbImage): boolean {
  canvas.width = image.width;
  canvas.height = image.height;
  let ctx: CanvasRenderingContext2D | null = null;
  try {
    ctx = canvas.getContext("2d");
  } catch {
    return false;
  }
  if (!ctx) return false;
  ctx.putImageData(new ImageData(image.rgba, image.width, image.height), 0, 0);
  return true;
}
