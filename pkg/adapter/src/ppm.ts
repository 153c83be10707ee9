import * as fs from "fs";

export interface Image {
  width: number;
  height: number;
  data: Uint8Array; // packed RGB, row major
}

// Binary PPM (P6) only, maxval 255. Header tokens are separated by arbitrary
// whitespace and # comments run to end of line; pixel data starts one byte
// after the maxval token.
export function decodePpm(buf: Buffer, name = "ppm"): Image {
  if (buf.length < 2 || buf[0] !== 0x50 || buf[1] !== 0x36) {
    throw new Error(`${name}: not a P6 ppm file`);
  }
  let pos = 2;

  function nextToken(): number {
    for (;;) {
      while (pos < buf.length && isSpace(buf[pos])) pos++;
      if (pos < buf.length && buf[pos] === 0x23) {
        while (pos < buf.length && buf[pos] !== 0x0a) pos++;
        continue;
      }
      break;
    }
    const start = pos;
    while (pos < buf.length && !isSpace(buf[pos])) pos++;
    if (pos === start) throw new Error(`${name}: truncated header`);
    const value = parseInt(buf.toString("ascii", start, pos), 10);
    if (!Number.isFinite(value)) throw new Error(`${name}: bad header token`);
    return value;
  }

  const width = nextToken();
  const height = nextToken();
  const maxval = nextToken();
  if (width <= 0 || height <= 0) throw new Error(`${name}: bad dimensions`);
  if (maxval !== 255) throw new Error(`${name}: only maxval 255 is supported`);
  pos++; // single whitespace byte after maxval

  const need = width * height * 3;
  if (buf.length - pos < need) {
    throw new Error(`${name}: expected ${need} pixel bytes, found ${buf.length - pos}`);
  }
  return { width, height, data: new Uint8Array(buf.subarray(pos, pos + need)) };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

export function encodePpm(img: Image): Buffer {
  const header = Buffer.from(`P6\n${img.width} ${img.height}\n255\n`, "ascii");
  return Buffer.concat([header, Buffer.from(img.data)]);
}

export function readPpm(path: string): Image {
  return decodePpm(fs.readFileSync(path), path);
}

export function writePpm(path: string, img: Image): void {
  fs.writeFileSync(path, encodePpm(img));
}
