import { Image } from "./ppm";

export interface Clip {
  width: number;
  height: number;
  fps: number;
  frames: Image[];
}

// Uncompressed YUV4MPEG2. Stream header "YUV4MPEG2 W.. H.. F num:den ... C..."
// then one "FRAME...\n" marker plus planar YUV data per frame. Chroma is
// upsampled nearest neighbour for 4:2:0; colorspace is BT.601 limited range.
export function decodeY4m(buf: Buffer, name = "y4m"): Clip {
  const headerEnd = buf.indexOf(0x0a);
  if (headerEnd < 0) throw new Error(`${name}: missing stream header`);
  const tags = buf.toString("ascii", 0, headerEnd).split(" ");
  if (tags[0] !== "YUV4MPEG2") throw new Error(`${name}: not a YUV4MPEG2 stream`);

  let width = 0;
  let height = 0;
  let fps = 0;
  let subsampling = "420";
  for (const tag of tags.slice(1)) {
    if (tag.startsWith("W")) width = parseInt(tag.slice(1), 10);
    else if (tag.startsWith("H")) height = parseInt(tag.slice(1), 10);
    else if (tag.startsWith("F")) {
      const [num, den] = tag.slice(1).split(":").map(Number);
      if (num > 0 && den > 0) fps = num / den;
    } else if (tag.startsWith("C")) {
      subsampling = tag.slice(1);
    }
  }
  if (width <= 0 || height <= 0) throw new Error(`${name}: bad frame size`);
  if (fps <= 0) throw new Error(`${name}: bad frame rate`);

  let chromaW: number;
  let chromaH: number;
  if (subsampling.startsWith("420")) {
    chromaW = Math.ceil(width / 2);
    chromaH = Math.ceil(height / 2);
  } else if (subsampling.startsWith("444")) {
    chromaW = width;
    chromaH = height;
  } else {
    throw new Error(`${name}: unsupported chroma mode C${subsampling}`);
  }

  const ySize = width * height;
  const cSize = chromaW * chromaH;
  const frames: Image[] = [];
  let pos = headerEnd + 1;
  while (pos < buf.length) {
    const markEnd = buf.indexOf(0x0a, pos);
    if (markEnd < 0 || buf.toString("ascii", pos, Math.min(pos + 5, buf.length)) !== "FRAME") {
      throw new Error(`${name}: corrupt frame marker at byte ${pos}`);
    }
    pos = markEnd + 1;
    if (buf.length - pos < ySize + 2 * cSize) {
      throw new Error(`${name}: truncated frame ${frames.length}`);
    }
    const yPlane = buf.subarray(pos, pos + ySize);
    const uPlane = buf.subarray(pos + ySize, pos + ySize + cSize);
    const vPlane = buf.subarray(pos + ySize + cSize, pos + ySize + 2 * cSize);
    frames.push(yuvToRgb(yPlane, uPlane, vPlane, width, height, chromaW));
    pos += ySize + 2 * cSize;
  }
  if (frames.length === 0) throw new Error(`${name}: stream contains no frames`);
  return { width, height, fps, frames };
}

function yuvToRgb(yPlane: Uint8Array, uPlane: Uint8Array, vPlane: Uint8Array,
                  width: number, height: number, chromaW: number): Image {
  const sub = chromaW === width ? 1 : 2;
  const data = new Uint8Array(width * height * 3);
  for (let row = 0; row < height; row++) {
    const cRow = (row / sub) | 0;
    for (let col = 0; col < width; col++) {
      const y = 1.164 * (yPlane[row * width + col] - 16);
      const cIdx = cRow * chromaW + ((col / sub) | 0);
      const cb = uPlane[cIdx] - 128;
      const cr = vPlane[cIdx] - 128;
      const out = (row * width + col) * 3;
      data[out] = clampByte(y + 1.596 * cr);
      data[out + 1] = clampByte(y - 0.392 * cb - 0.813 * cr);
      data[out + 2] = clampByte(y + 2.017 * cb);
    }
  }
  return { width, height, data };
}

function clampByte(v: number): number {
  return v < 0 ? 0 : v > 255 ? 255 : Math.round(v);
}
