import { Image } from "../src/ppm";

export function solidImage(width: number, height: number,
                           rgb: [number, number, number] = [40, 40, 48]): Image {
  const data = new Uint8Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    data[i * 3] = rgb[0];
    data[i * 3 + 1] = rgb[1];
    data[i * 3 + 2] = rgb[2];
  }
  return { width, height, data };
}

export function drawDisc(img: Image, cx: number, cy: number, r: number,
                         rgb: [number, number, number]): void {
  for (let y = 0; y < img.height; y++) {
    for (let x = 0; x < img.width; x++) {
      if ((x - cx) ** 2 + (y - cy) ** 2 <= r * r) {
        const p = (y * img.width + x) * 3;
        img.data[p] = rgb[0];
        img.data[p + 1] = rgb[1];
        img.data[p + 2] = rgb[2];
      }
    }
  }
}

export function drawRect(img: Image, x0: number, y0: number, w: number, h: number,
                         rgb: [number, number, number]): void {
  for (let y = y0; y < y0 + h; y++) {
    for (let x = x0; x < x0 + w; x++) {
      if (x >= 0 && x < img.width && y >= 0 && y < img.height) {
        const p = (y * img.width + x) * 3;
        img.data[p] = rgb[0];
        img.data[p + 1] = rgb[1];
        img.data[p + 2] = rgb[2];
      }
    }
  }
}

// Minimal 4:2:0 y4m writer used to fabricate clips with known container
// metadata. Forward BT.601 limited-range matrix; chroma is the mean of each
// 2x2 block.
export function encodeY4m(frames: Image[], fpsNum: number, fpsDen = 1): Buffer {
  const { width, height } = frames[0];
  const chromaW = Math.ceil(width / 2);
  const chromaH = Math.ceil(height / 2);
  const parts: Buffer[] = [
    Buffer.from(`YUV4MPEG2 W${width} H${height} F${fpsNum}:${fpsDen} Ip A1:1 C420\n`, "ascii"),
  ];

  for (const img of frames) {
    const yPlane = new Uint8Array(width * height);
    const uAcc = new Float64Array(chromaW * chromaH);
    const vAcc = new Float64Array(chromaW * chromaH);
    const cCount = new Float64Array(chromaW * chromaH);

    for (let row = 0; row < height; row++) {
      for (let col = 0; col < width; col++) {
        const p = (row * width + col) * 3;
        const r = img.data[p], g = img.data[p + 1], b = img.data[p + 2];
        yPlane[row * width + col] = clampByte(16 + 0.257 * r + 0.504 * g + 0.098 * b);
        const c = ((row / 2) | 0) * chromaW + ((col / 2) | 0);
        uAcc[c] += 128 - 0.148 * r - 0.291 * g + 0.439 * b;
        vAcc[c] += 128 + 0.439 * r - 0.368 * g - 0.071 * b;
        cCount[c]++;
      }
    }

    const uPlane = new Uint8Array(chromaW * chromaH);
    const vPlane = new Uint8Array(chromaW * chromaH);
    for (let c = 0; c < uPlane.length; c++) {
      uPlane[c] = clampByte(uAcc[c] / cCount[c]);
      vPlane[c] = clampByte(vAcc[c] / cCount[c]);
    }
    parts.push(Buffer.from("FRAME\n", "ascii"),
               Buffer.from(yPlane), Buffer.from(uPlane), Buffer.from(vPlane));
  }
  return Buffer.concat(parts);
}

function clampByte(v: number): number {
  return v < 0 ? 0 : v > 255 ? 255 : Math.round(v);
}
