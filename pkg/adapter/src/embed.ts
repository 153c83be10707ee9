import { Image } from "./ppm";

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface Embedder {
  name: string;
  dim: number;
  embed(img: Image, box: Box): number[];
}

// Hand-rolled appearance embeddings. They only need to be stable for the
// same face and different across faces; swap in a real model by adding an
// entry here.
export const embedders: Record<string, Embedder> = {
  patch40: { name: "patch40", dim: 40, embed: patchEmbed },
  hue8: { name: "hue8", dim: 8, embed: hueEmbed },
};

export function getEmbedder(name: string): Embedder {
  const e = embedders[name];
  if (!e) {
    throw new Error(`unknown embedding model ${name} (have: ${Object.keys(embedders).join(", ")})`);
  }
  return e;
}

interface CropStats {
  meanR: number;
  meanG: number;
  meanB: number;
  meanY: number;
  stdY: number;
  grid: number[]; // GRID x GRID mean-pooled luminance
  lumas: Float32Array;
  w: number;
  h: number;
}

const GRID = 6;

function cropStats(img: Image, box: Box): CropStats {
  const x0 = Math.max(0, Math.floor(box.x));
  const y0 = Math.max(0, Math.floor(box.y));
  const x1 = Math.min(img.width, Math.ceil(box.x + box.w));
  const y1 = Math.min(img.height, Math.ceil(box.y + box.h));
  const w = Math.max(1, x1 - x0);
  const h = Math.max(1, y1 - y0);

  let sumR = 0, sumG = 0, sumB = 0, sumY = 0, sumY2 = 0;
  const lumas = new Float32Array(w * h);
  const gridSum = new Float64Array(GRID * GRID);
  const gridCount = new Float64Array(GRID * GRID);

  for (let row = 0; row < h; row++) {
    const gy = Math.min(GRID - 1, (row * GRID / h) | 0);
    for (let col = 0; col < w; col++) {
      const p = ((y0 + row) * img.width + x0 + col) * 3;
      const r = img.data[p], g = img.data[p + 1], b = img.data[p + 2];
      const y = 0.299 * r + 0.587 * g + 0.114 * b;
      sumR += r; sumG += g; sumB += b;
      sumY += y; sumY2 += y * y;
      lumas[row * w + col] = y;
      const cell = gy * GRID + Math.min(GRID - 1, (col * GRID / w) | 0);
      gridSum[cell] += y;
      gridCount[cell] += 1;
    }
  }

  const n = w * h;
  const meanY = sumY / n;
  const grid: number[] = [];
  for (let c = 0; c < GRID * GRID; c++) {
    grid.push(gridCount[c] > 0 ? gridSum[c] / gridCount[c] : meanY);
  }
  return {
    meanR: sumR / n, meanG: sumG / n, meanB: sumB / n,
    meanY,
    stdY: Math.sqrt(Math.max(0, sumY2 / n - meanY * meanY)),
    grid, lumas, w, h,
  };
}

// 6x6 zero-mean luminance grid (shape) + chroma offsets (identity carries
// mostly in colour, so those get the heavier weight) + overall brightness.
function patchEmbed(img: Image, box: Box): number[] {
  const s = cropStats(img, box);
  const vec: number[] = [];
  for (const cell of s.grid) vec.push(cell - s.meanY);
  vec.push(6 * (s.meanR - s.meanG));
  vec.push(6 * (s.meanG - s.meanB));
  vec.push(6 * (s.meanB - s.meanR));
  vec.push(s.meanY - 128);
  return normalize(vec);
}

// Cheap colour-statistics variant.
function hueEmbed(img: Image, box: Box): number[] {
  const s = cropStats(img, box);
  const sorted = Float32Array.from(s.lumas).sort();
  const q25 = sorted[(sorted.length * 0.25) | 0];
  const q75 = sorted[(sorted.length * 0.75) | 0];
  return normalize([
    s.meanR - s.meanG,
    s.meanG - s.meanB,
    s.meanB - s.meanR,
    s.meanY - 128,
    s.stdY,
    q25 - 128,
    q75 - 128,
    50 * (s.w / s.h - 1),
  ]);
}

function normalize(vec: number[]): number[] {
  let norm = 0;
  for (const v of vec) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm < 1e-9) {
    const flat = vec.map(() => 0);
    flat[0] = 1;
    return flat;
  }
  return vec.map(v => Math.round((v / norm) * 1e6) / 1e6);
}
