import { Image } from "./ppm";

export interface Blob {
  x: number;
  y: number;
  w: number;
  h: number;
  area: number;
  fill: number; // area / bounding box area
  conf: number;
}

export interface DetectOptions {
  minLuma?: number; // luminance cut for face pixels
  minArea?: number; // px count where the size score saturates
}

const DEFAULT_MIN_LUMA = 110;
const DEFAULT_MIN_AREA = 120;
const ELLIPSE_FILL = Math.PI / 4;

export function lumaPlane(img: Image): Float32Array {
  const out = new Float32Array(img.width * img.height);
  for (let i = 0; i < out.length; i++) {
    const p = i * 3;
    out[i] = 0.299 * img.data[p] + 0.587 * img.data[p + 1] + 0.114 * img.data[p + 2];
  }
  return out;
}

// Bright connected components (4-connectivity) over a luminance threshold.
// Confidence favours blobs that fill their box like an ellipse and are big
// enough to be a face rather than a speck.
export function detectBlobs(img: Image, opts: DetectOptions = {}): Blob[] {
  const minLuma = opts.minLuma ?? DEFAULT_MIN_LUMA;
  const minArea = opts.minArea ?? DEFAULT_MIN_AREA;
  const { width, height } = img;
  const luma = lumaPlane(img);
  const seen = new Uint8Array(width * height);
  const stack: number[] = [];
  const blobs: Blob[] = [];

  for (let start = 0; start < luma.length; start++) {
    if (seen[start] || luma[start] < minLuma) continue;

    let minX = width, maxX = 0, minY = height, maxY = 0, area = 0;
    seen[start] = 1;
    stack.push(start);
    while (stack.length > 0) {
      const idx = stack.pop()!;
      const px = idx % width;
      const py = (idx / width) | 0;
      area++;
      if (px < minX) minX = px;
      if (px > maxX) maxX = px;
      if (py < minY) minY = py;
      if (py > maxY) maxY = py;
      if (px > 0 && !seen[idx - 1] && luma[idx - 1] >= minLuma) { seen[idx - 1] = 1; stack.push(idx - 1); }
      if (px < width - 1 && !seen[idx + 1] && luma[idx + 1] >= minLuma) { seen[idx + 1] = 1; stack.push(idx + 1); }
      if (py > 0 && !seen[idx - width] && luma[idx - width] >= minLuma) { seen[idx - width] = 1; stack.push(idx - width); }
      if (py < height - 1 && !seen[idx + width] && luma[idx + width] >= minLuma) { seen[idx + width] = 1; stack.push(idx + width); }
    }

    const w = maxX - minX + 1;
    const h = maxY - minY + 1;
    const fill = area / (w * h);
    const ellipseScore = Math.max(0, 1 - Math.abs(fill - ELLIPSE_FILL) / ELLIPSE_FILL);
    const sizeScore = Math.min(1, area / minArea);
    const conf = round4(Math.min(1, 0.15 + 0.85 * ellipseScore * sizeScore));
    blobs.push({ x: minX, y: minY, w, h, area, fill, conf });
  }

  blobs.sort((a, b) => a.x - b.x || a.y - b.y);
  return blobs;
}

function round4(v: number): number {
  return Math.round(v * 1e4) / 1e4;
}
