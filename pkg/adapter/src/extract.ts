import * as fs from "fs";
import * as path from "path";
import { detectBlobs } from "./detect";
import { getEmbedder } from "./embed";
import { loadClip } from "./media";
import { writePpm } from "./ppm";
import { detectionLine, headerLine, Source } from "./wire";

export interface AdapterConfig {
  video: string;
  out: string;
  framesDir?: string;
  strict?: number; // blobs at or above this confidence become detector records
  loose?: number; // blobs in [loose, strict) become proposal records
  model?: string;
  fps?: number; // frame rate to assume for ppm directories
  minLuma?: number;
  quiet?: boolean;
}

export interface ExtractSummary {
  frames: number;
  width: number;
  height: number;
  fps: number;
  detections: number;
  proposals: number;
  out: string;
}

const DEFAULT_STRICT = 0.9;
const DEFAULT_LOOSE = 0.5;
const DEFAULT_MODEL = "patch40";

export function extract(config: AdapterConfig): ExtractSummary {
  const strict = config.strict ?? DEFAULT_STRICT;
  const loose = config.loose ?? DEFAULT_LOOSE;
  if (!(loose > 0 && loose <= strict && strict <= 1)) {
    throw new Error(`thresholds must satisfy 0 < loose <= strict <= 1, got loose=${loose} strict=${strict}`);
  }
  const embedder = getEmbedder(config.model ?? DEFAULT_MODEL);

  const clip = loadClip(config.video, config.fps ?? 30);
  if (!config.quiet) {
    console.log(`loaded ${clip.frames.length} frames ${clip.width}x${clip.height} @ ${clip.fps} fps`);
  }
  if (config.framesDir) {
    fs.mkdirSync(config.framesDir, { recursive: true });
  }

  const lines: string[] = [headerLine(clip.fps, clip.width, clip.height, embedder.dim)];
  let detections = 0;
  let proposals = 0;

  for (let f = 0; f < clip.frames.length; f++) {
    const img = clip.frames[f];
    for (const blob of detectBlobs(img, { minLuma: config.minLuma })) {
      let source: Source;
      if (blob.conf >= strict) source = "detector";
      else if (blob.conf >= loose) source = "proposal";
      else continue;
      const emb = embedder.embed(img, blob);
      lines.push(detectionLine(f, [blob.x, blob.y, blob.w, blob.h], blob.conf, emb, source));
      if (source === "detector") detections++;
      else proposals++;
    }
    if (config.framesDir) {
      const name = `frame_${String(f).padStart(6, "0")}.ppm`;
      writePpm(path.join(config.framesDir, name), img);
    }
    if (!config.quiet && (f + 1) % 100 === 0) {
      console.log(`  frame ${f + 1}/${clip.frames.length}`);
    }
  }

  fs.mkdirSync(path.dirname(path.resolve(config.out)), { recursive: true });
  fs.writeFileSync(config.out, lines.join("\n") + "\n");

  return {
    frames: clip.frames.length,
    width: clip.width,
    height: clip.height,
    fps: clip.fps,
    detections,
    proposals,
    out: config.out,
  };
}
