#!/usr/bin/env node
import { parseArgs } from "util";
import { extract } from "./extract";

const USAGE = `usage: detector-adapter extract --video <clip> --out <dets.jsonl> [options]

<clip> is a .y4m file or a directory of .ppm frames.

options:
  --frames-dir <dir>   also dump each frame as ppm (for the pixelation pass)
  --strict <t>         detector confidence threshold (default 0.9)
  --loose <t>          proposal confidence threshold (default 0.5)
  --model <name>       embedding model: patch40 | hue8 (default patch40)
  --fps <n>            frame rate for ppm directories (default 30)
  --min-luma <v>       face luminance cut (default 110)
  --quiet              no progress output`;

function main(): void {
  let parsed;
  try {
    parsed = parseArgs({
      allowPositionals: true,
      options: {
        video: { type: "string" },
        out: { type: "string" },
        "frames-dir": { type: "string" },
        strict: { type: "string" },
        loose: { type: "string" },
        model: { type: "string" },
        fps: { type: "string" },
        "min-luma": { type: "string" },
        quiet: { type: "boolean", default: false },
      },
    });
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    process.exit(2);
  }

  const { values, positionals } = parsed;
  if (positionals.length !== 1 || positionals[0] !== "extract" || !values.video || !values.out) {
    console.error(USAGE);
    process.exit(2);
  }

  try {
    const summary = extract({
      video: values.video,
      out: values.out,
      framesDir: values["frames-dir"],
      strict: values.strict !== undefined ? Number(values.strict) : undefined,
      loose: values.loose !== undefined ? Number(values.loose) : undefined,
      model: values.model,
      fps: values.fps !== undefined ? Number(values.fps) : undefined,
      minLuma: values["min-luma"] !== undefined ? Number(values["min-luma"]) : undefined,
      quiet: values.quiet,
    });
    console.log(JSON.stringify(summary));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }
}

main();
