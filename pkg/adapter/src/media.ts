import * as fs from "fs";
import * as path from "path";
import { Image, readPpm } from "./ppm";
import { Clip, decodeY4m } from "./y4m";

// A clip is either a raw .y4m file or a directory of numbered .ppm frames
// (the dump format the anonymizer reads back). Anything else is unreadable
// here: there is no compressed-codec support in this tool.
export function loadClip(videoPath: string, fallbackFps: number): Clip {
  let stat: fs.Stats;
  try {
    stat = fs.statSync(videoPath);
  } catch {
    throw new Error(`unreadable media: ${videoPath} does not exist`);
  }

  if (stat.isDirectory()) {
    const names = fs.readdirSync(videoPath).filter(n => n.endsWith(".ppm")).sort();
    if (names.length === 0) {
      throw new Error(`unreadable media: no .ppm frames in ${videoPath}`);
    }
    const frames: Image[] = [];
    for (const n of names) {
      const img = readPpm(path.join(videoPath, n));
      if (frames.length > 0 &&
          (img.width !== frames[0].width || img.height !== frames[0].height)) {
        throw new Error(`unreadable media: frame size changes at ${n}`);
      }
      frames.push(img);
    }
    return { width: frames[0].width, height: frames[0].height, fps: fallbackFps, frames };
  }

  if (videoPath.endsWith(".y4m")) {
    return decodeY4m(fs.readFileSync(videoPath), videoPath);
  }
  throw new Error(
    `unreadable media: ${videoPath} (expected a .y4m file or a directory of .ppm frames)`);
}
