import { describe, expect, it } from "vitest";
import { detectBlobs } from "../src/detect";
import { drawDisc, drawRect, solidImage } from "./helpers";

describe("detectBlobs", () => {
  it("finds a bright disc with a tight box and high confidence", () => {
    const img = solidImage(120, 90);
    drawDisc(img, 60, 45, 20, [210, 180, 170]);
    const blobs = detectBlobs(img);
    expect(blobs.length).toBe(1);
    const b = blobs[0];
    expect(Math.abs(b.x - 40)).toBeLessThanOrEqual(1);
    expect(Math.abs(b.y - 25)).toBeLessThanOrEqual(1);
    expect(Math.abs(b.w - 41)).toBeLessThanOrEqual(2);
    expect(Math.abs(b.h - 41)).toBeLessThanOrEqual(2);
    expect(b.conf).toBeGreaterThanOrEqual(0.9);
  });

  it("sees nothing in a dark frame", () => {
    expect(detectBlobs(solidImage(64, 64))).toEqual([]);
  });

  it("scores a small speck below a clean face", () => {
    const img = solidImage(160, 120);
    drawDisc(img, 50, 60, 18, [220, 190, 180]);
    drawRect(img, 120, 20, 10, 10, [220, 190, 180]);
    const blobs = detectBlobs(img);
    expect(blobs.length).toBe(2);
    const [face, speck] = blobs;
    expect(face.conf).toBeGreaterThanOrEqual(0.9);
    expect(speck.conf).toBeLessThan(0.9);
    expect(speck.conf).toBeGreaterThanOrEqual(0.5); // lands in the proposal band
  });

  it("keeps diagonally touching regions separate (4-connectivity)", () => {
    const img = solidImage(40, 40);
    drawRect(img, 5, 5, 6, 6, [200, 200, 200]);
    drawRect(img, 11, 11, 6, 6, [200, 200, 200]);
    expect(detectBlobs(img).length).toBe(2);
  });

  it("ignores pixels below the luminance cut", () => {
    const img = solidImage(40, 40);
    drawDisc(img, 20, 20, 8, [90, 90, 90]); // bright-ish but under the cut
    expect(detectBlobs(img)).toEqual([]);
    expect(detectBlobs(img, { minLuma: 80 }).length).toBe(1);
  });

  it("returns blobs sorted by position", () => {
    const img = solidImage(200, 80);
    drawDisc(img, 150, 40, 15, [200, 200, 200]);
    drawDisc(img, 40, 40, 15, [200, 200, 200]);
    const blobs = detectBlobs(img);
    expect(blobs.length).toBe(2);
    expect(blobs[0].x).toBeLessThan(blobs[1].x);
  });
});
