// Line formats for the detection stream the anonymizer ingests:
//   {"type":"header","fps":30,"width":1280,"height":720,"embedding_dim":40,"quality_scale":1}
//   {"type":"det","frame":0,"box":[x,y,w,h],"conf":0.98,"emb":[...],"source":"detector"}

export type Source = "detector" | "proposal";

export function headerLine(fps: number, width: number, height: number,
                           embeddingDim: number): string {
  return JSON.stringify({
    type: "header",
    fps,
    width,
    height,
    embedding_dim: embeddingDim,
    quality_scale: 1,
  });
}

export function detectionLine(frame: number, box: [number, number, number, number],
                              conf: number, emb: number[], source: Source): string {
  return JSON.stringify({ type: "det", frame, box, conf, emb, source });
}
