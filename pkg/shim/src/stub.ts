/**
 * Deterministic fake model. Forecasts are damped random walks seeded
 * from a hash of the request, embeddings are pooled sinusoidal encoder
 * states, so identical requests always get identical replies and the
 * conformance suite can run without any model weights.
 */
import type { ForecastModel, PoolingMode } from "./model.js";

export const STUB_EMBED_DIM = 16;

const view = new DataView(new ArrayBuffer(8));

// FNV-1a over the IEEE-754 bytes, so 0.1 and 0.1000001 hash apart
function mixFloat(h: number, x: number): number {
  view.setFloat64(0, x);
  for (let i = 0; i < 8; i++) {
    h ^= view.getUint8(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function hashRequest(tag: number, values: readonly number[], ...rest: number[]): number {
  let h = (0x811c9dc5 ^ tag) >>> 0;
  for (const v of values) h = mixFloat(h, v);
  for (const k of rest) h = mixFloat(h, k);
  return h >>> 0;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class StubModel implements ForecastModel {
  readonly name = "stub";
  readonly capabilities = ["forecast", "embed"] as const;
  readonly embedDim = STUB_EMBED_DIM;
  readonly pooling: PoolingMode;

  constructor(pooling: PoolingMode) {
    this.pooling = pooling;
  }

  forecast(context: readonly number[], h: number, numSamples: number): number[][] {
    const rng = mulberry32(hashRequest(1, context, h, numSamples));
    const last = context[context.length - 1]!;
    const mean = context.reduce((a, b) => a + b, 0) / context.length;
    let spread = Math.sqrt(
      context.reduce((a, b) => a + (b - mean) * (b - mean), 0) / context.length,
    );
    if (!Number.isFinite(spread) || spread === 0) {
      spread = Math.abs(last) * 0.05 + 1e-9;
    }
    const rows: number[][] = [];
    for (let i = 0; i < numSamples; i++) {
      const row: number[] = [];
      let level = last;
      for (let j = 0; j < h; j++) {
        level += spread * (rng() * 2 - 1) * 0.5;
        if (!Number.isFinite(level)) level = last; // inputs near DBL_MAX can overflow
        row.push(level);
      }
      rows.push(row);
    }
    return rows;
  }

  embed(series: readonly number[]): number[] {
    // encoder states: one bounded sinusoidal feature row per position
    const states = series.map((x, t) => {
      const row = new Array<number>(STUB_EMBED_DIM);
      for (let d = 0; d < STUB_EMBED_DIM; d++) {
        row[d] = Math.sin(x * (0.5 + d * 0.37) + t * 0.7 + d);
      }
      return row;
    });
    if (this.pooling === "last") {
      return states[states.length - 1]!;
    }
    const out = new Array<number>(STUB_EMBED_DIM).fill(0);
    for (const state of states) {
      for (let d = 0; d < STUB_EMBED_DIM; d++) out[d]! += state[d]!;
    }
    return out.map((v) => v / states.length);
  }
}
