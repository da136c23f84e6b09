/**
 * v1 wire protocol server: newline-delimited JSON frames over stdio,
 * strictly alternating, one request in flight at a time.
 *
 *   {"type": "hello", "v": 1}
 *     -> {"type": "hello", "capabilities": [...], "embed_dim"?, "pooling", "model"}
 *   {"type": "forecast", "context": [...], "h": H, "num_samples": S}
 *     -> {"type": "samples", "samples": [[...] x S]}
 *   {"type": "embed", "series": [...]}
 *     -> {"type": "embedding", "embedding": [...]}
 *
 * Anything that goes wrong inside a request becomes an
 * {"type": "error", "message": ...} frame; the loop never dies on a
 * bad frame, only on end of input.
 */
import { createInterface } from "node:readline";
import type { ForecastModel, ShimConfig } from "./model.js";

export const PROTOCOL_VERSION = 1;

/** Request rejection whose message is safe to put in an error frame. */
class FrameError extends Error {}

function numericArray(frame: Record<string, unknown>, field: string): number[] {
  const value = frame[field];
  if (!Array.isArray(value) || value.length === 0) {
    throw new FrameError(`'${field}' must be a non-empty array`);
  }
  for (const v of value) {
    if (typeof v !== "number" || !Number.isFinite(v)) {
      throw new FrameError(`'${field}' must contain only finite numbers`);
    }
  }
  return value as number[];
}

function positiveInt(value: unknown, field: string): number {
  if (typeof value !== "number" || !Number.isInteger(value) || value <= 0) {
    throw new FrameError(`'${field}' must be a positive integer`);
  }
  return value;
}

export function handleFrame(
  line: string,
  model: ForecastModel,
  config: ShimConfig,
): Record<string, unknown> {
  try {
    let frame: unknown;
    try {
      frame = JSON.parse(line);
    } catch {
      throw new FrameError(`undecodable frame: ${line.slice(0, 200)}`);
    }
    if (typeof frame !== "object" || frame === null || Array.isArray(frame)) {
      throw new FrameError("frame must be a JSON object");
    }
    const request = frame as Record<string, unknown>;
    switch (request.type) {
      case "hello": {
        const reply: Record<string, unknown> = {
          type: "hello",
          v: PROTOCOL_VERSION,
          capabilities: [...model.capabilities],
          pooling: model.pooling,
          model: model.name,
        };
        if (model.embedDim !== null) reply.embed_dim = model.embedDim;
        return reply;
      }
      case "forecast": {
        const context = numericArray(request, "context");
        const h = positiveInt(request.h, "h");
        const numSamples = positiveInt(
          request.num_samples ?? config.numSamples,
          "num_samples",
        );
        const samples = model.forecast(context, h, numSamples);
        return { type: "samples", samples };
      }
      case "embed": {
        if (!model.capabilities.includes("embed")) {
          throw new FrameError(`model "${model.name}" has no encoder`);
        }
        const series = numericArray(request, "series");
        return { type: "embedding", embedding: model.embed(series) };
      }
      default:
        throw new FrameError(`unsupported frame type ${JSON.stringify(request.type)}`);
    }
  } catch (e: unknown) {
    const message = e instanceof Error ? e.message : String(e);
    return { type: "error", message };
  }
}

export async function serve(model: ForecastModel, config: ShimConfig): Promise<void> {
  const rl = createInterface({ input: process.stdin, terminal: false });
  for await (const line of rl) {
    if (!line.trim()) continue;
    process.stdout.write(JSON.stringify(handleFrame(line, model, config)) + "\n");
  }
}
