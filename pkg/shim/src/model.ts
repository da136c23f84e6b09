import { StubModel } from "./stub.js";

export type PoolingMode = "mean" | "last";

export interface ShimConfig {
  model: string;
  device: string;
  numSamples: number;
  pooling: PoolingMode;
  stub: boolean;
}

/**
 * What the serving loop needs from a model. Implementations must be
 * deterministic: the same request yields the same numbers, bit for bit.
 */
export interface ForecastModel {
  readonly name: string;
  readonly capabilities: readonly string[];
  /** null when the model exposes no encoder (then "embed" is absent above). */
  readonly embedDim: number | null;
  readonly pooling: PoolingMode;
  forecast(context: readonly number[], h: number, numSamples: number): number[][];
  embed(series: readonly number[]): number[];
}

export class ModelLoadError extends Error {}

export function loadModel(config: ShimConfig): ForecastModel {
  if (config.stub) {
    return new StubModel(config.pooling);
  }
  // No inference backend or cached weights ship with this build, so a
  // checkpoint request is an unrecoverable load failure by definition.
  throw new ModelLoadError(
    `cannot load checkpoint "${config.model}" on ${config.device}: ` +
      "no inference backend or model weights are bundled; " +
      "run with --stub for the deterministic fake",
  );
}
