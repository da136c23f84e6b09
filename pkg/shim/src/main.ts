#!/usr/bin/env node
import { parseArgs } from "node:util";
import { loadModel, ModelLoadError } from "./model.js";
import type { PoolingMode, ShimConfig } from "./model.js";
import { serve } from "./serve.js";

const USAGE =
  "usage: chronos-shim [--stub] [--model ID] [--device DEV] " +
  "[--num-samples N] [--pooling mean|last]";

function fail(message: string): never {
  process.stderr.write(`chronos-shim: ${message}\n`);
  process.exit(1);
}

function parseConfig(argv: string[]): ShimConfig {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        stub: { type: "boolean", default: false },
        model: { type: "string", default: "amazon/chronos-t5-mini" },
        device: { type: "string", default: "cpu" },
        "num-samples": { type: "string", default: "20" },
        pooling: { type: "string", default: "mean" },
        help: { type: "boolean", default: false },
      },
    });
  } catch (e: unknown) {
    fail(`${e instanceof Error ? e.message : e}\n${USAGE}`);
  }
  if (parsed.values.help) {
    process.stdout.write(USAGE + "\n");
    process.exit(0);
  }
  const numSamples = Number(parsed.values["num-samples"]);
  if (!Number.isInteger(numSamples) || numSamples <= 0) {
    fail(`--num-samples must be a positive integer, got "${parsed.values["num-samples"]}"`);
  }
  const pooling = parsed.values.pooling;
  if (pooling !== "mean" && pooling !== "last") {
    fail(`--pooling must be "mean" or "last", got "${pooling}"`);
  }
  return {
    model: parsed.values.model!,
    device: parsed.values.device!,
    numSamples,
    pooling: pooling as PoolingMode,
    stub: parsed.values.stub!,
  };
}

async function main(): Promise<void> {
  const config = parseConfig(process.argv.slice(2));
  // The model must be live before the first frame is answered; a load
  // failure exits nonzero without ever touching stdout.
  let model;
  try {
    model = loadModel(config);
  } catch (e: unknown) {
    if (e instanceof ModelLoadError) fail(e.message);
    throw e;
  }
  await serve(model, config);
}

main().catch((e: unknown) => {
  fail(e instanceof Error ? (e.stack ?? e.message) : String(e));
});
