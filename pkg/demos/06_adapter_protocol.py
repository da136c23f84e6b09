"""The adapter wire protocol, demonstrated against a live child process.

An adapter is any executable speaking newline-delimited JSON on
stdin/stdout: one hello exchange, then strictly alternating
request/response frames. This demo writes a minimal echo adapter to a
temp file, drives it through AdapterClient, and finishes with a
conformance run (the same harness the acceptance suite points at real
adapters).

Run: python3 demos/06_adapter_protocol.py
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from raf import AdapterClient, run_conformance

MINIMAL_ADAPTER = '''\
import json, sys

def reply(obj):
    sys.stdout.write(json.dumps(obj) + "\\n")
    sys.stdout.flush()

for line in sys.stdin:
    msg = json.loads(line)
    if msg["type"] == "hello":
        reply({"type": "hello", "capabilities": ["forecast", "embed"]})
    elif msg["type"] == "forecast":
        ctx, h, n = msg["context"], msg["h"], msg["num_samples"]
        rows = [[ctx[(i + j) % len(ctx)] for j in range(h)] for i in range(n)]
        reply({"type": "samples", "samples": rows})
    elif msg["type"] == "embed":
        reply({"type": "embedding", "embedding": msg["series"]})
    else:
        reply({"type": "error", "message": "unknown frame " + msg["type"]})
'''

adapter_path = Path(tempfile.mkdtemp(prefix="raf-demo-")) / "echo_adapter.py"
adapter_path.write_text(MINIMAL_ADAPTER)
command = [sys.executable, str(adapter_path)]

with AdapterClient(command) as client:
    print(f"handshake: capabilities={sorted(client.capabilities)}")

    result = client.forecast(np.array([1.0, 2.0, 3.0]), horizon=4, num_samples=2)
    print(f"forecast samples (2x4):\n{result.samples}")

    embedding = client.embed(np.array([0.5, -0.5, 7.0]))
    print(f"embedding: {embedding}  (pinned dimension {client.embed_dim})")

report = run_conformance(command, num_frames=2_000, seed=1, expect_echo=True)
print(
    f"\nconformance: {report.frames_sent} frames "
    f"({report.forecast_frames} forecast / {report.embed_frames} embed), "
    f"echo checked = {report.echo_checked}"
)
print("a non-echo adapter runs the same harness with expect_echo=False,")
print("which swaps the bit-exact echo check for determinism rechecks.")
