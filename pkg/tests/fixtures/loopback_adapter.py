"""Echo adapter used by the protocol tests. Stdlib only.

Echo rules: forecast samples[i][j] = context[(i + j) % len(context)];
embed returns the series verbatim. Fault-injection flags let the tests
exercise every host failure path:

    --no-embed     advertise forecast only
    --hang         never answer the first forecast request
    --die          exit silently instead of answering the first forecast
    --garbage      answer the first forecast with non-JSON text
    --nan          answer the first forecast with a NaN literal
    --error        answer every forecast with an error frame
    --wrong-shape  drop one sample row from every forecast reply
    --drift        grow the embedding by one element per embed call
"""
import json
import sys
import time


def main() -> int:
    flags = set(sys.argv[1:])
    embed_calls = 0
    forecast_calls = 0
    for line in sys.stdin:
        if not line.strip():
            continue
        frame = json.loads(line)
        kind = frame["type"]
        if kind == "hello":
            caps = ["forecast"] if "--no-embed" in flags else ["forecast", "embed"]
            reply = {"type": "hello", "v": 1, "capabilities": caps}
        elif kind == "forecast":
            forecast_calls += 1
            if "--hang" in flags and forecast_calls == 1:
                time.sleep(3600)
            if "--die" in flags and forecast_calls == 1:
                return 0
            if "--garbage" in flags and forecast_calls == 1:
                sys.stdout.write("this is not json\n")
                sys.stdout.flush()
                continue
            if "--error" in flags:
                reply = {"type": "error", "message": "injected failure"}
                sys.stdout.write(json.dumps(reply) + "\n")
                sys.stdout.flush()
                continue
            context = frame["context"]
            h = frame["h"]
            n = frame["num_samples"]
            if "--wrong-shape" in flags and n > 1:
                n -= 1
            samples = [
                [context[(i + j) % len(context)] for j in range(h)] for i in range(n)
            ]
            if "--nan" in flags and forecast_calls == 1:
                samples[0][0] = float("nan")
                sys.stdout.write(
                    json.dumps({"type": "samples", "samples": samples}, allow_nan=True)
                    + "\n"
                )
                sys.stdout.flush()
                continue
            reply = {"type": "samples", "samples": samples}
        elif kind == "embed":
            embed_calls += 1
            vec = list(frame["series"])
            if "--drift" in flags and embed_calls > 1:
                vec = vec + [0.0] * embed_calls
            reply = {"type": "embedding", "embedding": vec}
        else:
            reply = {"type": "error", "message": f"unknown frame type {kind!r}"}
        sys.stdout.write(json.dumps(reply, allow_nan=False) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
