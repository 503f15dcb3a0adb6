#!/usr/bin/env python3
"""Well-behaved worker: cost is a deterministic function of (instance, config).

Usage: ok_worker.py [count_file]
With count_file given, appends one byte per handled request so tests can
verify cache hits send nothing.
"""
import json
import math
import sys


def cost(instance, config):
    h = sum((i + 1) * ord(c) for i, c in enumerate(instance)) % 97
    x = config.get("alpha", 1.0)
    y = config.get("beta", 1.0)
    return (math.log(x) - h / 50.0) ** 2 + 0.1 * (math.log(y) + h / 80.0) ** 2


def main():
    count_file = sys.argv[1] if len(sys.argv) > 1 else None
    for line in sys.stdin:
        msg = json.loads(line)
        if "hello" in msg:
            print(json.dumps({"hello": 1}), flush=True)
            continue
        if count_file:
            with open(count_file, "a") as f:
                f.write("x")
        print(json.dumps({"id": msg["id"], "cost": cost(msg["instance"], msg["config"])}),
              flush=True)


if __name__ == "__main__":
    main()
