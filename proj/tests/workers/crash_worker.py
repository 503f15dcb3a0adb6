#!/usr/bin/env python3
"""Crashes after a few requests, once: the first process (no sentinel file yet)
exits abruptly after `crash_after` answers; respawned processes behave.

Usage: crash_worker.py sentinel_file [crash_after]
"""
import json
import os
import sys


def main():
    sentinel = sys.argv[1]
    crash_after = int(sys.argv[2]) if len(sys.argv) > 2 else 2
    first_life = not os.path.exists(sentinel)
    if first_life:
        with open(sentinel, "w") as f:
            f.write("crashed once\n")

    handled = 0
    for line in sys.stdin:
        msg = json.loads(line)
        if "hello" in msg:
            print(json.dumps({"hello": 1}), flush=True)
            continue
        if first_life and handled >= crash_after:
            os._exit(9)
        print(json.dumps({"id": msg["id"], "cost": 0.5 + msg["id"] * 0.001}),
              flush=True)
        handled += 1


if __name__ == "__main__":
    main()
