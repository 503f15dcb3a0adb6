#!/usr/bin/env python3
"""Answers "fail" for instances containing "bad", a number otherwise."""
import json
import sys


def main():
    for line in sys.stdin:
        msg = json.loads(line)
        if "hello" in msg:
            print(json.dumps({"hello": 1}), flush=True)
            continue
        if "bad" in msg["instance"]:
            print(json.dumps({"id": msg["id"], "cost": "fail"}), flush=True)
        else:
            print(json.dumps({"id": msg["id"], "cost": 1.25}), flush=True)


if __name__ == "__main__":
    main()
