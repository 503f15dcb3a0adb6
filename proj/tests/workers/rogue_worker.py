#!/usr/bin/env python3
"""Protocol violators, selected by argv[1]: "badline" emits garbage,
"badid" answers with an unknown id."""
import json
import sys


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "badline"
    for line in sys.stdin:
        msg = json.loads(line)
        if "hello" in msg:
            print(json.dumps({"hello": 1}), flush=True)
            continue
        if mode == "badline":
            print("this is not json", flush=True)
        else:
            print(json.dumps({"id": msg["id"] + 100000, "cost": 1.0}), flush=True)


if __name__ == "__main__":
    main()
