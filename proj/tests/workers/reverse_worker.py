#!/usr/bin/env python3
"""Buffers a batch of requests and answers them in reverse order.

Usage: reverse_worker.py [batch_size]
"""
import json
import sys


def main():
    batch_size = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    pending = []

    def flush_pending():
        while pending:
            msg = pending.pop()  # LIFO: reverse arrival order
            print(json.dumps({"id": msg["id"], "cost": float(len(msg["instance"]))}),
                  flush=True)

    for line in sys.stdin:
        msg = json.loads(line)
        if "hello" in msg:
            print(json.dumps({"hello": 1}), flush=True)
            continue
        pending.append(msg)
        if len(pending) >= batch_size:
            flush_pending()
    flush_pending()


if __name__ == "__main__":
    main()
