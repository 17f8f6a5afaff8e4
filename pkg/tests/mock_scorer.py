"""Scriptable external scorer for protocol tests.

Speaks the newline-delimited JSON protocol on stdin/stdout. Modes:
    const      reply -1.0 per token, immediately
    positive   reply +0.1 per token (protocol violation)
    reorder3   buffer the first 3 requests, answer them in reverse order
    short      reply with one fewer logprob than requested
    badjson    reply with a non-JSON line
    silent     never reply
"""

import json
import sys
import time


def reply(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "const"
    buffered = []
    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        if mode == "silent":
            time.sleep(3600)
        if mode == "badjson":
            sys.stdout.write("not json\n")
            sys.stdout.flush()
            continue
        if mode == "positive":
            reply({"id": req["id"], "logprobs": [0.1] * len(req["tokens"])})
            continue
        if mode == "short":
            reply({"id": req["id"], "logprobs": [-1.0] * (len(req["tokens"]) - 1)})
            continue
        if mode == "reorder3" and len(buffered) < 2:
            buffered.append(req)
            continue
        if mode == "reorder3":
            buffered.append(req)
            for pending in reversed(buffered):
                reply({"id": pending["id"], "logprobs": [-1.0] * len(pending["tokens"])})
            buffered = []
            mode = "const"
            continue
        reply({"id": req["id"], "logprobs": [-1.0] * len(req["tokens"])})


if __name__ == "__main__":
    main()
