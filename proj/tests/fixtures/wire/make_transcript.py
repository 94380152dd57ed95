"""Regenerates transcript1.jsonl, the golden client/sidecar exchange.

The frame is 4x4 RGB with value 10*y + x + 100*c. The template crop covers
the whole frame at half resolution (bilinear: each output pixel is the mean
of a 2x2 block, rounded half away from zero); the search crop covers it at
full resolution, so it reproduces the frame exactly. The sidecar answers
with the echo constant.
"""
import base64
import json
import math
import pathlib


def pixel(x, y, c):
    return 10 * y + x + 100 * c


def image(w, h, value):
    raw = bytes(value(x, y, c) for y in range(h) for x in range(w) for c in range(3))
    return {"w": w, "h": h, "rgb": base64.b64encode(raw).decode()}


def half(x, y, c):
    s = sum(pixel(2 * x + dx, 2 * y + dy, c) for dx in (0, 1) for dy in (0, 1)) / 4
    return int(math.floor(s + 0.5))


def dumps(obj):
    return json.dumps(obj, separators=(",", ":"))


tmpl = image(2, 2, half)
messages = [
    ("c2s", {"proto": 1, "role": "client"}),
    ("s2c", {"proto": 1, "role": "localizer", "name": "echo"}),
    ("c2s", {"id": 1, "init_template": tmpl, "dyn_template": tmpl, "search": image(4, 4, pixel)}),
    ("s2c", {"id": 1, "bbox": [0.5, 0.5, 0.25, 0.25], "score": 0.9}),
]
out = pathlib.Path(__file__).with_name("transcript1.jsonl")
out.write_text("".join(dumps({"dir": d, "text": dumps(m)}) + "\n" for d, m in messages))
