#!/usr/bin/env python3
"""Build the desk-scale fixture set shipped under data/.

* data/mnist-desk/{images-idx3-ubyte,labels-idx1-ubyte}: the first N digits of
  each class from the MIT-licensed `mnist` npm package (cazala/mnist), a subset
  of the original MNIST test set, converted from [0,1] floats back to bytes.
* data/templates/<digit>/<font>.pgm: 28x28 white-on-black renderings of each
  digit in ten TrueType faces bundled with matplotlib, normalised the same way
  MNIST digits are (fit into a 20x20 box, centred on the centre of mass).

Usage: make_fixtures.py <path-to-unpacked-mnist-npm-package> [per_digit]
"""
import json
import os
import struct
import sys

import numpy as np
from PIL import Image, ImageDraw, ImageFont
import matplotlib

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
FONT_DIR = os.path.join(os.path.dirname(matplotlib.__file__), "mpl-data", "fonts", "ttf")
FONTS = [
    ("dejavu-sans", "DejaVuSans.ttf"),
    ("dejavu-sans-bold", "DejaVuSans-Bold.ttf"),
    ("dejavu-sans-oblique", "DejaVuSans-Oblique.ttf"),
    ("dejavu-serif", "DejaVuSerif.ttf"),
    ("dejavu-serif-italic", "DejaVuSerif-Italic.ttf"),
    ("dejavu-sans-mono", "DejaVuSansMono.ttf"),
    ("stix-general", "STIXGeneral.ttf"),
    ("stix-general-italic", "STIXGeneralItalic.ttf"),
    ("cm-roman", "cmr10.ttf"),
    ("cm-sans", "cmss10.ttf"),
]


def write_idx(per_digit, src):
    images, labels = [], []
    per_class = []
    for d in range(10):
        data = json.load(open(os.path.join(src, "src", "digits", f"{d}.json")))["data"]
        n = len(data) // 784
        per_class.append([data[i * 784:(i + 1) * 784] for i in range(min(n, per_digit))])
    # interleave classes the way a shuffled dataset would present them
    for i in range(per_digit):
        for d in range(10):
            if i < len(per_class[d]):
                images.append(bytes(int(round(v * 255)) for v in per_class[d][i]))
                labels.append(d)
    out = os.path.join(ROOT, "mnist-desk")
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(img)
    with open(os.path.join(out, "labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def render(ch, font_file):
    font = ImageFont.truetype(os.path.join(FONT_DIR, font_file), 160)
    canvas = Image.new("L", (320, 320), 0)
    ImageDraw.Draw(canvas).text((80, 40), ch, fill=255, font=font)
    glyph = canvas.crop(canvas.getbbox())
    w, h = glyph.size
    scale = 20.0 / max(w, h)
    glyph = glyph.resize((max(1, round(w * scale)), max(1, round(h * scale))), Image.LANCZOS)
    a = np.asarray(glyph, dtype=np.float64)
    ys, xs = np.indices(a.shape)
    cy, cx = (ys * a).sum() / a.sum(), (xs * a).sum() / a.sum()
    out = np.zeros((28, 28))
    oy, ox = int(round(14 - cy)), int(round(14 - cx))
    for y in range(a.shape[0]):
        for x in range(a.shape[1]):
            ty, tx = y + oy, x + ox
            if 0 <= ty < 28 and 0 <= tx < 28:
                out[ty, tx] = a[y, x]
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def write_templates():
    for d in range(10):
        out = os.path.join(ROOT, "templates", str(d))
        os.makedirs(out, exist_ok=True)
        for name, font_file in FONTS:
            px = render(str(d), font_file)
            with open(os.path.join(out, f"{name}.pgm"), "wb") as f:
                f.write(b"P5\n28 28\n255\n")
                f.write(px.tobytes())


if __name__ == "__main__":
    write_idx(int(sys.argv[2]) if len(sys.argv) > 2 else 200, sys.argv[1])
    write_templates()
