#!/usr/bin/env python3
"""Convert the per-class JSON files shipped in the `fashion-mnist` npm package
into the four standard IDX files (train/t10k images and labels).

Usage: npm_fashion_to_idx.py <package/src/clothes> <out_dir>

Within each class the first 6000 images go to the training split and the next
1000 to the test split; the splits are then interleaved by a fixed-seed shuffle.
"""
import json
import random
import struct
import sys
from pathlib import Path


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    train, test = [], []
    for c in range(10):
        # The package carries a couple of empty entries; drop them.
        rows = [r for r in json.loads((src / f"{c}.json").read_text())["data"] if len(r) == 28 * 28]
        train += [(r, c) for r in rows[:6000]]
        test += [(r, c) for r in rows[6000:7000]]
    rng = random.Random(20190101)
    rng.shuffle(train)
    rng.shuffle(test)
    for name, split in (("train", train), ("t10k", test)):
        write_images(out / f"{name}-images-idx3-ubyte", [r for r, _ in split])
        write_labels(out / f"{name}-labels-idx1-ubyte", [c for _, c in split])


if __name__ == "__main__":
    main()
