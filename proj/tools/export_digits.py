#!/usr/bin/env python3
"""Write the scikit-learn handwritten digits (8x8, 1797 samples) as an IDX image/label pair.

Grey levels 0..16 are rescaled to 0..255 so the files follow the usual ubyte layout.
"""
import argparse
import struct
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=Path)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    digits = load_digits()
    images = np.rint(digits.images * 255.0 / 16.0).astype(np.uint8)
    labels = digits.target.astype(np.uint8)
    count, rows, cols = images.shape

    with open(args.out_dir / "digits-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, count, rows, cols))
        f.write(images.tobytes())
    with open(args.out_dir / "digits-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, count))
        f.write(labels.tobytes())
    print(f"wrote {count} images ({rows}x{cols}) to {args.out_dir}")


if __name__ == "__main__":
    main()
