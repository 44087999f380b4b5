#!/usr/bin/env python3
"""Export scikit-learn's handwritten digits (1797 8x8 images) as an IDX pair.

Produces data/digits-images-idx3-ubyte and data/digits-labels-idx1-ubyte in
the MNIST distribution format. Pixel intensities 0..16 are rescaled to 0..255.
"""
import struct
from pathlib import Path

from sklearn.datasets import load_digits


def main() -> None:
    digits = load_digits()
    images = digits.images  # (n, 8, 8) floats 0..16
    labels = digits.target
    n, rows, cols = images.shape
    out_dir = Path(__file__).resolve().parent.parent / "data"
    out_dir.mkdir(exist_ok=True)

    with open(out_dir / "digits-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, rows, cols))
        scaled = (images * 255.0 / 16.0).round().clip(0, 255).astype("uint8")
        f.write(scaled.tobytes())

    with open(out_dir / "digits-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(labels.astype("uint8").tobytes())

    print(f"wrote {n} images of {rows}x{cols} to {out_dir}")


if __name__ == "__main__":
    main()
