"""Plain-text checkpoint format.

Layout::

    XLALIGN-CKPT 1
    # optional metadata comment lines
    <name> <ndim> <dim1> ... <dimk>
    <value> <value> ...          (exactly prod(dims) values, any line wrapping)

Values are written with repr precision so they round-trip exactly in float64
(and a fortiori within 32-bit precision).
"""

from __future__ import annotations

import numpy as np

HEADER = "XLALIGN-CKPT 1"


def save_checkpoint(path, tensors, comments=()):
    """tensors: mapping name -> ndarray. Names must not contain whitespace."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(HEADER + "\n")
        for line in comments:
            fh.write(f"# {line}\n")
        for name, arr in tensors.items():
            if any(ch.isspace() for ch in name):
                raise ValueError(f"tensor name {name!r} contains whitespace")
            arr = np.asarray(arr)
            dims = " ".join(str(d) for d in arr.shape)
            fh.write(f"{name} {arr.ndim}{' ' + dims if dims else ''}\n")
            flat = arr.reshape(-1)
            if arr.ndim == 2:
                for row in arr:
                    fh.write(" ".join(repr(float(v)) for v in row) + "\n")
            else:
                fh.write(" ".join(repr(float(v)) for v in flat) + "\n")


def load_checkpoint(path):
    """Returns (tensors, comments)."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != HEADER:
            raise ValueError(f"not a checkpoint file (header {first!r})")
        comments = []
        tokens = []

        def next_tokens(n):
            while len(tokens) < n:
                line = fh.readline()
                if not line:
                    raise ValueError("truncated checkpoint file")
                if line.startswith("#"):
                    continue
                tokens.extend(line.split())
            out, tokens[:n] = tokens[:n], []
            return out

        tensors = {}
        while True:
            line = fh.readline()
            if not line:
                break
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            parts = line.split()
            name, ndim = parts[0], int(parts[1])
            dims = tuple(int(d) for d in parts[2:2 + ndim])
            if len(dims) != ndim:
                raise ValueError(f"bad shape record for tensor {name!r}")
            count = int(np.prod(dims)) if dims else 1
            values = [float(tok) for tok in next_tokens(count)]
            if tokens:
                raise ValueError(f"extra values after tensor {name!r}")
            tensors[name] = np.array(values, dtype=np.float64).reshape(dims)
    return tensors, comments
