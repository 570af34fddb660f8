"""Post-hoc orthogonal alignment between two embedding spaces.

One fitting routine serves both granularities: sentence-level (a parallel
corpus as the dictionary) and word-level (a static dictionary file). The
fitted map is the closed-form minimiser of ||X W - Y||_F over orthogonal W,
i.e. W = U Vt from the SVD of X^T Y. Rows are embeddings; the map applies on
the right (e @ W).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .linalg import svd


@dataclass
class AlignmentMap:
    w: np.ndarray
    src_space: str
    tgt_space: str
    n_pairs: int
    residual: float  # ||XW - Y||_F on the fitting pairs

    @property
    def dim(self):
        return self.w.shape[0]


def fit_orthogonal_map(x, y, src_space="src", tgt_space="tgt", center=False):
    """Fit W mapping rows of x onto rows of y (paired translations).

    `center` subtracts the column means before fitting; off by default since
    the map is rotation-only.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape != y.shape:
        raise ValueError(f"paired embedding matrices must share shape, got {x.shape} and {y.shape}")
    if x.shape[0] < 1:
        raise ValueError("at least one pair is required")
    if center:
        x = x - x.mean(axis=0)
        y = y - y.mean(axis=0)
    u, _, vt = svd(x.T @ y)
    w = u @ vt
    residual = float(np.linalg.norm(x @ w - y))
    return AlignmentMap(w, src_space, tgt_space, x.shape[0], residual)


def apply_map(e, m, reverse=False):
    """Map an embedding (or a stack of them) into the target space.

    `reverse=True` applies W^T, taking target-space vectors back to the
    source space (exact because W is orthogonal).
    """
    vec = np.asarray(getattr(e, "vector", e), dtype=np.float64)
    if vec.shape[-1] != m.dim:
        raise ValueError(f"embedding dim {vec.shape[-1]} does not match map dim {m.dim}")
    return vec @ (m.w.T if reverse else m.w)


def save_map(path, m):
    meta = f"src={m.src_space} tgt={m.tgt_space} pairs={m.n_pairs} residual={m.residual!r}"
    save_checkpoint(path, {"W": m.w}, comments=[meta])


def load_map(path):
    tensors, comments = load_checkpoint(path)
    if "W" not in tensors:
        raise ValueError(f"{path} holds no tensor named W")
    fields = dict(item.split("=", 1) for line in comments for item in line.split())
    return AlignmentMap(tensors["W"], fields.get("src", "src"), fields.get("tgt", "tgt"),
                        int(fields.get("pairs", 0)), float(fields.get("residual", "nan")))


def fit_word_dictionary_map(dict_pairs, src_words, src_table, tgt_words, tgt_table,
                            src_space="src-words", tgt_space="tgt-words"):
    """Same fit, with rows drawn from a word dictionary instead of sentences.

    Pairs whose words are missing on either side are dropped; duplicates are
    kept and reweight the fit.
    """
    src_index = {w: i for i, w in enumerate(src_words)}
    tgt_index = {w: i for i, w in enumerate(tgt_words)}
    rows_x, rows_y = [], []
    for s, t in dict_pairs:
        if s in src_index and t in tgt_index:
            rows_x.append(src_table[src_index[s]])
            rows_y.append(tgt_table[tgt_index[t]])
    if not rows_x:
        raise ValueError("no dictionary pair is covered by both vocabularies")
    return fit_orthogonal_map(np.array(rows_x), np.array(rows_y), src_space, tgt_space)
