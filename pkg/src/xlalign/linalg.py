"""Thin SVD wrapper with the guarantees the alignment code relies on."""

from __future__ import annotations

import numpy as np


class SvdConvergenceError(RuntimeError):
    """The iterative SVD backend failed to converge."""


def svd(m):
    """Thin SVD: M = U @ diag(S) @ Vt with U (m,r), S (r,), Vt (r,n), r = min(m,n).

    S is non-negative and non-increasing; U and Vt have orthonormal columns/rows.
    Raises SvdConvergenceError if the backend does not converge and ValueError
    on non-finite input.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"svd expects a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("svd input contains non-finite values")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise SvdConvergenceError(f"SVD did not converge for shape {m.shape}: {exc}") from exc
    return u, s, vt
