"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and same results: the walk kernel is exact integer
arithmetic, so both backends agree bit for bit; the cosine sums agree to
rounding.
"""
from __future__ import annotations

import numpy as np

INT64_LIMIT = 2**62


def cos_deficit(angles: np.ndarray, q: np.ndarray) -> np.ndarray:
    """sum_j q[j] * (1 - cos angles[:, j]), evaluated as 2 q[j] sin^2(b/2)."""
    angles = np.asarray(angles, dtype=np.float64)
    out = np.zeros(angles.shape[0])
    for j in range(angles.shape[1]):
        if q[j] != 0.0:
            s = np.sin(0.5 * angles[:, j])
            out += q[j] * (2.0 * s * s)
    return out


def walk_canonical(j_idx, signs, a_seq, checkpoints):
    """Visits to zero of the walk with steps signs[t] * e_{j_idx[t]}.

    Returns ``(visits_at_checkpoints, last_return, final_numerator,
    final_level, overflow)``.  ``visits_at_checkpoints[k]`` counts t in
    [1, checkpoints[k]] with S_t = 0; ``last_return`` is the last such t
    (0 if none).  On int64 overflow the flag is set and the other outputs
    are meaningless.
    """
    j_idx = np.asarray(j_idx, dtype=np.int64)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    T = j_idx.shape[0]
    L = int(j_idx.max()) if T else 0
    prods = [1]
    for j in range(1, L + 1):
        prods.append(prods[-1] * int(a_seq[j - 1]))
    PL = prods[L]
    if PL * T >= INT64_LIMIT:
        return np.zeros(len(checkpoints), dtype=np.int64), 0, 0, 0, True
    units = np.array([PL // p for p in prods], dtype=np.int64)
    pos = np.cumsum(units[j_idx] * np.asarray(signs, dtype=np.int64))
    zeros = np.flatnonzero(pos == 0) + 1
    visits = np.searchsorted(zeros, checkpoints, side="right").astype(np.int64)
    last = int(zeros[-1]) if zeros.size else 0
    m, n = (int(pos[-1]), L) if T else (0, 0)
    if m == 0:
        n = 0
    while n > 0 and m % int(a_seq[n - 1]) == 0:
        m //= int(a_seq[n - 1])
        n -= 1
    return visits, last, m, n, False
