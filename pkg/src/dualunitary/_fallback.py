"""Pure numpy implementations of the compiled kernels in ``_kernels.pyx``.

Signatures and return values match the compiled module exactly; this module
is used when the extension is not built or ``DUALUNITARY_PURE_PYTHON=1``.
"""

import numpy as np


def apply_two_site(X, gate, q, L, i, j):
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    K = X.shape[1]
    T = X.reshape((q,) * L + (K,))
    T = np.moveaxis(T, (i, j), (0, 1))
    shape = T.shape
    T = np.asarray(gate, dtype=np.complex128) @ T.reshape(q * q, -1)
    T = np.moveaxis(T.reshape(shape), (0, 1), (i, j))
    return np.ascontiguousarray(T.reshape(q**L, K))


def channel_series(M, v0, s, t_max):
    M = np.asarray(M, dtype=np.complex128)
    v = np.array(v0, dtype=np.complex128).ravel()
    s = np.asarray(s, dtype=np.complex128).ravel()
    values = np.empty(t_max + 1, dtype=np.complex128)
    for t in range(t_max + 1):
        values[t] = s @ v
        if t < t_max:
            v = M @ v
    return values


def spacing_ratios(phases, min_spacing):
    th = np.asarray(phases, dtype=np.float64)
    if th.size == 0:
        return np.empty(0), np.empty(0), 0
    spacings = np.append(np.diff(th), th[0] + 2 * np.pi - th[-1])
    keep = spacings[spacings >= min_spacing]
    if keep.size < 2:
        return np.empty(0), spacings, int(th.size - keep.size)
    nxt = np.roll(keep, -1)
    ratios = np.minimum(keep, nxt) / np.maximum(keep, nxt)
    return ratios, spacings, int(th.size - keep.size)
