"""Vectorised exact kernels for stacks of small integer matrices.

These are fast paths only. Whenever an int64 computation could overflow, the
affected matrices are routed to the big-integer code in :mod:`randsym.linalg`,
so results are always exact.
"""
from __future__ import annotations

import numpy as np

from .linalg import det_exact

# Largest prime below 2**31: products of two residues fit in int64.
WORD_PRIME = 2147483647

# Bareiss entries are minors bounded by the Hadamard product H of row norms;
# each update forms a difference of two products, so 2 * H**2 must stay
# below 2**63.
_LOG2_SAFE = 30.9


def _hadamard_log2(M: np.ndarray) -> np.ndarray:
    norms = np.sqrt((M.astype(np.float64) ** 2).sum(axis=-1))
    return np.log2(np.maximum(norms, 1.0)).sum(axis=-1)


def _permutation_sign(perm: np.ndarray) -> np.ndarray:
    n = perm.shape[1]
    inv = (perm[:, :, None] > perm[:, None, :]) & np.triu(np.ones((n, n), dtype=bool), 1)
    return np.where(inv.sum(axis=(1, 2)) % 2 == 0, 1, -1).astype(np.int64)


def _bareiss_det_int64(M: np.ndarray) -> np.ndarray:
    """Bareiss determinant of a stack that is known not to overflow.

    Pivot rows are marked instead of swapped, so each matrix may pick a
    different pivot row per column; the sign comes from the implied
    permutation.
    """
    M = M.astype(np.int64, copy=True)
    B, n, _ = M.shape
    ar = np.arange(B)
    used = np.zeros((B, n), dtype=bool)
    perm = np.zeros((B, n), dtype=np.int64)
    prev = np.ones(B, dtype=np.int64)
    alive = np.ones(B, dtype=bool)
    for c in range(n):
        col = M[:, :, c]
        cand = (col != 0) & ~used
        has = cand.any(axis=1)
        alive &= has
        M[~alive] = 0
        r = cand.argmax(axis=1)
        perm[:, c] = r
        used[ar[has], r[has]] = True
        pivrow = M[ar, r, c:]
        pk = pivrow[:, 0]
        upd = (pk[:, None, None] * M[:, :, c:] - col[:, :, None] * pivrow[:, None, :]) // prev[:, None, None]
        M[:, :, c:] = np.where(used[:, :, None], M[:, :, c:], upd)
        prev = np.where(has, pk, prev)
    if n == 0:
        return np.ones(B, dtype=np.int64)
    return np.where(alive, _permutation_sign(perm) * prev, 0)


def batch_det(M: np.ndarray, chunk: int = 1 << 15) -> np.ndarray:
    """Exact determinants of a ``(B, n, n)`` stack of integer matrices.

    Returns an int64 array, or an object array of Python ints when some
    determinant had to be computed on the big-integer path.
    """
    M = np.asarray(M)
    if M.ndim != 3 or M.shape[1] != M.shape[2]:
        raise ValueError(f"expected a (B, n, n) stack, got shape {M.shape}")
    B = M.shape[0]
    safe = _hadamard_log2(M) < _LOG2_SAFE
    out = np.zeros(B, dtype=np.int64)
    idx = np.flatnonzero(safe)
    for start in range(0, len(idx), chunk):
        sel = idx[start:start + chunk]
        out[sel] = _bareiss_det_int64(M[sel])
    if safe.all():
        return out
    big = out.astype(object)
    for i in np.flatnonzero(~safe):
        big[i] = det_exact(M[i])
    return big


def _modinv(x: np.ndarray, p: int) -> np.ndarray:
    result = np.ones_like(x)
    base = x % p
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


class BorderedRankTracker:
    """Rank mod ``p`` of a symmetric matrix grown one border at a time.

    Keeps ``E = T @ A (mod p)`` in fully reduced echelon form with the row
    transform ``T``. Bordering by ``(u, corner)`` appends the column ``T @ u``
    to ``E`` and then reduces the new row, which costs ``O(n**2)`` per step
    instead of a fresh ``O(n**3)`` elimination.
    """

    def __init__(self, p: int = WORD_PRIME, capacity: int = 32):
        if p >= 2**31:
            raise ValueError("tracker prime must be below 2**31")
        self.p = p
        self.n = 0
        self._alloc(max(capacity, 1))
        self._pivot_col = np.full(self._cap, -1, dtype=np.int64)

    def _alloc(self, cap: int):
        E = np.zeros((cap, cap), dtype=np.int64)
        T = np.zeros((cap, cap), dtype=np.int64)
        if getattr(self, "_cap", 0):
            k = self.n
            E[:k, :k] = self._E[:k, :k]
            T[:k, :k] = self._T[:k, :k]
            piv = np.full(cap, -1, dtype=np.int64)
            piv[:k] = self._pivot_col[:k]
            self._pivot_col = piv
        self._E, self._T, self._cap = E, T, cap

    @property
    def rank(self) -> int:
        return int((self._pivot_col[:self.n] >= 0).sum())

    def push(self, border, corner: int) -> int:
        """Border the current matrix; returns the new rank mod ``p``."""
        n, p = self.n, self.p
        u = np.asarray(border, dtype=np.int64) % p
        if u.shape != (n,):
            raise ValueError(f"border must have length {n}")
        if n + 1 > self._cap:
            self._alloc(2 * self._cap)
        E, T, piv = self._E, self._T, self._pivot_col

        # New column of E is T @ u.
        w = (T[:n, :n] * u[None, :] % p).sum(axis=1) % p
        E[:n, n] = w
        zero_rows = np.flatnonzero((piv[:n] < 0) & (w != 0))
        if len(zero_rows):
            i0 = zero_rows[0]
            inv = int(_modinv(np.array([w[i0]]), p)[0])
            T[i0, :n] = T[i0, :n] * inv % p
            E[i0, n] = 1
            others = np.flatnonzero(w != 0)
            others = others[others != i0]
            if len(others):
                T[others, :n] = (T[others, :n] - w[others, None] * T[i0, :n] % p) % p
                E[others, n] = 0
            piv[i0] = n

        # New row [u, corner] against the pivot rows.
        r = np.append(u, int(corner) % p)
        t = np.zeros(n + 1, dtype=np.int64)
        t[n] = 1
        rows = np.flatnonzero(piv[:n] >= 0)
        if len(rows):
            coef = r[piv[rows]]
            r = (r - (coef[:, None] * E[rows, :n + 1] % p).sum(axis=0)) % p
            t = (t - (coef[:, None] * T[rows, :n + 1] % p).sum(axis=0)) % p
        nz = np.flatnonzero(r)
        if len(nz):
            j = nz[0]
            inv = int(_modinv(np.array([r[j]]), p)[0])
            r = r * inv % p
            t = t * inv % p
            hit = rows[E[rows, j] != 0] if len(rows) else rows
            if len(hit):
                f = E[hit, j]
                E[hit, :n + 1] = (E[hit, :n + 1] - f[:, None] * r[None, :] % p) % p
                T[hit, :n + 1] = (T[hit, :n + 1] - f[:, None] * t[None, :] % p) % p
            piv[n] = j
        else:
            piv[n] = -1
        E[n, :n + 1] = r
        T[n, :n + 1] = t
        self.n = n + 1
        return self.rank
