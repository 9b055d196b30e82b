"""Packed multi-index machinery for alternating tensors in dimension 7.

A degree-k alternating tensor is stored packed: one coefficient per
increasing k-tuple of indices, in lexicographic order, so that

    alpha = (1/k!) alpha_{i1..ik} dx^{i1} ^ ... ^ dx^{ik}
          = sum_{i1 < ... < ik} alpha_{i1..ik} dx^{i1} ^ ... ^ dx^{ik}.

Packed values are therefore components of the totally antisymmetric
coefficient tensor evaluated at increasing tuples.  The orientation is
fixed once and for all: dx^1 ^ ... ^ dx^7 is positive, and every sign
table built here (wedge, interior product, exterior derivative, Hodge
complement) follows from that choice.

All tables are built lazily and cached; they are tiny (the largest has a
few thousand rows) and shared by the scalar exterior algebra and the
vectorized field pipelines.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

DIM = 7


@lru_cache(maxsize=None)
def tuples(k: int) -> tuple:
    """All increasing k-tuples drawn from 0..6, lexicographic."""
    if not 0 <= k <= DIM:
        raise ValueError(f"degree must lie in 0..{DIM}, got {k}")
    return tuple(combinations(range(DIM), k))


@lru_cache(maxsize=None)
def position(k: int) -> dict:
    """Map increasing k-tuple -> packed position."""
    return {t: i for i, t in enumerate(tuples(k))}


def count(k: int) -> int:
    """Number of packed slots for degree k, i.e. C(7, k)."""
    return len(tuples(k))


def perm_sign(p) -> int:
    """Sign of the permutation taking sorted(p) to p (p has distinct entries)."""
    sign = 1
    p = tuple(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def sort_with_sign(idx):
    """Sort an index tuple; return (sorted tuple, sign), sign 0 on repeats."""
    idx = tuple(idx)
    if len(set(idx)) != len(idx):
        return None, 0
    return tuple(sorted(idx)), perm_sign(idx)


def merge_sign(a, b):
    """Merge two disjoint increasing tuples; (merged, sign) or (None, 0) on overlap."""
    if set(a) & set(b):
        return None, 0
    # sign of the shuffle (a, b) -> sorted(a + b): count inversions across the block
    inversions = sum(1 for x in a for y in b if y < x)
    return tuple(sorted(a + b)), -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def wedge_table(j: int, k: int):
    """Rows (ia, ib, iout, sign): (a ^ b)[iout] += sign * a[ia] * b[ib]."""
    if j + k > DIM:
        raise ValueError(f"wedge degree {j}+{k} exceeds {DIM}")
    rows = []
    pos_out = position(j + k)
    for ia, A in enumerate(tuples(j)):
        for ib, B in enumerate(tuples(k)):
            merged, sign = merge_sign(A, B)
            if sign:
                rows.append((ia, ib, pos_out[merged], sign))
    arr = np.array(rows, dtype=np.intp).reshape(-1, 4)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


@lru_cache(maxsize=None)
def wedge_groups(j: int, k: int):
    """wedge_table rows grouped by output slot: list of (iout, ia, ib, sign) arrays."""
    ia, ib, iout, sign = wedge_table(j, k)
    groups = []
    for o in range(count(j + k)):
        mask = iout == o
        if mask.any():
            groups.append((o, ia[mask], ib[mask], sign[mask]))
    return tuple(groups)


@lru_cache(maxsize=None)
def interior_table(k: int):
    """Rows (iout, axis, iin, sign): (i_v a)[iout] += sign * v[axis] * a[iin].

    (i_v a)_K = v^j a_{jK}; inserting j into K costs one transposition per
    element of K below j.
    """
    if k < 1:
        raise ValueError("interior product needs degree >= 1")
    rows = []
    pos_in = position(k)
    for iout, K in enumerate(tuples(k - 1)):
        for j in range(DIM):
            if j in K:
                continue
            below = sum(1 for x in K if x < j)
            sign = -1 if below % 2 else 1
            rows.append((iout, j, pos_in[tuple(sorted(K + (j,)))], sign))
    arr = np.array(rows, dtype=np.intp).reshape(-1, 4)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


@lru_cache(maxsize=None)
def ext_deriv_table(k: int):
    """Rows (iout, axis, iin, sign): (d a)_M = sum over m in M of sign * D_m a_{M \\ m}.

    Standard alternating-sum formula: the sign is (-1)^(position of m in M).
    """
    rows = []
    pos_in = position(k)
    for iout, M in enumerate(tuples(k + 1)):
        for p, m in enumerate(M):
            rest = M[:p] + M[p + 1:]
            rows.append((iout, m, pos_in[rest], -1 if p % 2 else 1))
    arr = np.array(rows, dtype=np.intp).reshape(-1, 4)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


@lru_cache(maxsize=None)
def complement_table(k: int):
    """Arrays (comp, sign): slot i of degree k pairs with slot comp[i] of degree 7-k.

    sign[i] is the sign of the permutation (I, I^c) relative to (0..6), so
    dx^I ^ dx^(I^c) = sign[i] dx^0 ^ ... ^ dx^6.
    """
    pos_c = position(DIM - k)
    comp = np.empty(count(k), dtype=np.intp)
    sign = np.empty(count(k), dtype=np.intp)
    for i, I in enumerate(tuples(k)):
        Ic = tuple(x for x in range(DIM) if x not in I)
        comp[i] = pos_c[Ic]
        _, s = merge_sign(I, Ic)
        sign[i] = s
    return comp, sign


@lru_cache(maxsize=None)
def index_array(k: int) -> np.ndarray:
    """Increasing tuples as an integer array of shape (C(7,k), k)."""
    return np.array(tuples(k), dtype=np.intp).reshape(count(k), k)


@lru_cache(maxsize=None)
def expand_map(k: int):
    """(pos, sign) of length 7**k: dense.flat[m] = sign[m] * packed[pos[m]]."""
    pos = np.zeros(DIM**k, dtype=np.intp)
    sign = np.zeros(DIM**k, dtype=np.intp)
    pos_k = position(k)
    for m, idx in enumerate(np.ndindex(*(DIM,) * k)):
        srt, s = sort_with_sign(idx)
        if s:
            pos[m] = pos_k[srt]
            sign[m] = s
    return pos, sign


def expand(packed: np.ndarray, k: int) -> np.ndarray:
    """Expand packed values (..., C(7,k)) to the dense tensor (..., 7, ..., 7)."""
    pos, sign = expand_map(k)
    dense = packed[..., pos] * sign
    return dense.reshape(packed.shape[:-1] + (DIM,) * k)


def pack(dense: np.ndarray, k: int) -> np.ndarray:
    """Gather increasing-tuple entries of a dense antisymmetric tensor (..., 7,..,7)."""
    flat = dense.reshape(dense.shape[:-k] + (DIM**k,)) if k else dense[..., None]
    strides = np.array([DIM**a for a in range(k - 1, -1, -1)], dtype=np.intp)
    flat_pos = index_array(k) @ strides if k else np.zeros(1, dtype=np.intp)
    return flat[..., flat_pos]


def raising_matrix(ginv: np.ndarray, k: int) -> np.ndarray:
    """Gram matrix R with raised[I] = sum_J R[I, J] packed[J], R[I,J] = det ginv[I_a, J_b].

    Works on stacked metrics (leading axes) and on object (exact rational)
    arrays; the determinant is expanded over permutations, which is cheap
    for the degrees used here.
    """
    if k == 0:
        out = np.zeros(ginv.shape[:-2] + (1, 1), dtype=ginv.dtype)
        out[..., 0, 0] = 1
        return out
    idx = index_array(k)
    out = None
    for perm in permutations(range(k)):
        s = perm_sign(perm)
        term = ginv[..., idx[:, None, 0], idx[None, :, perm[0]]]
        for a in range(1, k):
            term = term * ginv[..., idx[:, None, a], idx[None, :, perm[a]]]
        out = s * term if out is None else out + s * term
    return out
