"""Exterior algebra on an oriented 7-dimensional inner-product space.

The objects here are pointwise: a single alternating form, a single
metric.  Coefficients are float64 by default; passing Fractions (object
arrays) switches every operation to exact rational arithmetic, which is
used to certify the integer constants of the flat model.

Conventions (shared with :mod:`g2verify.multi_index`):

* packed storage over increasing multi-indices,
  alpha = sum_{i1<..<ik} alpha_{i1..ik} dx^{i1} ^ .. ^ dx^{ik};
* inner product <alpha, beta> = (1/k!) alpha_{i..} beta^{i..}, so the
  increasing-tuple coefficients of an orthonormal coframe are an
  orthonormal basis;
* Vol = vol_coeff dx^1 ^ .. ^ dx^7 with vol_coeff = sqrt(det g) > 0;
* Hodge star defined by alpha ^ (star beta) = <alpha, beta> Vol.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

import numpy as np

from . import multi_index as mi

__all__ = [
    "AlternatingForm",
    "MetricData",
    "wedge",
    "interior_product",
    "hodge_star",
    "form_inner",
    "form_power",
]


def _is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def _exact_sqrt(x: Fraction) -> Fraction:
    """Exact square root of a rational, or raise if none exists."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("square root of a negative rational")
    pn, qn = isqrt(x.numerator), isqrt(x.denominator)
    if pn * pn != x.numerator or qn * qn != x.denominator:
        raise ValueError(f"{x} has no rational square root; exact mode cannot proceed")
    return Fraction(pn, qn)


def _exact_root(x: Fraction, n: int) -> Fraction:
    """Exact n-th root of a rational, or raise if none exists."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("n-th root of a non-positive rational")

    def iroot(m: int) -> int:
        r = round(m ** (1.0 / n))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**n == m:
                return c
        raise ValueError(f"{m} is not a perfect {n}-th power; exact mode cannot proceed")

    return Fraction(iroot(x.numerator), iroot(x.denominator))


def _exact_det(m: np.ndarray) -> Fraction:
    """Determinant by fraction-free-ish Gaussian elimination on Fractions."""
    a = [[Fraction(x) for x in row] for row in m.tolist()]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def _exact_inv(m: np.ndarray) -> np.ndarray:
    """Inverse of a rational matrix by Gauss-Jordan elimination."""
    n = m.shape[0]
    a = [[Fraction(x) for x in row] for row in m.tolist()]
    b = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix in exact inverse")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        b[col] = [x * inv for x in b[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] = [x - f * y for x, y in zip(b[r], b[col])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = b[i][j]
    return out


class AlternatingForm:
    """A degree-k alternating form with packed coefficients.

    Parameters
    ----------
    degree : int
        Form degree, 0..7.
    coeffs : array_like
        C(7, degree) packed coefficients, one per increasing tuple.
    """

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs):
        coeffs = np.asarray(coeffs)
        if coeffs.dtype != object:
            coeffs = coeffs.astype(np.float64)
        if coeffs.shape != (mi.count(degree),):
            raise ValueError(
                f"degree-{degree} form needs {mi.count(degree)} packed "
                f"coefficients, got shape {coeffs.shape}"
            )
        self.degree = int(degree)
        self.coeffs = coeffs

    @classmethod
    def zero(cls, degree: int, exact: bool = False) -> "AlternatingForm":
        if exact:
            return cls(degree, np.array([Fraction(0)] * mi.count(degree), dtype=object))
        return cls(degree, np.zeros(mi.count(degree)))

    @classmethod
    def from_terms(cls, degree: int, terms, exact: bool = False) -> "AlternatingForm":
        """Build from (index_tuple, value) pairs; tuples need not be sorted."""
        out = cls.zero(degree, exact=exact)
        pos = mi.position(degree)
        for idx, val in terms:
            srt, sign = mi.sort_with_sign(tuple(idx))
            if sign == 0:
                raise ValueError(f"repeated index in {idx}")
            out.coeffs[pos[srt]] += sign * (Fraction(val) if exact else val)
        return out

    @classmethod
    def from_dense(cls, degree: int, dense) -> "AlternatingForm":
        dense = np.asarray(dense)
        return cls(degree, mi.pack(dense, degree))

    def dense(self) -> np.ndarray:
        """Expand to the totally antisymmetric coefficient tensor."""
        return mi.expand(self.coeffs, self.degree)

    def is_exact(self) -> bool:
        return _is_exact(self.coeffs)

    # -- arithmetic ---------------------------------------------------------

    def _check_degree(self, other: "AlternatingForm"):
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other):
        self._check_degree(other)
        return AlternatingForm(self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_degree(other)
        return AlternatingForm(self.degree, self.coeffs - other.coeffs)

    def __neg__(self):
        return AlternatingForm(self.degree, -self.coeffs)

    def __mul__(self, scalar):
        return AlternatingForm(self.degree, self.coeffs * scalar)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(max(abs(x) for x in self.coeffs)) if len(self.coeffs) else 0.0

    def __repr__(self):
        names = ["dx" + "".join(str(i + 1) for i in t) for t in mi.tuples(self.degree)]
        terms = [f"{c}*{n}" for c, n in zip(self.coeffs, names) if c != 0]
        body = " + ".join(terms) if terms else "0"
        return f"AlternatingForm({self.degree}: {body})"


class MetricData:
    """A positive-definite metric with its inverse and volume coefficient.

    vol_coeff = sqrt(det g) is the coefficient of the volume form in the
    positively oriented coordinate coframe, Vol = vol_coeff dx^1^..^dx^7.
    """

    __slots__ = ("g", "g_inv", "vol_coeff", "_raising")

    def __init__(self, g, g_inv, vol_coeff):
        self.g = g
        self.g_inv = g_inv
        self.vol_coeff = vol_coeff
        self._raising = {}

    def raising(self, k: int) -> np.ndarray:
        """Cached packed index-raising matrix for degree k."""
        if k not in self._raising:
            self._raising[k] = mi.raising_matrix(np.asarray(self.g_inv), k)
        return self._raising[k]

    @classmethod
    def from_matrix(cls, g) -> "MetricData":
        g = np.asarray(g)
        if g.shape != (mi.DIM, mi.DIM):
            raise ValueError(f"metric must be 7x7, got {g.shape}")
        if _is_exact(g):
            if not all(g[i, j] == g[j, i] for i in range(7) for j in range(7)):
                raise ValueError("metric is not symmetric")
            # Sylvester criterion, exact
            for lead in range(1, 8):
                if _exact_det(g[:lead, :lead]) <= 0:
                    raise ValueError("metric is not positive definite")
            return cls(g, _exact_inv(g), _exact_sqrt(_exact_det(g)))
        g = g.astype(np.float64)
        if not np.allclose(g, g.T, rtol=1e-12, atol=1e-12 * max(1.0, abs(g).max())):
            raise ValueError("metric is not symmetric")
        g = 0.5 * (g + g.T)
        eigs = np.linalg.eigvalsh(g)
        if eigs[0] <= 0:
            raise ValueError(f"metric is not positive definite (min eigenvalue {eigs[0]:.3e})")
        return cls(g, np.linalg.inv(g), float(np.sqrt(np.linalg.det(g))))

    @classmethod
    def euclidean(cls, exact: bool = False) -> "MetricData":
        if exact:
            eye = np.empty((7, 7), dtype=object)
            for i in range(7):
                for j in range(7):
                    eye[i, j] = Fraction(1) if i == j else Fraction(0)
            return cls(eye, eye.copy(), Fraction(1))
        return cls(np.eye(7), np.eye(7), 1.0)

    def volume_form(self) -> AlternatingForm:
        coeffs = np.array([self.vol_coeff], dtype=object if self.is_exact() else None)
        return AlternatingForm(7, coeffs)

    def is_exact(self) -> bool:
        return _is_exact(np.asarray(self.g))


def wedge(a: AlternatingForm, b: AlternatingForm) -> AlternatingForm:
    """Wedge product; rejects total degree above 7."""
    j, k = a.degree, b.degree
    if j + k > mi.DIM:
        raise ValueError(f"wedge of degrees {j} and {k} overflows dimension {mi.DIM}")
    ia, ib, iout, sign = mi.wedge_table(j, k)
    prod = a.coeffs[ia] * b.coeffs[ib] * sign
    out = np.zeros(mi.count(j + k), dtype=prod.dtype)
    np.add.at(out, iout, prod)
    return AlternatingForm(j + k, out)


def interior_product(v, a: AlternatingForm) -> AlternatingForm:
    """Contraction i_v a with a vector v (contravariant components)."""
    if a.degree < 1:
        raise ValueError("interior product needs a form of degree >= 1")
    v = np.asarray(v)
    iout, axis, iin, sign = mi.interior_table(a.degree)
    prod = v[axis] * a.coeffs[iin] * sign
    out = np.zeros(mi.count(a.degree - 1), dtype=prod.dtype)
    np.add.at(out, iout, prod)
    return AlternatingForm(a.degree - 1, out)


def form_inner(a: AlternatingForm, b: AlternatingForm, m: MetricData):
    """<a, b> = (1/k!) a_{i..} b^{i..}; reduces to the packed dot product
    when the metric is the identity."""
    if a.degree != b.degree:
        raise ValueError(f"degree mismatch: {a.degree} vs {b.degree}")
    raised = m.raising(a.degree) @ b.coeffs
    return np.dot(a.coeffs, raised)


def hodge_star(a: AlternatingForm, m: MetricData) -> AlternatingForm:
    """Hodge star, defined by alpha ^ (star beta) = <alpha, beta> Vol.

    Packed form: (star a)[I^c] = sign(I, I^c) vol_coeff a^I with indices of
    a raised by the metric.
    """
    k = a.degree
    comp, sign = mi.complement_table(k)
    raised = m.raising(k) @ a.coeffs
    vals = raised * sign * m.vol_coeff
    out = np.empty_like(vals)
    out[comp] = vals
    return AlternatingForm(mi.DIM - k, out)


def form_power(a: AlternatingForm, p: int) -> AlternatingForm:
    """Iterated wedge a^p for p in {2, 3}."""
    if p not in (2, 3):
        raise ValueError(f"form power supports p in {{2, 3}}, got {p}")
    if p * a.degree > mi.DIM:
        raise ValueError(f"degree {a.degree} form has no degree-{p * a.degree} power here")
    out = wedge(a, a)
    if p == 3:
        out = wedge(out, a)
    return out
