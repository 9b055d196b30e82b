"""Pointwise algebra of a G2-structure: the metric recovered from a
positive 3-form, type decompositions of 2- and 3-forms, and the identity
battery for the flat model.

The flat model phi0 is fixed once; its sign pattern is pinned by the
requirement that the recovered metric is the identity and that 2-forms in
the 14-dimensional class satisfy eta ^ phi0 = -(star eta).  Flipping any
of those signs is a convention change, not a free choice, and the battery
would catch it.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.linalg

from . import multi_index as mi
from .exterior import (
    AlternatingForm,
    MetricData,
    _exact_det,
    _exact_root,
    form_inner,
    form_power,
    hodge_star,
    interior_product,
    wedge,
)
from .report import VerificationReport, bound_check, info_check, residual_check

__all__ = [
    "STANDARD_PHI_TERMS",
    "G2Point",
    "standard_phi",
    "metric_from_phi",
    "project_2form",
    "project_3form",
    "i_phi",
    "i_phi_inverse",
    "two_form_operator",
    "pointwise_identity_battery",
]

# Flat-model coefficients (0-based index triples).
STANDARD_PHI_TERMS = (
    ((0, 1, 2), 1),
    ((0, 3, 4), 1),
    ((0, 5, 6), 1),
    ((1, 3, 5), 1),
    ((1, 4, 6), -1),
    ((2, 3, 6), -1),
    ((2, 4, 5), -1),
)

# j(h) := sym of (i_phi(h))_{aij} phi_b^{ij} acts as 18 on the pure-trace
# channel and as 4 on trace-free symmetric tensors; the exact-arithmetic
# test suite certifies both constants on the flat model.
_J_TRACE = 18
_J_TRACEFREE = 4


def standard_phi(exact: bool = False) -> AlternatingForm:
    """The flat-model positive 3-form phi0 with identity metric."""
    return AlternatingForm.from_terms(3, STANDARD_PHI_TERMS, exact=exact)


def _basis_vector(i: int, exact: bool) -> np.ndarray:
    if exact:
        v = np.array([Fraction(0)] * 7, dtype=object)
        v[i] = Fraction(1)
        return v
    v = np.zeros(7)
    v[i] = 1.0
    return v


def metric_from_phi(phi: AlternatingForm):
    """Recover (metric, volume form) from a positive 3-form.

    b_ij is the dx^1^..^dx^7 coefficient of (1/6) i_{e_i} phi ^ i_{e_j} phi ^ phi.
    Then b = g * sqrt(det g), so det b = (det g)^(9/2) and

        g = b / det(b)^(1/9),   vol_coeff = det(b)^(1/9) = sqrt(det g).

    Raises ValueError when det b <= 0 (the form is not positive for the
    fixed orientation).
    """
    if phi.degree != 3:
        raise ValueError("metric recovery needs a 3-form")
    exact = phi.is_exact()
    b = np.empty((7, 7), dtype=object if exact else np.float64)
    us = [interior_product(_basis_vector(i, exact), phi) for i in range(7)]
    for i in range(7):
        for j in range(i, 7):
            top = wedge(wedge(us[i], us[j]), phi).coeffs[0]
            val = top / (Fraction(6) if exact else 6.0)
            b[i, j] = b[j, i] = val
    if exact:
        det = _exact_det(b)
        if det <= 0:
            raise ValueError("not a positive G2 3-form (non-positive metric density)")
        vol_coeff = _exact_root(det, 9)
    else:
        det = float(np.linalg.det(b))
        if det <= 0:
            raise ValueError("not a positive G2 3-form (non-positive metric density)")
        vol_coeff = det ** (1.0 / 9.0)
    metric = MetricData.from_matrix(b / vol_coeff)
    return metric, metric.volume_form()


class G2Point:
    """A G2-structure at a point: phi with its induced metric, psi = star phi
    and volume form."""

    __slots__ = ("phi", "metric", "psi", "vol")

    def __init__(self, phi, metric, psi, vol):
        self.phi = phi
        self.metric = metric
        self.psi = psi
        self.vol = vol

    @classmethod
    def from_phi(cls, phi: AlternatingForm) -> "G2Point":
        metric, vol = metric_from_phi(phi)
        psi = hodge_star(phi, metric)
        norm2 = form_inner(phi, phi, metric)
        if phi.is_exact():
            if norm2 != 7:
                raise ValueError(f"<phi,phi> = {norm2}, expected exactly 7")
        elif abs(norm2 - 7.0) > 1e-10 * 7.0:
            raise ValueError(f"<phi,phi> = {norm2!r}, expected 7 to relative 1e-10")
        return cls(phi, metric, psi, vol)

    def is_exact(self) -> bool:
        return self.phi.is_exact()


def two_form_operator(pt: G2Point) -> np.ndarray:
    """Matrix of L(eta) = star(eta ^ phi) on packed 2-form coordinates."""
    exact = pt.is_exact()
    L = np.empty((21, 21), dtype=object if exact else np.float64)
    for j in range(21):
        coeffs = np.zeros(21, dtype=object if exact else np.float64)
        coeffs[j] = Fraction(1) if exact else 1.0
        eta = AlternatingForm(2, coeffs)
        L[:, j] = hodge_star(wedge(eta, pt.phi), pt.metric).coeffs
    return L


def _two_form_eigensplit(pt: G2Point):
    """G-orthonormal eigenbasis of L; returns (eigenvalues, vectors, gram)."""
    L = two_form_operator(pt)
    gram = pt.metric.raising(2)
    a = gram @ L
    w, y = scipy.linalg.eigh(0.5 * (a + a.T), gram)
    return w, y, gram


def project_2form(eta: AlternatingForm, pt: G2Point):
    """Split a 2-form into its 7- and 14-dimensional components.

    The 14-class is the eigenvalue -1 eigenspace of L(eta) = star(eta^phi);
    the 7-class is its orthogonal complement.  In exact mode the projector
    (2 - L)/3 is used after certifying (L + 1)(L - 2) = 0.
    """
    if eta.degree != 2:
        raise ValueError("projection defined for 2-forms")
    if pt.is_exact() and eta.is_exact():
        L = two_form_operator(pt)
        eye = np.empty((21, 21), dtype=object)
        for i in range(21):
            for j in range(21):
                eye[i, j] = Fraction(1) if i == j else Fraction(0)
        residue = (L + eye) @ (L - 2 * eye)
        if any(x != 0 for x in residue.flat):
            raise ArithmeticError("operator minimal polynomial (L+1)(L-2) failed exactly")
        c14 = (2 * eye - L) @ eta.coeffs / 3
        eta14 = AlternatingForm(2, c14)
        return eta - eta14, eta14
    w, y, gram = _two_form_eigensplit(pt)
    coords = y.T @ (gram @ eta.coeffs)
    mask14 = w < 0.5
    if mask14.sum() != 14:
        raise ArithmeticError(f"eigenvalue cluster near -1 has dimension {mask14.sum()}, not 14")
    eta14 = AlternatingForm(2, y[:, mask14] @ coords[mask14])
    eta7 = AlternatingForm(2, y[:, ~mask14] @ coords[~mask14])
    return eta7, eta14


def i_phi(h, pt: G2Point) -> AlternatingForm:
    """The symmetric-tensor to 3-form map,

        (i_phi h)_{ijk} = h_i^l phi_{ljk} + h_j^l phi_{ilk} + h_k^l phi_{ijl},

    normalized so that i_phi(g) = 3 phi.
    """
    h = np.asarray(h)
    exact = pt.is_exact()
    if not exact and h.dtype != object:
        h = h.astype(np.float64)
    hr = h @ np.asarray(pt.metric.g_inv)  # h_i^l
    phid = pt.phi.dense()
    out = np.zeros(35, dtype=object if (exact or h.dtype == object) else np.float64)
    pos = 0
    for (i, j, k) in mi.tuples(3):
        acc = 0
        for l in range(7):
            acc = acc + hr[i, l] * phid[l, j, k] + hr[j, l] * phid[i, l, k] + hr[k, l] * phid[i, j, l]
        out[pos] = acc
        pos += 1
    return AlternatingForm(3, out)


def i_phi_inverse(gamma: AlternatingForm, pt: G2Point, tol: float = 1e-8):
    """Symmetric preimage of a 3-form under i_phi.

    Uses the equivariant contraction s_ab = sym((gamma)_{aij} phi_b^{ij}),
    which equals 18c g + 4 h0 for gamma = i_phi(c g + h0) and kills the
    7-component, then checks the round trip.  Raises ValueError when gamma
    has a 7-component above ``tol`` (no symmetric preimage).
    """
    if gamma.degree != 3:
        raise ValueError("i_phi inverse needs a 3-form")
    exact = pt.is_exact() and gamma.is_exact()
    ginv = np.asarray(pt.metric.g_inv)
    g = np.asarray(pt.metric.g)
    gd = gamma.dense()
    phid = pt.phi.dense()
    # phi with the last two indices raised
    phir = np.empty((7, 7, 7), dtype=phid.dtype)
    for b in range(7):
        phir[b] = ginv @ phid[b] @ ginv.T if exact else ginv @ phid[b] @ ginv.T
    s = np.empty((7, 7), dtype=gd.dtype)
    for a in range(7):
        for b in range(7):
            s[a, b] = (gd[a] * phir[b]).sum()
    s = (s + s.T) * (Fraction(1, 2) if exact else 0.5)
    tr = (ginv * s).sum()
    seven = Fraction(7) if exact else 7.0
    c = tr / (_J_TRACE * seven)
    h0 = (s - (tr / seven) * g) / _J_TRACEFREE
    h = c * g + h0
    resid = gamma - i_phi(h, pt)
    rel = form_inner(resid, resid, pt.metric)
    scale = form_inner(gamma, gamma, pt.metric)
    if exact:
        if scale != 0 and rel / scale > Fraction(tol).limit_denominator(10**12) ** 2:
            raise ValueError("no symmetric preimage: 3-form has a 7-component")
    else:
        if float(rel) > (tol**2) * max(1.0, float(scale)):
            raise ValueError(
                f"no symmetric preimage: 7-component norm {float(rel) ** 0.5:.3e} exceeds {tol}"
            )
    return h


def project_3form(gamma: AlternatingForm, pt: G2Point):
    """Split a 3-form into (g1, g7, g27).

    g1 = (<gamma, phi>/7) phi; g27 = i_phi(h0) with h0 the trace-free
    symmetric tensor minimizing |gamma - g1 - i_phi(h0)| (linear least
    squares in the form inner product); g7 is the remainder.
    """
    if gamma.degree != 3:
        raise ValueError("projection defined for 3-forms")
    m = pt.metric
    g1 = (form_inner(gamma, pt.phi, m) / 7) * pt.phi
    # least squares over all symmetric h; the trace channel maps onto phi,
    # which g1 already removed, so only the trace-free part of the solution
    # survives.
    sym_basis = []
    for i in range(7):
        for j in range(i, 7):
            e = np.zeros((7, 7))
            e[i, j] = e[j, i] = 1.0
            sym_basis.append(e)
    cols = np.stack([i_phi(b, pt).coeffs.astype(np.float64) for b in sym_basis], axis=1)
    gram = mi.raising_matrix(np.asarray(m.g_inv, dtype=np.float64), 3)
    target = (gamma - g1).coeffs.astype(np.float64)
    a = cols.T @ gram @ cols
    rhs = cols.T @ gram @ target
    coef, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    h = sum(c * b for c, b in zip(coef, sym_basis))
    g_mat = np.asarray(m.g, dtype=np.float64)
    ginv = np.asarray(m.g_inv, dtype=np.float64)
    h0 = h - ((ginv * h).sum() / 7.0) * g_mat
    g27 = i_phi(h0, pt)
    g7 = gamma - g1 - g27
    return g1, g7, g27


def _make_eta14_sampler(pt: G2Point, rng: np.random.Generator):
    """Precompute the 14-class projection once; return a sampling closure."""
    if pt.is_exact():
        L = two_form_operator(pt)
        eye = np.empty((21, 21), dtype=object)
        for i in range(21):
            for j in range(21):
                eye[i, j] = Fraction(1) if i == j else Fraction(0)
        residue = (L + eye) @ (L - 2 * eye)
        if any(x != 0 for x in residue.flat):
            raise ArithmeticError("operator minimal polynomial (L+1)(L-2) failed exactly")
        p14 = (2 * eye - L) / 3

        def draw():
            raw = np.array([Fraction(int(x)) for x in rng.integers(-9, 10, size=21)], dtype=object)
            return AlternatingForm(2, p14 @ raw)

        return draw
    w, y, _ = _two_form_eigensplit(pt)
    mask = w < 0.5
    if mask.sum() != 14:
        raise ArithmeticError(f"eigenvalue cluster near -1 has dimension {mask.sum()}, not 14")
    basis14 = y[:, mask]

    def draw():
        return AlternatingForm(2, basis14 @ rng.normal(size=14))

    return draw


def pointwise_identity_battery(
    pt: G2Point | None = None,
    samples: int = 100,
    seed: int = 0,
    tolerance: float = 1e-10,
) -> VerificationReport:
    """Run the pointwise identity battery at a G2 point.

    Checks, each against ``tolerance`` (exact mode: residuals are exact
    rationals and must be zero):

    * phi ^ star phi = 7 Vol
    * phi_{ljk} phi_p^{jk} = 6 g_lp
    * i_phi(g) = 3 phi
    * for sampled eta in the 14-class: eta ^ phi = -(star eta),
      |eta^2|^2 = |eta|^4 and |eta^3|^2 <= (2/3)|eta|^6
    * the pairing i_phi(U) ^ star i_phi(V) = (tr U tr V + 2 <U, V>) Vol
    * recorded (not asserted): the second eigenvalue of star(. ^ phi)
    """
    if pt is None:
        pt = G2Point.from_phi(standard_phi())
    exact = pt.is_exact()
    m = pt.metric
    rng = np.random.default_rng(seed)
    rep = VerificationReport(
        "pointwise identity battery",
        environment={"samples": samples, "seed": seed, "exact": exact},
    )

    def as_float(x):
        return float(x)

    # phi ^ psi = 7 Vol
    diff = wedge(pt.phi, pt.psi) - 7 * pt.vol
    rep.add(residual_check("phi wedge star-phi equals 7 Vol", "phi-psi-volume-pairing",
                           as_float(max(abs(x) for x in diff.coeffs)), tolerance))

    # phi_{ljk} phi_p^{jk} = 6 g_lp
    phid = pt.phi.dense()
    ginv = np.asarray(m.g_inv)
    g = np.asarray(m.g)
    raised = np.empty_like(phid)
    for l in range(7):
        raised[l] = ginv @ phid[l] @ ginv.T
    contraction = np.empty((7, 7), dtype=phid.dtype)
    for l in range(7):
        for p in range(7):
            contraction[l, p] = (phid[l] * raised[p]).sum()
    res = max(abs(x) for x in (contraction - 6 * g).flat)
    rep.add(residual_check("phi double contraction equals 6 g", "phi-double-contraction",
                           as_float(res), tolerance))

    # i_phi(g) = 3 phi
    diff = i_phi(g, pt) - 3 * pt.phi
    rep.add(residual_check("i_phi of the metric equals 3 phi", "iphi-of-metric",
                           as_float(diff.max_abs()), tolerance))

    # sampled 14-class identities
    res_antidual = 0.0
    res_square = 0.0
    max_cube_ratio = 0.0
    two_thirds = Fraction(2, 3) if exact else 2.0 / 3.0
    draw_eta14 = _make_eta14_sampler(pt, rng)
    for _ in range(samples):
        eta = draw_eta14()
        n2 = form_inner(eta, eta, m)
        if as_float(n2) == 0.0:
            continue
        diff = wedge(eta, pt.phi) + hodge_star(eta, m)
        res_antidual = max(res_antidual, as_float(diff.max_abs()) / max(1.0, as_float(n2)) ** 0.5)
        sq = form_power(eta, 2)
        res_square = max(res_square, abs(as_float(form_inner(sq, sq, m) - n2 * n2)) / as_float(n2) ** 2)
        cube = form_power(eta, 3)
        ratio = as_float(form_inner(cube, cube, m)) / as_float(two_thirds * n2**3)
        max_cube_ratio = max(max_cube_ratio, ratio)
    rep.add(residual_check("sampled 14-class eta satisfy eta wedge phi = -star eta",
                           "fourteen-class-anti-self-dual", res_antidual, tolerance))
    rep.add(residual_check("sampled 14-class eta satisfy |eta^2|^2 = |eta|^4",
                           "square-norm-identity", res_square, tolerance))
    rep.add(bound_check("sampled 14-class eta satisfy |eta^3|^2 <= (2/3)|eta|^6",
                        "cube-norm-bound", max_cube_ratio, 1.0 + tolerance,
                        detail="max ratio over samples; equality holds on special directions"))

    # pairing formula for symmetric tensors
    res_pair = 0.0
    for _ in range(min(samples, 50)):
        if exact:
            U = np.array([[Fraction(int(x)) for x in row]
                          for row in rng.integers(-5, 6, size=(7, 7))], dtype=object)
            V = np.array([[Fraction(int(x)) for x in row]
                          for row in rng.integers(-5, 6, size=(7, 7))], dtype=object)
            U = (U + U.T) * Fraction(1, 2)
            V = (V + V.T) * Fraction(1, 2)
        else:
            U = rng.normal(size=(7, 7))
            V = rng.normal(size=(7, 7))
            U = 0.5 * (U + U.T)
            V = 0.5 * (V + V.T)
        lhs = wedge(i_phi(U, pt), hodge_star(i_phi(V, pt), m)).coeffs[0]
        ur = ginv @ U  # U_i^j etc. traces and inner product need the metric
        vr = ginv @ V
        tru = sum(ur[i, i] for i in range(7))
        trv = sum(vr[i, i] for i in range(7))
        uv = (U * (ginv @ V @ ginv.T)).sum()
        rhs = (tru * trv + 2 * uv) * m.vol_coeff
        scale = max(1.0, abs(as_float(rhs)))
        res_pair = max(res_pair, abs(as_float(lhs - rhs)) / scale)
    rep.add(residual_check("i_phi pairing reproduces trace formula",
                           "symmetric-pairing-trace-formula", res_pair, tolerance))

    # observed second eigenvalue of the 2-form operator (recorded only)
    if exact:
        rep.add(info_check("second eigenvalue of star(. ^ phi) on 2-forms",
                           "two-form-operator-spectrum", 2.0,
                           detail="certified by exact minimal polynomial (L+1)(L-2) = 0"))
    else:
        w, _, _ = _two_form_eigensplit(pt)
        other = w[w > 0.5]
        rep.add(info_check("second eigenvalue of star(. ^ phi) on 2-forms",
                           "two-form-operator-spectrum", float(other.mean()),
                           detail=f"multiplicity {other.size}, observed, not asserted"))
    return rep
