"""Torsion of a discretized G2-structure field and the identities it satisfies.

The pipeline runs metric extraction, the Levi-Civita connection, the
covariant derivative of phi, and the defining contraction for the full
torsion 2-tensor.  The verify_* functions each compare two independently
computed sides of one identity and report max-norm residuals over the
trusted interior; on smooth fields every residual decays at second order
in the grid spacing.
"""

from dataclasses import dataclass

import numpy as np

from . import multi_index as mi
from .fields import (
    Chart,
    TensorField,
    exterior_derivative,
    form_field,
    form_inner_fields,
    hodge_fields,
    levi_civita,
    scalar_field,
    tensor_field,
    wedge_fields,
    _partials,
    _slab_slices,
)
from .fields import CurvatureData
from .pointwise import _J_TRACE, _J_TRACEFREE


def _interior_all(values: np.ndarray, k: int) -> np.ndarray:
    """All coordinate contractions of a packed k-form: out[..., m, :] = e_m -| value."""
    iout, axis, iin, sign = mi.interior_table(k)
    out = np.zeros(values.shape[:-1] + (mi.DIM, mi.count(k - 1)))
    for o, ax, i, s in zip(iout, axis, iin, sign):
        out[..., ax, o] += s * values[..., i]
    return out


@dataclass
class StructureMetric:
    """Metric data induced by a positive 3-form field."""

    g: TensorField
    g_inv: np.ndarray
    vol_coeff: np.ndarray
    positivity_margin: float


def structure_metric(phi: TensorField) -> StructureMetric:
    """Metric, inverse and volume density of a positive 3-form field.

    The density b_ij is the top-form coefficient of (e_i -| phi)^(e_j -| phi)^phi
    divided by 6; the metric is b normalized by det(b)^(1/9).  Rejects fields
    that are not positive at every grid point, reporting the worst point.
    """
    if phi.kind != "form" or phi.degree != 3:
        raise ValueError("structure_metric needs a 3-form field")
    A = _interior_all(phi.values, 3)  # (..., m, 21)
    comp, csign = mi.complement_table(4)
    phic = phi.values[..., comp] * csign  # pairs a 4-slot with its top-form partner
    ia, ib, io, sgn = mi.wedge_table(2, 2)
    M = np.zeros(A.shape[:-2] + (mi.count(2), mi.DIM))
    for r in range(len(ia)):
        M[..., ia[r], :] += sgn[r] * A[..., :, ib[r]] * phic[..., io[r]][..., None]
    b = np.einsum("...ma,...an->...mn", A, M) / 6.0
    det = np.linalg.det(b)
    if not np.all(np.isfinite(det)) or det.min() <= 0.0:
        bad = tuple(int(i) for i in np.unravel_index(int(np.argmin(det)), det.shape))
        raise ValueError(
            f"not a positive 3-form at grid point {bad}: density determinant {det.min():.6g}")
    vol = det ** (1.0 / 9.0)
    g_vals = b * (det ** (-1.0 / 9.0))[..., None, None]
    eig = np.linalg.eigvalsh(g_vals)
    margin = float(eig[..., 0].min())
    if margin <= 0.0:
        bad = tuple(int(i) for i in np.unravel_index(int(np.argmin(eig[..., 0])), eig[..., 0].shape))
        raise ValueError(f"not a positive 3-form at grid point {bad}: metric not definite")
    g = tensor_field(phi.chart, "dd", g_vals, interior_depth=phi.interior_depth)
    return StructureMetric(g=g, g_inv=np.linalg.inv(g_vals), vol_coeff=vol,
                           positivity_margin=margin)


def _nabla_form_packed(f: TensorField, gamma: TensorField) -> np.ndarray:
    """Covariant derivative of a 3-form field, packed: out[..., i, t] = (nabla_i f)_t.

    Keeps the output packed over increasing triples instead of expanding the
    7^4-component dense derivative, which matters on large grids.
    """
    out = _partials(f.values, f.chart, insert_at=mi.DIM)  # (..., i, 35)
    dense = mi.expand(f.values, 3)
    G = gamma.values
    corr = np.zeros(np.broadcast_shapes(out.shape[:-2], G.shape[:-3]) + out.shape[-2:])
    for t, (a, b, c) in enumerate(mi.tuples(3)):
        corr[..., :, t] = (
            np.einsum("...mi,...m->...i", G[..., :, :, a], dense[..., :, b, c])
            + np.einsum("...mi,...m->...i", G[..., :, :, b], dense[..., a, :, c])
            + np.einsum("...mi,...m->...i", G[..., :, :, c], dense[..., a, b, :]))
    return out - corr


@dataclass
class TorsionData:
    """Full torsion of a closed G2-structure field plus the metric data behind it.

    T is the full torsion 2-tensor; tau the associated 2-form (-2 times the
    antisymmetric part of T); normT2 the scalar |T|^2; T2 the squared-torsion
    symmetric tensor T_i^l T_lj.  antisym_residual records how far T is from
    exactly antisymmetric (zero only up to discretization when dphi = 0).
    """

    T: TensorField
    tau: TensorField
    normT2: TensorField
    T2: TensorField
    metric: TensorField
    g_inv: np.ndarray
    vol_coeff: np.ndarray
    psi: TensorField
    christoffel: TensorField
    antisym_residual: float
    positivity_margin: float


def torsion_from_phi(phi: TensorField, chart: Chart | None = None) -> TorsionData:
    """Torsion pipeline: metric field -> connection -> nabla phi -> contraction.

    T_ij = (1/24) nabla_i phi_abc psi_j^abc, with psi = *phi.  The 1/24
    absorbs the 3! repeated-index count of the full contraction against the
    packed storage.
    """
    if chart is not None and chart != phi.chart:
        raise ValueError("chart does not match the field")
    chart = phi.chart
    sm = structure_metric(phi)
    gamma = levi_civita(sm.g)
    psi = hodge_fields(phi, sm.g_inv, sm.vol_coeff)
    nab = _nabla_form_packed(phi, gamma)
    P = _interior_all(psi.values, 4)  # (..., j, 35): e_j -| psi
    spatial = np.broadcast_shapes(P.shape[:-2], sm.g_inv.shape[:-2], nab.shape[:-2])
    P = np.broadcast_to(P, spatial + P.shape[-2:])
    nab_b = np.broadcast_to(nab, spatial + nab.shape[-2:])
    ginv_b = np.broadcast_to(sm.g_inv, spatial + (mi.DIM, mi.DIM))
    T_vals = np.empty(spatial + (mi.DIM, mi.DIM))
    per_row = int(np.prod(spatial[1:], dtype=np.int64)) * mi.count(3) ** 2 * 8 * 2
    for sl in _slab_slices(spatial[0], per_row):
        R3 = mi.raising_matrix(np.asarray(ginv_b[sl]), 3)
        Pr = np.einsum("...pq,...jq->...jp", R3, P[sl])
        T_vals[sl] = 0.25 * np.einsum("...ia,...ja->...ij", nab_b[sl], Pr)
    del nab, nab_b, P, ginv_b

    depth = max(phi.interior_depth + 1, gamma.interior_depth)
    T = tensor_field(chart, "dd", T_vals, interior_depth=depth)
    antisym = tensor_field(chart, "dd", T_vals + np.swapaxes(T_vals, -1, -2),
                           interior_depth=depth)

    pairs = mi.index_array(2)
    tau_vals = -(T_vals[..., pairs[:, 0], pairs[:, 1]] - T_vals[..., pairs[:, 1], pairs[:, 0]])
    tau = form_field(chart, 2, tau_vals, interior_depth=depth)

    Tup = np.einsum("...ia,...ab,...bj->...ij", sm.g_inv, T_vals, sm.g_inv)
    normT2 = scalar_field(chart, np.einsum("...ij,...ij->...", T_vals, Tup),
                          interior_depth=depth)
    T2_vals = np.einsum("...ia,...al,...lj->...ij", T_vals, sm.g_inv, T_vals)
    T2 = tensor_field(chart, "dd", T2_vals, interior_depth=depth)

    return TorsionData(T=T, tau=tau, normT2=normT2, T2=T2, metric=sm.g,
                       g_inv=sm.g_inv, vol_coeff=sm.vol_coeff, psi=psi,
                       christoffel=gamma, antisym_residual=antisym.max_abs(),
                       positivity_margin=sm.positivity_margin)


def verify_closed(phi: TensorField, chart: Chart | None = None) -> float:
    """Max-norm of the discrete d(phi) over the trusted interior."""
    if chart is not None and chart != phi.chart:
        raise ValueError("chart does not match the field")
    return exterior_derivative(phi).max_abs()


def _common_depth(*fields: TensorField) -> int:
    return max(f.interior_depth for f in fields)


def verify_scalar_torsion_identity(td: TorsionData, cd: CurvatureData) -> dict:
    """Scalar curvature against torsion norm: R = -|T|^2 = -(1/2)|tau|^2.

    Returns max-norm residuals of both equalities over the common interior.
    """
    if cd.ricci.chart != td.T.chart:
        raise ValueError("torsion and curvature live on different charts")
    depth = _common_depth(cd.scalar, td.normT2)
    resid = scalar_field(td.T.chart, cd.scalar.values + td.normT2.values,
                         interior_depth=depth)
    tau_sq = form_inner_fields(td.tau, td.tau, td.g_inv)
    half = scalar_field(td.T.chart, td.normT2.values - 0.5 * tau_sq,
                        interior_depth=td.tau.interior_depth)
    return {"residual": resid.max_abs(), "tau_norm_residual": half.max_abs()}


def i_phi_field(h: np.ndarray, phi_vals: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """Grid version of the symmetric-tensor to 3-form map, packed output."""
    hu = np.einsum("...ik,...kl->...il", h, g_inv)  # h_i^l
    dense = mi.expand(phi_vals, 3)
    out = np.zeros(np.broadcast_shapes(h.shape[:-2], phi_vals.shape[:-1]) + (mi.count(3),))
    for t, (i, j, k) in enumerate(mi.tuples(3)):
        out[..., t] = (np.einsum("...l,...l->...", hu[..., i, :], dense[..., :, j, k])
                       + np.einsum("...l,...l->...", hu[..., j, :], dense[..., i, :, k])
                       + np.einsum("...l,...l->...", hu[..., k, :], dense[..., i, j, :]))
    return out


def i_phi_inverse_field(gamma_vals: np.ndarray, phi_vals: np.ndarray,
                        g: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """Symmetric preimage under i_phi at every grid point.

    Valid when the 3-form has no 7-component; the equivariant contraction
    used here simply annihilates any 7-part, so the caller is expected to
    measure the round trip if that matters.
    """
    gd = mi.expand(gamma_vals, 3)
    pd = mi.expand(phi_vals, 3)
    pup = np.einsum("...bkl,...ki,...lj->...bij", pd, g_inv, g_inv)
    s = np.einsum("...aij,...bij->...ab", gd, pup)
    s = 0.5 * (s + np.swapaxes(s, -1, -2))
    tr = np.einsum("...ab,...ab->...", g_inv, s)
    c = tr / (_J_TRACE * 7.0)
    h0 = (s - (tr / 7.0)[..., None, None] * g) / _J_TRACEFREE
    return c[..., None, None] * g + h0


def verify_laplacian_relation(phi: TensorField, td: TorsionData) -> dict:
    """d(tau) against the phi-Laplacian of phi, which for closed fields is
    d(delta phi) with delta phi = -*d*phi.

    Also splits d(tau) into irreducible 3-form types: the 7-type part must
    vanish and the 1-type part must equal (1/7)|tau|^2 phi.
    """
    chart = phi.chart
    dtau = exterior_derivative(td.tau)
    dpsi = exterior_derivative(td.psi)
    delta_phi = hodge_fields(dpsi, td.g_inv, td.vol_coeff) * (-1.0)
    lap = exterior_derivative(delta_phi)
    depth = _common_depth(dtau, lap)
    residual = form_field(chart, 3, dtau.values - lap.values, interior_depth=depth)

    # type decomposition of d(tau)
    S = i_phi_inverse_field(dtau.values, phi.values, td.metric.values, td.g_inv)
    recon = i_phi_field(S, phi.values, td.g_inv)
    omega7 = form_field(chart, 3, dtau.values - recon, interior_depth=dtau.interior_depth)
    inner = form_inner_fields(dtau, phi, td.g_inv)
    tau_sq = form_inner_fields(td.tau, td.tau, td.g_inv)
    omega1 = form_field(chart, 3, ((inner - tau_sq) / 7.0)[..., None] * phi.values,
                        interior_depth=dtau.interior_depth)
    return {"residual": residual.max_abs(),
            "omega7_residual": omega7.max_abs(),
            "omega1_residual": omega1.max_abs()}


def verify_ricci_formula(phi: TensorField, td: TorsionData, cd: CurvatureData,
                         chart: Chart | None = None) -> dict:
    """The curvature side of the torsion identities.

    Checks, in max norm over the common interior:
      * i_phi(Ric) = -d(tau) + (1/2) * star(tau ^ tau)
      * i_phi(-Ric + (1/3) R g - 2 T^2) = d(tau), and its inverse-map form
      * i_phi(T^2) = -(1/4) star(tau ^ tau) + (1/2) R phi
    """
    if chart is not None and chart != phi.chart:
        raise ValueError("chart does not match the field")
    chart = phi.chart
    if cd.ricci.chart != chart:
        raise ValueError("torsion and curvature live on different charts")
    g = td.metric.values
    ric = cd.ricci.values
    R = cd.scalar.values
    dtau = exterior_derivative(td.tau)
    tau2 = wedge_fields(td.tau, td.tau)
    star_tau2 = hodge_fields(tau2, td.g_inv, td.vol_coeff)

    lhs = i_phi_field(ric, phi.values, td.g_inv)
    rhs = -dtau.values + 0.5 * star_tau2.values
    depth = _common_depth(dtau, cd.ricci)
    lemma_ric = form_field(chart, 3, lhs - rhs, interior_depth=depth)

    S = -ric + (R / 3.0)[..., None, None] * g - 2.0 * td.T2.values
    forward = form_field(chart, 3, i_phi_field(S, phi.values, td.g_inv) - dtau.values,
                         interior_depth=depth)
    S_back = i_phi_inverse_field(dtau.values, phi.values, g, td.g_inv)
    inverse = tensor_field(chart, "dd", S_back - S, interior_depth=depth)

    lhs2 = i_phi_field(td.T2.values, phi.values, td.g_inv)
    rhs2 = -0.25 * star_tau2.values + 0.5 * R[..., None] * phi.values
    depth2 = _common_depth(td.T2, cd.scalar)
    square = form_field(chart, 3, lhs2 - rhs2, interior_depth=depth2)

    return {"ricci_residual": lemma_ric.max_abs(),
            "laplacian_form_residual": forward.max_abs(),
            "laplacian_inverse_residual": inverse.max_abs(),
            "torsion_square_residual": square.max_abs()}


def _ricci_torsion_scalar(td: TorsionData, cd: CurvatureData) -> np.ndarray:
    """Pointwise R_ij T^il T_l^j."""
    Tup = np.einsum("...ia,...ab,...bl->...il", td.g_inv, td.T.values, td.g_inv)
    Tmix = np.einsum("...la,...aj->...lj", td.T.values, td.g_inv)
    return np.einsum("...ij,...il,...lj->...", cd.ricci.values, Tup, Tmix)


def verify_master_identity(phi: TensorField, td: TorsionData, cd: CurvatureData,
                           chart: Chart | None = None) -> dict:
    """24 R_ij T^il T_l^j against star d(tau^3).

    tau^3 is formed pointwise and differentiated; the expanded form
    3 d(tau) ^ tau ^ tau is computed as well and the two must agree.  On a
    periodic chart the discrete integral of R_ij T^il T_l^j (which vanishes
    on a closed manifold) is returned too.
    """
    if chart is not None and chart != phi.chart:
        raise ValueError("chart does not match the field")
    chart = phi.chart
    if cd.ricci.chart != chart:
        raise ValueError("torsion and curvature live on different charts")
    scal = _ricci_torsion_scalar(td, cd)
    tau3 = wedge_fields(wedge_fields(td.tau, td.tau), td.tau)
    dtau3 = exterior_derivative(tau3)
    star_d = hodge_fields(dtau3, td.g_inv, td.vol_coeff)
    depth = _common_depth(cd.ricci, dtau3)
    resid = scalar_field(chart, 24.0 * scal - star_d.values[..., 0], interior_depth=depth)

    dtau = exterior_derivative(td.tau)
    expanded = wedge_fields(dtau, wedge_fields(td.tau, td.tau)) * 3.0
    exp_resid = form_field(chart, 7, dtau3.values - expanded.values,
                           interior_depth=_common_depth(dtau3, expanded))

    out = {"residual": resid.max_abs(), "expansion_residual": exp_resid.max_abs()}
    if chart.boundary == "periodic":
        # stored size-1 axes represent res identical copies of each point
        factor = 1.0
        for n, r in zip(scal.shape, chart.resolution):
            if n == 1:
                factor *= r
        total = float(np.sum(scal * td.vol_coeff) * chart.cell_volume * factor)
        out["integral"] = total
    return out


def _generalized_eigenvalues(sym_vals: np.ndarray, g_vals: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric tensor relative to the metric, ascending."""
    L = np.linalg.cholesky(g_vals)
    Li = np.linalg.inv(L)
    A = np.einsum("...ab,...bc,...dc->...ad", Li, sym_vals, Li)
    return np.linalg.eigvalsh(A)


def verify_t2_semidefinite(td: TorsionData, eps_h: float = 0.0) -> dict:
    """Largest generalized eigenvalue of T^2 over the grid (expected <= eps_h)."""
    depth = td.T2.interior_depth
    T2 = td.T2.interior()
    g = td.metric.interior(extra=depth - td.metric.interior_depth)
    T2 = 0.5 * (T2 + np.swapaxes(T2, -1, -2))
    lam = _generalized_eigenvalues(T2, np.broadcast_to(g, T2.shape))
    top = float(lam[..., -1].max())
    return {"max_eigenvalue": top, "passed": top <= eps_h, "eps_h": eps_h}


def tau_type_residual(td: TorsionData, phi: TensorField) -> float:
    """Relative size of the 7-type part of tau (zero for closed structures).

    Uses the pointwise-exact spectral projector (L + id)/3 from the operator
    eta -> star(eta ^ phi).
    """
    Ltau = hodge_fields(wedge_fields(td.tau, phi), td.g_inv, td.vol_coeff)
    pi7 = form_field(phi.chart, 2, (Ltau.values + td.tau.values) / 3.0,
                     interior_depth=td.tau.interior_depth)
    scale = td.tau.max_abs()
    if scale == 0.0:
        return 0.0
    return pi7.max_abs() / scale


def verify_pinch_bound(td: TorsionData, cd: CurvatureData, k1: float, k2: float,
                       eps_h: float = 0.0) -> dict:
    """Pointwise Ricci-pinching consequences.

    At points where -k2 g <= Ric <= -k1 g holds (generalized-eigenvalue
    test), asserts R_ij T^il T_l^j >= k1 |R| - eps_h.  Wherever Ric is
    negative definite the same contraction must be >= -eps_h regardless of
    pinching.  Points failing the hypothesis are excluded and counted.
    """
    if not (0.0 < k1 <= k2):
        raise ValueError("pinching parameters need 0 < k1 <= k2")
    depth = _common_depth(cd.ricci, td.T)
    ric = cd.ricci.interior(extra=depth - cd.ricci.interior_depth)
    g = td.metric.interior(extra=depth - td.metric.interior_depth)
    ric = 0.5 * (ric + np.swapaxes(ric, -1, -2))
    lam = _generalized_eigenvalues(ric, np.broadcast_to(g, ric.shape))

    scal_field = scalar_field(td.T.chart, _ricci_torsion_scalar(td, cd),
                              interior_depth=depth)
    scal = scal_field.interior()
    R_field = scalar_field(td.T.chart, cd.scalar.values,
                           interior_depth=cd.scalar.interior_depth)
    Rabs = np.abs(R_field.interior(extra=depth - cd.scalar.interior_depth))
    scal, Rabs = np.broadcast_arrays(scal, Rabs)

    hyp = (lam[..., -1] <= -k1) & (lam[..., 0] >= -k2)
    neg = lam[..., -1] < 0.0
    n_points = int(hyp.size)
    n_hyp = int(hyp.sum())
    n_neg = int(neg.sum())

    out = {"n_points": n_points, "n_hypothesis": n_hyp, "n_excluded": n_points - n_hyp,
           "n_negative_definite": n_neg, "eps_h": eps_h,
           "eigenvalue_range": (float(lam.min()), float(lam.max()))}
    if n_hyp:
        margin = float((scal - k1 * Rabs)[hyp].min())
        out["min_margin"] = margin
        out["passed_bound"] = margin >= -eps_h
    else:
        out["min_margin"] = None
        out["passed_bound"] = True  # vacuous
    if n_neg:
        worst = float(scal[neg].min())
        out["min_contraction"] = worst
        out["passed_sign"] = worst >= -eps_h
    else:
        out["min_contraction"] = None
        out["passed_sign"] = True
    return out
