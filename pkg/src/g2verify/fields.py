"""Discretized tensor fields on uniform 7-dimensional grid charts.

Storage layout: a field's values have shape ``(*spatial, *components)``
where each spatial axis is either the chart resolution or 1.  Size-1
axes mean the field is constant along that direction; derivatives along
them vanish identically and no memory is spent on the redundant copies.
The default gallery fields vary along at most three coordinates, which
is what keeps the 7-dimensional grids affordable.

Differencing is second-order central.  Periodic charts wrap; on
bounded charts np.gradient's one-sided second-order edge stencils are
used, every derivative increments ``interior_depth``, and reductions
exclude that many boundary layers, so all reported residuals live on
the shrunken interior where the centered stencil is honest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import multi_index as mi

__all__ = [
    "Chart",
    "TensorField",
    "CurvatureData",
    "form_field",
    "tensor_field",
    "scalar_field",
    "exterior_derivative",
    "levi_civita",
    "curvature",
    "covariant_derivative",
    "wedge_fields",
    "hodge_fields",
    "form_inner_fields",
    "save_snapshot",
    "load_snapshot",
]

PERIODIC = "periodic"
INTERIOR_ONLY = "interiorOnly"


@dataclass(frozen=True)
class Chart:
    """A uniform grid on a 7-dimensional box.

    resolution: points per axis (at least 5 everywhere); spacing: grid
    step per axis; boundary: 'periodic' (the box is a torus, stencils
    wrap) or 'interiorOnly' (derived fields are trusted on the interior
    shrunk by the stencil radius).
    """

    resolution: tuple
    spacing: tuple
    origin: tuple = (0.0,) * mi.DIM
    boundary: str = INTERIOR_ONLY

    def __post_init__(self):
        if len(self.resolution) != mi.DIM or len(self.spacing) != mi.DIM:
            raise ValueError("resolution and spacing must have 7 entries")
        object.__setattr__(self, "resolution", tuple(int(n) for n in self.resolution))
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))
        if any(n < 5 for n in self.resolution):
            raise ValueError(f"resolution must be at least 5 per axis, got {self.resolution}")
        if any(h <= 0 for h in self.spacing):
            raise ValueError("grid spacing must be positive")
        if self.boundary not in (PERIODIC, INTERIOR_ONLY):
            raise ValueError(f"unknown boundary policy {self.boundary!r}")

    @classmethod
    def periodic_box(cls, resolution, lengths=None) -> "Chart":
        """Periodic chart; spacing = length / resolution (default length 2 pi)."""
        resolution = tuple(int(n) for n in resolution)
        if lengths is None:
            lengths = (2.0 * np.pi,) * mi.DIM
        spacing = tuple(L / n for L, n in zip(lengths, resolution))
        return cls(resolution, spacing, boundary=PERIODIC)

    @classmethod
    def box(cls, resolution, lengths, origin=(0.0,) * mi.DIM) -> "Chart":
        """Bounded chart covering [origin, origin + length] per axis."""
        resolution = tuple(int(n) for n in resolution)
        spacing = tuple(L / (n - 1) for L, n in zip(lengths, resolution))
        return cls(resolution, spacing, origin=origin, boundary=INTERIOR_ONLY)

    def coordinates(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.resolution[axis])

    def mesh(self, varying) -> list:
        """Coordinate arrays broadcastable to the field layout: full length on
        the ``varying`` axes, length 1 elsewhere."""
        out = []
        for a in range(mi.DIM):
            x = self.coordinates(a) if a in varying else self.coordinates(a)[:1]
            shape = [1] * mi.DIM
            shape[a] = x.size
            out.append(x.reshape(shape))
        return out

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def to_dict(self) -> dict:
        return {
            "resolution": list(self.resolution),
            "spacing": list(self.spacing),
            "origin": list(self.origin),
            "boundary": self.boundary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Chart":
        return cls(tuple(d["resolution"]), tuple(d["spacing"]),
                   tuple(d.get("origin", (0.0,) * mi.DIM)),
                   d.get("boundary", INTERIOR_ONLY))


@dataclass
class TensorField:
    """Grid field with packed-form or dense-tensor components.

    kind 'form': ``degree`` set, components packed over increasing tuples
    (one trailing axis of length C(7, degree)).
    kind 'tensor': ``slots`` is a string of 'u'/'d' markers, one dense
    length-7 axis per slot ('' for scalars).
    """

    chart: Chart
    kind: str
    values: np.ndarray
    degree: int | None = None
    slots: str | None = None
    interior_depth: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.kind == "form":
            comp = (mi.count(self.degree),)
        elif self.kind == "tensor":
            comp = (mi.DIM,) * len(self.slots)
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.values.shape[mi.DIM:] != comp:
            raise ValueError(
                f"component shape {self.values.shape[mi.DIM:]} does not match {comp}")
        for a, (n, r) in enumerate(zip(self.values.shape[:mi.DIM], self.chart.resolution)):
            if n not in (1, r):
                raise ValueError(
                    f"spatial axis {a} has size {n}; expected 1 or the resolution {r}")

    @property
    def spatial_shape(self) -> tuple:
        return self.values.shape[: mi.DIM]

    @property
    def n_points(self) -> int:
        return int(np.prod(self.spatial_shape))

    def interior(self, extra: int = 0) -> np.ndarray:
        """Values with untrusted boundary layers stripped (bounded charts only)."""
        depth = self.interior_depth + extra
        if self.chart.boundary == PERIODIC or depth == 0:
            return self.values
        index = []
        for n in self.spatial_shape:
            if n == 1:
                index.append(slice(None))
            else:
                if n - 2 * depth < 1:
                    raise ValueError(f"axis of size {n} has no interior at depth {depth}")
                index.append(slice(depth, n - depth))
        return self.values[tuple(index)]

    def max_abs(self, extra: int = 0) -> float:
        return float(np.abs(self.interior(extra)).max())

    def _like(self, values, depth=None):
        return TensorField(self.chart, self.kind, values, degree=self.degree,
                           slots=self.slots,
                           interior_depth=self.interior_depth if depth is None else depth)

    def _binary(self, other, op):
        if isinstance(other, TensorField):
            if (self.kind, self.degree, self.slots) != (other.kind, other.degree, other.slots):
                raise ValueError("field type mismatch")
            return self._like(op(self.values, other.values),
                              depth=max(self.interior_depth, other.interior_depth))
        return self._like(op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        return self._like(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.values)


def form_field(chart, degree, values, interior_depth=0) -> TensorField:
    return TensorField(chart, "form", values, degree=degree, interior_depth=interior_depth)


def tensor_field(chart, slots, values, interior_depth=0) -> TensorField:
    return TensorField(chart, "tensor", values, slots=slots, interior_depth=interior_depth)


def scalar_field(chart, values, interior_depth=0) -> TensorField:
    return TensorField(chart, "tensor", values, slots="", interior_depth=interior_depth)


def axis_derivative(values: np.ndarray, chart: Chart, axis: int) -> np.ndarray:
    """Second-order partial derivative along one spatial axis.

    Size-1 axes hold constant fields: the derivative is exactly zero.
    """
    n = values.shape[axis]
    if n == 1:
        return np.zeros_like(values)
    h = chart.spacing[axis]
    if chart.boundary == PERIODIC:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)
    return np.gradient(values, h, axis=axis, edge_order=2)


def _partials(values: np.ndarray, chart: Chart, insert_at: int) -> np.ndarray:
    """Stack D_a values over a new length-7 axis at position ``insert_at``."""
    parts = [axis_derivative(values, chart, a) for a in range(mi.DIM)]
    return np.stack(parts, axis=insert_at)


def exterior_derivative(f: TensorField) -> TensorField:
    """Discrete exterior derivative of a packed form field."""
    if f.kind != "form":
        raise ValueError("exterior derivative needs a form field")
    k = f.degree
    if k >= mi.DIM:
        raise ValueError("no exterior derivative of a top-degree form")
    iout, axis, iin, sign = mi.ext_deriv_table(k)
    out = np.zeros(f.values.shape[:-1] + (mi.count(k + 1),), dtype=np.float64)
    # all partial derivatives of all input slots, grouped by differentiation axis
    for a in range(mi.DIM):
        rows = axis == a
        if not rows.any():
            continue
        d = axis_derivative(f.values, f.chart, a)
        for o, i, s in zip(iout[rows], iin[rows], sign[rows]):
            out_slice = out[..., o]
            out_slice += s * d[..., i]
    return form_field(f.chart, k + 1, out, interior_depth=f.interior_depth + 1)


def levi_civita(g: TensorField) -> TensorField:
    """Christoffel symbols of a metric field, stored as Gamma[k, i, j] = Gamma^k_ij."""
    if g.kind != "tensor" or g.slots != "dd":
        raise ValueError("levi_civita needs a metric field with slots 'dd'")
    ginv = np.linalg.inv(g.values)
    dg = _partials(g.values, g.chart, insert_at=mi.DIM)  # (..., a, i, j) = D_a g_ij
    # Gamma^k_ij = (1/2) g^{kl} (D_i g_jl + D_j g_il - D_l g_ij)
    sym = np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg
    gamma = 0.5 * np.einsum("...kl,...lij->...kij", ginv, sym)
    return tensor_field(g.chart, "udd", gamma, interior_depth=g.interior_depth + 1)


@dataclass
class CurvatureData:
    """Christoffel symbols, curvature tensors and the scalar curvature of a
    metric field.  ``riemann`` is None when the full tensor was not
    materialized (it costs 7^4 components per point; the Ricci contraction
    is computed directly in that case)."""

    christoffel: TensorField
    ricci: TensorField
    scalar: TensorField
    riemann: TensorField | None = None
    g_inv: np.ndarray | None = None


def curvature(g: TensorField, with_riemann: bool | None = None) -> CurvatureData:
    """Curvature of a metric field from nested central differences.

    Index convention: riemann[l, i, j, k] = R^l_ijk with Ric_ij = R^l_ilj.
    ``with_riemann=None`` materializes the full tensor only when the grid
    is small enough for that to be cheap.
    """
    gamma = levi_civita(g)
    ginv = np.linalg.inv(g.values)
    chart = g.chart
    depth = gamma.interior_depth + 1
    G = gamma.values
    if with_riemann is None:
        with_riemann = g.n_points * mi.DIM**4 * 8 <= 2 * 10**8
    riemann = None
    if with_riemann:
        dG = _partials(G, chart, insert_at=mi.DIM)  # (..., a, l, i, j) = D_a Gamma^l_ij
        # R^l_ijk = D_j Gamma^l_ki - D_k Gamma^l_ji
        #           + Gamma^l_je Gamma^e_ki - Gamma^l_ke Gamma^e_ji
        riem = (np.einsum("...jlki->...lijk", dG)
                - np.einsum("...klji->...lijk", dG)
                + np.einsum("...lje,...eki->...lijk", G, G)
                - np.einsum("...lke,...eji->...lijk", G, G))
        ricci_vals = np.einsum("...lilj->...ij", riem)
        riemann = tensor_field(chart, "uddd", riem, interior_depth=depth)
    else:
        # Ric_ij = D_l Gamma^l_ji - D_j C_i + C_e Gamma^e_ji - Gamma^l_je Gamma^e_li
        # with C_i = Gamma^l_li; avoids storing the 7^4-component tensor.
        div = np.zeros(G.shape[:-3] + (mi.DIM, mi.DIM))
        for a in range(mi.DIM):
            div = div + axis_derivative(G[..., a, :, :], chart, a)
        c = np.einsum("...lli->...i", G)
        dc = _partials(c, chart, insert_at=mi.DIM)  # (..., j, i) = D_j C_i
        ricci_vals = (div  # D_l Gamma^l_ji, already symmetric in (j, i)
                      - np.einsum("...ji->...ij", dc)
                      + np.einsum("...e,...eji->...ij", c, G)
                      - np.einsum("...lje,...eli->...ij", G, G))
    ricci = tensor_field(chart, "dd", ricci_vals, interior_depth=depth)
    scalar_vals = np.einsum("...ij,...ij->...", ginv, ricci_vals)
    scalar = scalar_field(chart, scalar_vals, interior_depth=depth)
    return CurvatureData(christoffel=gamma, ricci=ricci, scalar=scalar,
                         riemann=riemann, g_inv=ginv)


def covariant_derivative(t: TensorField, gamma: TensorField) -> TensorField:
    """Levi-Civita covariant derivative; the new covariant slot comes first.

    Form fields are expanded to dense components; the result has slots
    'd' * (degree + 1).
    """
    if gamma.kind != "tensor" or gamma.slots != "udd":
        raise ValueError("gamma must be a Christoffel field with slots 'udd'")
    if t.kind == "form":
        vals = mi.expand(t.values, t.degree)
        slots = "d" * t.degree
    else:
        vals = t.values
        slots = t.slots
    chart = t.chart
    out = _partials(vals, chart, insert_at=mi.DIM)  # (..., i, comps)
    G = gamma.values
    for p, s in enumerate(slots):
        moved = np.moveaxis(vals, mi.DIM + p, -1)
        flat = moved.reshape(moved.shape[: mi.DIM] + (-1, mi.DIM))  # (..., q, m)
        if s == "d":
            corr = -np.einsum("...mia,...qm->...iqa", G, flat)
        else:
            corr = np.einsum("...aim,...qm->...iqa", G, flat)
        spatial = corr.shape[: mi.DIM]
        corr = corr.reshape(spatial + (mi.DIM,) + moved.shape[mi.DIM:-1] + (mi.DIM,))
        # slot p sits on the last axis; route it back to its home position
        corr = np.moveaxis(corr, -1, mi.DIM + 1 + p)
        out = out + corr
    depth = max(t.interior_depth + 1, gamma.interior_depth)
    return tensor_field(chart, "d" + slots, out, interior_depth=depth)


# -- pointwise form algebra on grids ----------------------------------------


def wedge_fields(a: TensorField, b: TensorField) -> TensorField:
    """Pointwise wedge product of two packed form fields."""
    if a.kind != "form" or b.kind != "form":
        raise ValueError("wedge_fields needs form fields")
    j, k = a.degree, b.degree
    if j + k > mi.DIM:
        raise ValueError(f"wedge of degrees {j} and {k} overflows dimension {mi.DIM}")
    av, bv = a.values, b.values
    spatial = np.broadcast_shapes(av.shape[:-1], bv.shape[:-1])
    out = np.zeros(spatial + (mi.count(j + k),))
    for o, ia, ib, sign in mi.wedge_groups(j, k):
        out[..., o] = np.einsum("...r,...r->...", av[..., ia] * sign, bv[..., ib])
    return form_field(a.chart, j + k, out,
                      interior_depth=max(a.interior_depth, b.interior_depth))


def _raising_field(ginv: np.ndarray, k: int) -> np.ndarray:
    return mi.raising_matrix(ginv, k)


# per-slab workspace ceiling for the Gram-matrix paths below; on big grids a
# full (..., 35, 35) raising matrix alone would run to gigabytes
_SLAB_BUDGET = 2 * 10**8


def _slab_slices(n0: int, per_row_bytes: int) -> list:
    if n0 * per_row_bytes <= _SLAB_BUDGET:
        return [slice(None)]
    rows = max(1, _SLAB_BUDGET // per_row_bytes)
    return [slice(i, min(i + rows, n0)) for i in range(0, n0, rows)]


def _broadcast_pointwise(av: np.ndarray, ginv: np.ndarray, vol_coeff) -> tuple:
    spatial = np.broadcast_shapes(av.shape[:-1], ginv.shape[:-2], np.shape(vol_coeff))
    av_b = np.broadcast_to(av, spatial + av.shape[-1:])
    ginv_b = np.broadcast_to(ginv, spatial + (mi.DIM, mi.DIM))
    vol_b = None if vol_coeff is None else np.broadcast_to(vol_coeff, spatial)
    return spatial, av_b, ginv_b, vol_b


def hodge_fields(a: TensorField, ginv: np.ndarray, vol_coeff: np.ndarray) -> TensorField:
    """Pointwise Hodge star of a packed form field.

    Degrees 0..3 raise indices directly via Gram-determinant matrices; for
    degrees 4..6 the complementary star (degree <= 3) is inverted with a
    batched linear solve, using star(star) = identity, which holds in all
    degrees here.  Work proceeds in slabs along the leading axis to bound
    the matrix workspace.
    """
    if a.kind != "form":
        raise ValueError("hodge_fields needs a form field")
    k = a.degree
    av = a.values
    if k == mi.DIM:
        out = av[..., :1] / vol_coeff[..., None]
        return form_field(a.chart, 0, out, interior_depth=a.interior_depth)
    m = k if k <= 3 else mi.DIM - k
    spatial, av_b, ginv_b, vol_b = _broadcast_pointwise(av, ginv, vol_coeff)
    comp, sign = mi.complement_table(m)
    out = np.empty(spatial + (mi.count(mi.DIM - k),))
    per_row = int(np.prod(spatial[1:], dtype=np.int64)) * mi.count(m) ** 2 * 8 * 3
    for sl in _slab_slices(spatial[0], per_row):
        R = mi.raising_matrix(np.asarray(ginv_b[sl]), m)
        if k <= 3:
            raised = np.einsum("...ij,...j->...i", R, av_b[sl])
            out[sl][..., comp] = raised * sign * vol_b[sl][..., None]
        else:
            # star on degree m = 7-k as a matrix, then solve star(x) = a;
            # row comp[i] of the star matrix is row i of (sign * vol * raising)
            mat = R * (sign * vol_b[sl][..., None])[..., :, None]
            star_m = np.empty_like(mat)
            star_m[..., comp, :] = mat
            out[sl] = np.linalg.solve(star_m, av_b[sl][..., None])[..., 0]
    return form_field(a.chart, mi.DIM - k, out, interior_depth=a.interior_depth)


def form_inner_fields(a: TensorField, b: TensorField, ginv: np.ndarray) -> np.ndarray:
    """Pointwise form inner product <a, b> as a plain array."""
    if a.degree != b.degree:
        raise ValueError("degree mismatch")
    spatial, av_b, ginv_b, _ = _broadcast_pointwise(
        np.broadcast_to(a.values, np.broadcast_shapes(a.values.shape, b.values.shape)),
        ginv, None)
    bv_b = np.broadcast_to(b.values, spatial + b.values.shape[-1:])
    out = np.empty(spatial)
    per_row = int(np.prod(spatial[1:], dtype=np.int64)) * mi.count(a.degree) ** 2 * 8 * 2
    for sl in _slab_slices(spatial[0], per_row):
        R = mi.raising_matrix(np.asarray(ginv_b[sl]), a.degree)
        out[sl] = np.einsum("...i,...ij,...j->...", av_b[sl], R, bv_b[sl])
    return out


# -- snapshots ---------------------------------------------------------------

_MAGIC = b"G2FSNAP1"


def save_snapshot(f: TensorField, path) -> None:
    """Write a field as a small JSON header plus flat little-endian float64 data."""
    header = {
        "kind": f.kind,
        "degree": f.degree,
        "slots": f.slots,
        "shape": list(f.values.shape),
        "interiorDepth": f.interior_depth,
        "chart": f.chart.to_dict(),
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_snapshot(path) -> TensorField:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path} is not a field snapshot")
        n = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(n).decode())
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(header["shape"])
    chart = Chart.from_dict(header["chart"])
    return TensorField(chart, header["kind"], data.copy(), degree=header["degree"],
                       slots=header["slots"], interior_depth=header["interiorDepth"])
