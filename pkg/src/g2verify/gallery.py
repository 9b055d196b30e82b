"""Example G2-structure fields on a grid.

The flat model, closed perturbations phi0 + t * d(beta) with the exterior
derivative taken analytically (so the field is closed by construction, not
merely to stencil accuracy), and fields loaded from snapshots.
"""

from dataclasses import dataclass

import numpy as np

from . import multi_index as mi
from .fields import Chart, TensorField, form_field, load_snapshot
from .pointwise import STANDARD_PHI_TERMS
from .torsion import structure_metric

DEFAULT_RESOLUTION = (17, 17, 17, 5, 5, 5, 5)
DEFAULT_AMPLITUDE = 0.05
ACTIVE_AXES = (0, 1, 2)


def default_chart(resolution=DEFAULT_RESOLUTION, lengths=None) -> Chart:
    return Chart.periodic_box(tuple(resolution), lengths)


def _trig(kind: str, k: float, x: np.ndarray, derivative: bool = False):
    if kind == "sin":
        return k * np.cos(k * x) if derivative else np.sin(k * x)
    return -k * np.sin(k * x) if derivative else np.cos(k * x)


@dataclass(frozen=True)
class BetaTerm:
    """One term c * f(x_axis) * m(x_axis2) dx^i ^ dx^j of a perturbation 2-form.

    kind 'sin'/'cos' take a wavenumber (the chart must be 2-pi periodic along
    the axis for the field to close up); kind 'poly' takes coefficients in
    increasing degree, for stencil-exactness tests on bounded charts.  The
    optional modulation axis2 multiplies in a second trigonometric factor.
    """

    pair: tuple
    axis: int
    kind: str
    amplitude: float = 1.0
    wavenumber: float = 1.0
    coefficients: tuple = ()
    axis2: int | None = None
    kind2: str = "sin"
    wavenumber2: float = 1.0

    def __post_init__(self):
        i, j = self.pair
        if not (0 <= i < j < mi.DIM):
            raise ValueError(f"pair must be increasing in 0..6, got {self.pair}")
        if self.kind not in ("sin", "cos", "poly"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "poly" and not self.coefficients:
            raise ValueError("poly term needs coefficients")
        if self.axis2 is not None:
            if self.axis2 == self.axis:
                raise ValueError("modulation axis must differ from the base axis")
            if self.kind2 not in ("sin", "cos"):
                raise ValueError(f"unknown modulation kind {self.kind2!r}")

    @property
    def axes(self) -> tuple:
        return (self.axis,) if self.axis2 is None else (self.axis, self.axis2)

    def _base(self, x: np.ndarray, derivative: bool) -> np.ndarray:
        if self.kind == "poly":
            c = np.asarray(self.coefficients, dtype=float)
            if derivative:
                c = np.polynomial.polynomial.polyder(c)
            return np.polynomial.polynomial.polyval(x, c)
        return _trig(self.kind, self.wavenumber, x, derivative)

    def profile(self, mesh) -> np.ndarray:
        out = self.amplitude * self._base(mesh[self.axis], False)
        if self.axis2 is not None:
            out = out * _trig(self.kind2, self.wavenumber2, mesh[self.axis2])
        return out

    def profile_gradient(self, mesh) -> list:
        """(axis, coefficient) pairs of the analytic d of the profile."""
        out = [(self.axis, self.amplitude * self._base(mesh[self.axis], True))]
        if self.axis2 is not None:
            mod = _trig(self.kind2, self.wavenumber2, mesh[self.axis2])
            out[0] = (self.axis, out[0][1] * mod)
            dmod = _trig(self.kind2, self.wavenumber2, mesh[self.axis2], derivative=True)
            out.append((self.axis2, self.amplitude * self._base(mesh[self.axis], False) * dmod))
        return out

    def to_dict(self) -> dict:
        d = {"pair": list(self.pair), "axis": self.axis, "kind": self.kind,
             "amplitude": self.amplitude}
        if self.kind == "poly":
            d["coefficients"] = list(self.coefficients)
        else:
            d["wavenumber"] = self.wavenumber
        if self.axis2 is not None:
            d.update(axis2=self.axis2, kind2=self.kind2, wavenumber2=self.wavenumber2)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BetaTerm":
        return cls(pair=tuple(d["pair"]), axis=int(d["axis"]), kind=d["kind"],
                   amplitude=float(d.get("amplitude", 1.0)),
                   wavenumber=float(d.get("wavenumber", 1.0)),
                   coefficients=tuple(d.get("coefficients", ())),
                   axis2=d.get("axis2"), kind2=d.get("kind2", "sin"),
                   wavenumber2=float(d.get("wavenumber2", 1.0)))


def default_beta_terms() -> tuple:
    """Trigonometric 2-form varying along the first three axes only.

    The last term carries a weak second-axis modulation with a distinct
    wavenumber: for purely single-axis profiles the discrete d of the
    analytic d(beta) cancels identically, and the closedness residual would
    have no convergence order to exhibit.  It is kept small so the
    higher-wavenumber content does not dominate the other residuals.
    """
    return (
        BetaTerm(pair=(3, 5), axis=0, kind="sin"),
        BetaTerm(pair=(4, 6), axis=1, kind="cos"),
        BetaTerm(pair=(3, 4), axis=2, kind="sin"),
        BetaTerm(pair=(5, 6), axis=0, kind="cos"),
        BetaTerm(pair=(1, 6), axis=2, kind="cos"),
        BetaTerm(pair=(2, 4), axis=1, kind="sin"),
        BetaTerm(pair=(4, 5), axis=0, kind="sin", amplitude=0.01,
                 axis2=1, kind2="sin", wavenumber2=2.0),
    )


def _active_mesh(chart: Chart, terms) -> tuple:
    axes = set()
    for t in terms:
        axes.update(t.axes)
    return axes, chart.mesh(varying=axes)


def beta_field(chart: Chart, terms) -> TensorField:
    """The perturbation 2-form itself (mostly useful for plots and tests)."""
    axes, mesh = _active_mesh(chart, terms)
    shape = tuple(chart.resolution[a] if a in axes else 1 for a in range(mi.DIM))
    vals = np.zeros(shape + (mi.count(2),))
    pos = mi.position(2)
    for t in terms:
        vals[..., pos[tuple(t.pair)]] += np.broadcast_to(t.profile(mesh), shape)
    return form_field(chart, 2, vals)


def beta_exterior_derivative(chart: Chart, terms) -> TensorField:
    """d(beta) evaluated from the analytic derivative of each term profile."""
    axes, mesh = _active_mesh(chart, terms)
    shape = tuple(chart.resolution[a] if a in axes else 1 for a in range(mi.DIM))
    vals = np.zeros(shape + (mi.count(3),))
    pos = mi.position(3)
    for t in terms:
        for ax, coeff in t.profile_gradient(mesh):
            merged, sign = mi.merge_sign((ax,), tuple(t.pair))
            if sign == 0:
                continue  # the differentiation axis lies in the pair
            vals[..., pos[merged]] += sign * np.broadcast_to(coeff, shape)
    return form_field(chart, 3, vals)


def flat_field(chart: Chart) -> TensorField:
    """The constant flat-model 3-form."""
    coeffs = np.zeros(mi.count(3))
    pos = mi.position(3)
    for idx, c in STANDARD_PHI_TERMS:
        coeffs[pos[idx]] = c
    return form_field(chart, 3, np.broadcast_to(coeffs, (1,) * mi.DIM + (mi.count(3),)).copy())


def perturbed_closed_field(chart: Chart, terms=None,
                           amplitude: float = DEFAULT_AMPLITUDE) -> TensorField:
    """phi0 + amplitude * d(beta): closed by construction.

    Raises when the perturbed form stops being positive somewhere on the
    grid (the error names the worst point).
    """
    if terms is None:
        terms = default_beta_terms()
    dbeta = beta_exterior_derivative(chart, terms)
    phi = flat_field(chart) + dbeta * amplitude
    structure_metric(phi)  # positivity gate
    return phi


def positivity_margin(phi: TensorField) -> float:
    """Smallest eigenvalue of the induced metric over the grid (flat model: 1)."""
    return structure_metric(phi).positivity_margin


def explicit_field(path) -> TensorField:
    """A 3-form field loaded from a snapshot file, validated for positivity."""
    f = load_snapshot(path)
    if f.kind != "form" or f.degree != 3:
        raise ValueError("snapshot does not hold a 3-form field")
    structure_metric(f)
    return f
