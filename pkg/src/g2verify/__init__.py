"""Numerical verification toolkit for closed G2-structures.

Layers, from algebra to orchestration:

* ``multi_index`` and ``exterior``: packed alternating forms in seven
  variables with wedge, interior product, Hodge star and metric pairings,
  in float or exact rational arithmetic.
* ``pointwise``: the flat model 3-form, the induced metric, the type
  decompositions of 2- and 3-forms, and the identity battery at a point.
* ``fields``: discretized tensor fields on uniform grid charts with
  second-order stencils, curvature, and binary snapshots.
* ``torsion``: the torsion of a structure field and the differential
  identities and sign facts it must satisfy.
* ``growth``: scalar volume-growth comparison analytics.
* ``gallery``, ``config``, ``suites``, ``report``, ``cli``: example
  fields, run configuration, batch verification and reporting.
"""

from .exterior import AlternatingForm, MetricData
from .config import ConfigError, RunConfig, load_config
from .fields import Chart, TensorField, curvature, load_snapshot, save_snapshot
from .gallery import (BetaTerm, default_beta_terms, default_chart,
                      flat_field, perturbed_closed_field)
from .growth import (GrowthProfile, PinchingParams, comparison_volume,
                     contradiction_predicate, geodesic_bound, growth_exponent,
                     growth_profile, monotone_profile, pinching_threshold)
from .pointwise import (G2Point, i_phi, i_phi_inverse, metric_from_phi,
                        pointwise_identity_battery, project_2form,
                        project_3form, standard_phi)
from .report import VerificationReport, emit_report
from .suites import build_structure, run_suites
from .torsion import (TorsionData, structure_metric, torsion_from_phi,
                      verify_closed, verify_laplacian_relation,
                      verify_master_identity, verify_pinch_bound,
                      verify_ricci_formula, verify_scalar_torsion_identity,
                      verify_t2_semidefinite)

__version__ = "0.1.0"

__all__ = [
    "AlternatingForm", "MetricData",
    "ConfigError", "RunConfig", "load_config",
    "Chart", "TensorField", "curvature", "load_snapshot", "save_snapshot",
    "BetaTerm", "default_beta_terms", "default_chart", "flat_field",
    "perturbed_closed_field",
    "GrowthProfile", "PinchingParams", "comparison_volume",
    "contradiction_predicate", "geodesic_bound", "growth_exponent",
    "growth_profile", "monotone_profile", "pinching_threshold",
    "G2Point", "i_phi", "i_phi_inverse", "metric_from_phi",
    "pointwise_identity_battery", "project_2form", "project_3form",
    "standard_phi",
    "VerificationReport", "emit_report",
    "build_structure", "run_suites",
    "TorsionData", "structure_metric", "torsion_from_phi", "verify_closed",
    "verify_laplacian_relation", "verify_master_identity",
    "verify_pinch_bound", "verify_ricci_formula",
    "verify_scalar_torsion_identity", "verify_t2_semidefinite",
    "__version__",
]
