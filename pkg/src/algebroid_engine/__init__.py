"""Numerical differential geometry of generalized Lie algebroids.

The package evaluates the component calculus of anchored bundles with
twisted brackets on user-supplied smooth data: nonlinear connections and
their curvature, distinguished linear connections with the full torsion /
curvature / Ricci / Bianchi identity suites, canonical sprays with their
geodesics, and projective (Weyl-type) equivalence of sprays including
factor recovery.

Fields are expression trees over a single global chart (see expr); all
identity checks are pointwise residuals on seeded sample clouds.
"""

from .expr import (
    DomainError, Expr, FiberPoint, ParseError, Point, Var,
    diff, eval_at, evaluate, parse, substitute,
)
from .algebroid import (
    DiffeoMap, GenAlgebroid, GhMorphism, PullbackSection,
    anchored_action, identity_map, identity_morphism, pullback_bracket,
    validate_axioms,
)
from .connection import (
    NlConnection, TangentSection, apply_H, apply_J, apply_P, apply_V,
    frame_bracket_check, section_bracket,
)
from .dconn import (
    DConnection, TensorField, TensorSig, berwald_dconnection, bianchi_check,
    cov_deriv, cov_deriv_section, curvature_components, curvature_operator,
    fr6_check, mixed_curvature, operator_component_checks, ricci_check,
    torsion_components, torsion_operator,
)
from .mech import (
    MechSystem, SpraySection, berwald_nabla, canonical_U,
    canonical_connection, hessian, homog1_check, hs_components,
    hs_connection, liouville_section, prop76_check, spray_condition,
    spray_section, v_derivative,
)
from .geo import (
    OdeState, Trajectory, geodesic_rhs, integrate, parallel_lift_check,
    path_deviation, trajectory_to_csv,
)
from .weyl import (
    ProjChange, ProjectiveChangeError, berwald_relation_check,
    geodesic_equivalence_check, hs_relation_check, make_projective_change,
    mixed_curvature_change_check, projective_factor,
)
from .config import SystemConfig, load_config, parse_config
from .report import CheckResult
from .sampling import sample_box

__version__ = "0.1.0"
