"""Minimal Lorentz surfaces in flat 4-space with neutral (+,+,-,-) metric.

The package covers the full computational pipeline for surfaces of general
type (two-dimensional first normal space, K^2 - kappa^2 > 0):

* :mod:`lormin.neutral` — the indefinite inner product and frame algebra;
* :mod:`lormin.expr` / :mod:`lormin.fields` — expression language and
  scalar fields with finite-difference derivatives;
* :mod:`lormin.analyzer` — fundamental forms, curvatures, classification;
* :mod:`lormin.canonical` — distinguished frames, invariants (mu, nu),
  canonical parameters;
* :mod:`lormin.natural` — residuals of the governing PDE systems;
* :mod:`lormin.synthesis` — construction of a surface from a solution
  (mu, nu) by integrating the moving-frame system;
* :mod:`lormin.nullcurves` — minimal charts from pairs of null curves;
* :mod:`lormin.gallery` — a closed-form demo surface wired through
  everything, used as the package's regression oracle;
* :mod:`lormin.cli` — the command-line front end.
"""

from .analyzer import (
    CurvatureReport,
    FundamentalData,
    HyperplaneCharacter,
    Jet2,
    SurfaceChart,
    SurfaceClass,
    chart_from_expressions,
    chart_from_grid,
    curvature_report,
    first_form,
    frame_free_gauss_curvature,
    hyperplane_containment,
    jet,
    minimality_residual,
    second_form,
)
from .canonical import (
    CanonicalCheck,
    GeometricInvariants,
    check_canonical,
    extract_frame,
    gamma_beta_from_invariants,
)
from .errors import LorminError
from .expr import parse, to_text
from .fields import Rectangle, ScalarField, field_from_text, hyperbolic_laplacian
from .gallery import ExampleBundle, example, oracle_compare
from .natural import (
    ResidualReport,
    convert_K_kappa_to_mu_nu,
    convert_mu_nu_to_K_kappa,
    fields_K_kappa_from_mu_nu,
    residual_K_kappa,
    residual_mu_nu,
)
from .neutral import (
    CausalCharacter,
    OrthonormalityDefect,
    causal_character,
    frame_defect,
    inner,
    neutral_vector,
)
from .nullcurves import (
    NullCurve,
    NullCurvePair,
    affine_null_curve,
    null_curve_from_expressions,
    surface_from_pair,
    trig_null_curve,
    validate_pair,
)
from .synthesis import (
    CoefficientMatrices,
    FrameState,
    GridSpec,
    SynthesizedSurface,
    SynthesisValidation,
    build_matrices,
    integrability_defect,
    integrate_frames,
    integrate_positions,
    validate_synthesis,
)

__version__ = "0.1.0"
