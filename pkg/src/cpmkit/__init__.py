"""Finite-dimensional completely positive maps, verified at desk scale.

The package provides:

* :mod:`cpmkit.tensor` -- dense complex matrix primitives and the
  tolerance policy;
* :mod:`cpmkit.cpm` -- the CP-map data model (Kraus families with cached
  Choi matrices) and its categorical operations;
* :mod:`cpmkit.isometry` -- decomposition of CP isometries into pure
  isometries with pairwise orthogonal images, by two independent routes;
* :mod:`cpmkit.frobenius` -- isometric comonoids: law checking,
  generators, canonicity verdicts, and numerical proof traces;
* :mod:`cpmkit.dsl` -- a textual string-diagram language with parser,
  evaluator, and equation checking;
* :mod:`cpmkit.cli` -- the ``cpmkit`` command-line driver.
"""

from .tensor import (
    CpmkitError,
    DEFAULT_TOL,
    Eigensystem,
    NotHermitianError,
    Tolerance,
    eigh,
    fix_global_phase,
    haar_isometry,
    kron,
    matrix_from_json,
    matrix_to_json,
    numerical_rank,
    partial_trace,
    unvec,
    vec,
)
from .cpm import (
    CPMap,
    IsometryCheck,
    NotProportionalError,
    NotPSDError,
    NotPureError,
    Purification,
    PurityReport,
    add,
    apply_to,
    check_isometry,
    choi_distance,
    choi_norm,
    compose,
    cpmap_from_json,
    cpmap_to_json,
    dagger,
    discard,
    double,
    identity,
    is_pure,
    kraus_from_choi,
    prepare,
    pure_proportionality,
    purify,
    scale,
    tensor,
)
from .isometry import (
    EnvironmentGram,
    GramBlockError,
    IsometryDecomposition,
    NotIsometryError,
    ReshapeNotIsometryError,
    decompose,
    decompose_oracle,
    decomposition_to_json,
    dilation_gram_residual,
    environment_gram,
    random_cp_isometry,
    reconstruction,
)
from .frobenius import (
    BasesCoincideError,
    CanonicityReport,
    ComonoidCPM,
    LawResiduals,
    LawsFailedError,
    ProofTrace,
    ProportionalityError,
    canonicity_check,
    classical_structure,
    comonoid_from_json,
    comonoid_to_json,
    copy_pair,
    frobenius_law_residuals,
    law_residuals,
    matrix_algebra_structure,
    mixture_structure,
    proof_trace,
)
from .dsl import (
    DiagramSyntaxError,
    DimensionMismatchError,
    Environment,
    EquationCheck,
    UnboundNameError,
    check_equation,
    environment_from_json,
    environment_to_json,
    evaluate,
    parse,
    pretty,
)

__version__ = "0.1.0"
