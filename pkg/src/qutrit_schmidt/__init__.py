"""Schmidt decomposition of biphoton polarization qutrits."""

from .core import (
    PolarizationMode,
    QutritState,
    SchmidtDecomposition,
    coefficient_matrix,
    concurrence,
    decompose,
    lambdas,
    magic_residual,
    make_qutrit,
    reconstruct,
    schmidt_number,
    x_parameter,
)
from .errors import (
    DegenerateConcurrence,
    InvalidTrials,
    MissingSetting,
    NonFinite,
    ParseError,
    ToleranceViolation,
    ZeroState,
)
from .oracle import compare_decompositions, con_eigen_modes, reduced_density_matrix
from .transforms import CanonicalForm, apply_unitary, canonicalize, hwp, qwp, shift_phase

__version__ = "0.1.0"
