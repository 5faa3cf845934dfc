"""spherekern: Hermitian kernels on the 2-sphere represented by
spherical-harmonic coefficient tensors, with block-operator certification
of (strict) positive definiteness, explicit degeneracy witnesses, and
scattered-data kernel interpolation."""

from .certify import (
    BlockClassification,
    BlockStatus,
    Certificate,
    ParityReport,
    Verdict,
    build_block,
    certify,
    classify_block,
)
from .errors import (
    ConvergenceError,
    DivergenceError,
    DomainError,
    KernelSpecError,
    KernelStructureError,
    SingularGramError,
)
from .geometry import SpherePoint, random_points
from .harmonics import (
    HarmonicIndex,
    addition_theorem_gap,
    assoc_legendre,
    assoc_legendre_normalized,
    flat_index,
    degree_order,
    harmonic_matrix,
    harmonic_vector,
    legendre,
    legendre_asymptotic,
    spherical_harmonic,
)
from .interpolate import (
    InterpolationProblem,
    Interpolant,
    evaluate,
    evaluate_many,
    fit,
    gram,
    read_sites,
    write_sites,
)
from .kernels import (
    BandLimitedFunction,
    BlockGeneratorTail,
    CoefficientTensor,
    Tail,
    dumps_kernel_spec,
    eval_kernel,
    heat_l2_defect_sq,
    heat_smooth,
    kernel_matrix,
    laplace_symmetry_defect,
    laplacian_mismatch,
    load_kernel_spec,
    loads_kernel_spec,
    save_kernel_spec,
    sobolev_norm,
)
from .quadrature import GaussRule, SphereRule, gauss_legendre, sphere_rule, tensor_integrate
from .witness import (
    Witness,
    WitnessKind,
    antipodal_witness,
    band_limited_from_block_vector,
    block_quadratic_form,
    discretize_negative_direction,
    expansion_quadratic_form,
    hemisphere_nullspace_witness,
    quadratic_form,
    witness_records,
)

__version__ = "0.1.0"
