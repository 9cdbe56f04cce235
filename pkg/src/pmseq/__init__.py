"""Strong lambda-statistical convergence of sequences in finite probabilistic metric spaces.

Modules:

- :mod:`pmseq.distfn` step distribution functions and the modified Levy metric
- :mod:`pmseq.triangle` t-norms and triangle functions on D+
- :mod:`pmseq.pmspace` finite PM spaces, axioms, strong neighborhoods
- :mod:`pmseq.density` lambda sequences, symbolic index sets, lambda-density
- :mod:`pmseq.analysis` convergence, Cauchyness, limit and cluster points
- :mod:`pmseq.harness` generators and the verification suite
"""

from .analysis import (
    Pattern,
    SymbolicSequence,
    check_cauchy,
    check_convergence,
    extract_full_density_subsequence,
    find_limit,
    point_sets,
)
from .density import CEIL_SQRT, HALF, IDENTITY, LambdaSeq, classify_null, validate_lambda
from .distfn import EPS0, StepDistFn, distance_to_eps0, levy_distance, unit_step
from .pmspace import PMSpace, build_equilateral, build_simple, verify_axioms
from .triangle import TAU_LUK, TAU_MIN, TAU_PROD, TriangleFn

__version__ = "0.1.0"

__all__ = [
    "CEIL_SQRT",
    "EPS0",
    "HALF",
    "IDENTITY",
    "LambdaSeq",
    "PMSpace",
    "Pattern",
    "StepDistFn",
    "SymbolicSequence",
    "TAU_LUK",
    "TAU_MIN",
    "TAU_PROD",
    "TriangleFn",
    "build_equilateral",
    "build_simple",
    "check_cauchy",
    "check_convergence",
    "classify_null",
    "distance_to_eps0",
    "extract_full_density_subsequence",
    "find_limit",
    "levy_distance",
    "point_sets",
    "unit_step",
    "validate_lambda",
    "verify_axioms",
]
