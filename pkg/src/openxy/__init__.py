"""Steady states of the boundary-driven XY spin-1/2 chain.

The chain

    H = sum_m [ (1+gamma)/2 sx_m sx_{m+1} + (1-gamma)/2 sy_m sy_{m+1} ]
        + h sum_m sz_m

is coupled to Markovian baths acting on its first and last site through
spin raising/lowering jump operators.  Because the weak-coupling master
equation is quadratic in Majorana fermions, the full many-body steady
state is encoded in a single 4n x 4n antisymmetric structure matrix.
This package builds that matrix, extracts its normal-mode rapidities and
eigenvectors, and evaluates steady-state observables (magnetization
profiles, two-point and higher Majorana moments, spin-spin correlations,
operator-space entanglement entropy) from them.

Layout:

- ``model``       chain/bath parameter container and the structure matrix
- ``spectral``    rapidity spectrum, normal-mode basis, relaxation gap
- ``observables`` two-point table, correlators, magnetization, moments
- ``osee``        operator-space entanglement entropy of the steady state
- ``theory``      closed-form dispersion, critical field, correlation length
- ``oracle``      brute-force superoperator reference for small chains
- ``analysis``    decay fits and finite-size collapse diagnostics
- ``sweep``       parameter grids, size scans, result serialization
- ``cli``         command-line entry point (``openxy``)
"""

__version__ = "0.1.0"

from .analysis import (CollapseResult, FitResult, collapse_check,
                       fit_exponential, fit_linear, fit_power)
from .model import (ChainSpec, InvalidSpecError, StructureMatrix,
                    build_structure_matrix, validate_spec)
from .observables import (CorrelationMatrix, ObservablesError, TwoPointTable,
                          distance_profile, magnetization, majorana_moment,
                          pfaffian, residual_correlator, spin_spin_matrix,
                          two_point_table)
from .osee import OseeError, OseeResult, OseeScaling, osee, osee_scaling
from .spectral import (BilinearDegeneracyError, NormalModeBasis, PairingError,
                       SpectralError, diagonalize, relaxation_gap)
from .sweep import Axis, SweepConfig, SweepResult, run_size_scan, run_sweep
from .theory import TheoryPoint, dispersion, theory_point

__all__ = [
    "__version__",
    "ChainSpec",
    "InvalidSpecError",
    "StructureMatrix",
    "build_structure_matrix",
    "validate_spec",
    "NormalModeBasis",
    "SpectralError",
    "PairingError",
    "BilinearDegeneracyError",
    "diagonalize",
    "relaxation_gap",
    "TwoPointTable",
    "CorrelationMatrix",
    "ObservablesError",
    "two_point_table",
    "magnetization",
    "spin_spin_matrix",
    "majorana_moment",
    "pfaffian",
    "distance_profile",
    "residual_correlator",
    "OseeError",
    "OseeResult",
    "OseeScaling",
    "osee",
    "osee_scaling",
    "TheoryPoint",
    "dispersion",
    "theory_point",
    "FitResult",
    "CollapseResult",
    "fit_power",
    "fit_exponential",
    "fit_linear",
    "collapse_check",
    "Axis",
    "SweepConfig",
    "SweepResult",
    "run_sweep",
    "run_size_scan",
]
