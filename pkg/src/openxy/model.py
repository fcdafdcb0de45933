"""Chain/bath parameters and the quadratic-form structure matrix.

A boundary-driven XY chain with n sites maps, through the Jordan-Wigner
transformation and the operator-space (superoperator) formalism, onto a
quadratic form in 4n Hermitian adjoint fermions.  All steady-state
physics derives from the antisymmetric complex matrix ``A`` of that
form, assembled here in a 4x4 block-tridiagonal layout (one block per
site):

    A[l, l]   = -2 h R(0) + [l == 1] B(G1L, G2L) + [l == n] B(G1R, G2R)
    A[l, l+1] = R(gamma)
    A[l, l-1] = -R(gamma)^T

with the hopping and bath blocks

    R(gamma) = I_2 (x) (i sy - gamma sx) / 2
    B(G1,G2) = -(G2 + G1)/2 sy (x) I_2  +  (G2 - G1)/2 (sz + i sx) (x) sy

where (x) is the Kronecker product (left factor indexes the slower
axis), sx/sy/sz are the Pauli matrices, and G1/G2 are the lowering and
raising jump rates of the bath attached to the respective edge site.
Both R and B are antisymmetric, so A is antisymmetric by construction.

Conventions fixed here and relied on everywhere else:

- Pauli matrices: sx = [[0,1],[1,0]], sy = [[0,-i],[i,0]],
  sz = [[1,0],[0,-1]]; raising/lowering s+- = (sx +- i sy)/2.
- Majorana (Jordan-Wigner) operators: w_{2m-1} = sz^(m-1) sx_m,
  w_{2m} = sz^(m-1) sy_m, ordered w_1, w_2, ..., w_{2n}.
- Row index p of A corresponds to the Hermitian adjoint fermion a_p;
  the site-l group is rows/columns 4(l-1)..4l-1 (0-based).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
SPLUS = (SX + 1.0j * SY) / 2.0
SMINUS = (SX - 1.0j * SY) / 2.0


class InvalidSpecError(ValueError):
    """Raised when chain parameters are unusable (bad n, negative rates, ...)."""


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of one boundary-driven XY chain.

    Attributes
    ----------
    n : int
        Number of sites (>= 2).
    gamma : float
        XY anisotropy; gamma = 1 is the transverse Ising limit and
        gamma = 0 the isotropic XX chain.
    h : float
        Uniform transverse magnetic field.
    gl1, gl2 : float
        Left-bath lowering (s-) and raising (s+) jump rates.
    gr1, gr2 : float
        Right-bath lowering and raising jump rates.
    """

    n: int
    gamma: float
    h: float
    gl1: float
    gl2: float
    gr1: float
    gr2: float

    @property
    def rates(self) -> tuple[float, float, float, float]:
        return (self.gl1, self.gl2, self.gr1, self.gr2)

    def label(self) -> str:
        """Compact human-readable tag, used in filenames and manifests."""
        return (
            f"n{self.n}_g{self.gamma:g}_h{self.h:g}"
            f"_L{self.gl1:g},{self.gl2:g}_R{self.gr1:g},{self.gr2:g}"
        )


def validate_spec(spec: ChainSpec, require_dissipation: bool = True) -> ChainSpec:
    """Check a :class:`ChainSpec` and return it unchanged.

    The first violated requirement is reported by name.  With
    ``require_dissipation=False`` the all-rates-zero case is allowed;
    matrix assembly uses that relaxed form so purely unitary chains can
    still be built and studied (they have no unique steady state, which
    downstream operations flag on their own terms).

    Raises
    ------
    InvalidSpecError
        "n < 2" if the chain is too short or n is not an integer;
        "negative rate" for any jump rate below zero; non-finite
        parameters; "no dissipation" when every rate is zero.
    """
    if not isinstance(spec.n, (int, np.integer)) or isinstance(spec.n, bool):
        raise InvalidSpecError(f"n < 2: n must be an integer >= 2, got {spec.n!r}")
    if spec.n < 2:
        raise InvalidSpecError(f"n < 2: got n = {spec.n}")
    for name in ("gamma", "h", "gl1", "gl2", "gr1", "gr2"):
        value = getattr(spec, name)
        if not math.isfinite(value):
            raise InvalidSpecError(f"{name} must be finite, got {value!r}")
    for name in ("gl1", "gl2", "gr1", "gr2"):
        if getattr(spec, name) < 0:
            raise InvalidSpecError(
                f"negative rate: {name} = {getattr(spec, name)}"
            )
    if require_dissipation and all(r == 0.0 for r in spec.rates):
        raise InvalidSpecError("no dissipation: all four bath rates are zero")
    return spec


def coupling_block(gamma: float) -> np.ndarray:
    """Nearest-neighbour 4x4 block R(gamma) = I_2 (x) (i sy - gamma sx)/2."""
    return np.kron(ID2, (1.0j * SY - gamma * SX) / 2.0)


def bath_block(g1: float, g2: float) -> np.ndarray:
    """Edge-site bath block B for lowering rate g1 and raising rate g2."""
    return (
        -(g2 + g1) / 2.0 * np.kron(SY, ID2)
        + (g2 - g1) / 2.0 * np.kron(SZ + 1.0j * SX, SY)
    )


def field_block(h: float) -> np.ndarray:
    """On-site field block -2h R(0) = -h I_2 (x) i sy."""
    return -2.0 * h * coupling_block(0.0)


@dataclass(frozen=True)
class StructureMatrix:
    """Antisymmetric quadratic-form matrix of the driven chain.

    Attributes
    ----------
    spec : ChainSpec
        Parameters the matrix was built from.
    a : numpy.ndarray
        Complex (4n, 4n) antisymmetric array, dense storage.
    """

    spec: ChainSpec
    a: np.ndarray

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def dim(self) -> int:
        return self.a.shape[0]


def build_structure_matrix(spec: ChainSpec) -> StructureMatrix:
    """Assemble the 4n x 4n structure matrix for a chain spec.

    The returned matrix is exactly antisymmetric: the sub-diagonal
    blocks are written as the negative transpose of the super-diagonal
    ones, and the diagonal blocks are antisymmetric by construction.

    Raises
    ------
    InvalidSpecError
        Propagated from :func:`validate_spec` (relaxed form: a chain
        with all rates zero is permitted here).
    """
    validate_spec(spec, require_dissipation=False)
    n = spec.n
    a = np.zeros((4 * n, 4 * n), dtype=complex)

    hop = coupling_block(spec.gamma)
    onsite = field_block(spec.h)
    for l in range(n):
        block = onsite.copy()
        if l == 0:
            block += bath_block(spec.gl1, spec.gl2)
        if l == n - 1:
            block += bath_block(spec.gr1, spec.gr2)
        a[4 * l : 4 * l + 4, 4 * l : 4 * l + 4] = block
        if l + 1 < n:
            a[4 * l : 4 * l + 4, 4 * l + 4 : 4 * l + 8] = hop
            a[4 * l + 4 : 4 * l + 8, 4 * l : 4 * l + 4] = -hop.T

    return StructureMatrix(spec=spec, a=a)


def antisymmetry_residual(a: np.ndarray) -> float:
    """Max-abs residual of A + A^T, normalized by max-abs of A."""
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a + a.T))) / scale
