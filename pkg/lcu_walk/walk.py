"""
Quantum-walk operators on the doubled space.

The small space holds a system index j and one ancilla bit b at index
2*j + b (dimension 2N). The big space is two copies of it, index
small1 * dim_small + small2. ``T`` maps the small space into the big one,
``S`` swaps the copies and ``U = iS(2TT^dag - 1)`` is one walk step.

Entries are encoded for A = H + offset * I with offset = max(0, -min H_jj):
the isometry can only reproduce nonnegative diagonal entries.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .errors import ParameterError, VerificationError
from .hamiltonian import SparseHamiltonian
from .lcu import walk_powers

logger = logging.getLogger(__name__)

DENSE_EIG_LIMIT = 1024
SPECTRAL_TOLERANCE = 1e-9
X_TOLERANCE = 1e-12


def next_power_of_two(value: int) -> int:
    return 1 << max(0, (value - 1).bit_length())


def diagonal_offset(H: SparseHamiltonian) -> float:
    """Smallest shift making every diagonal entry nonnegative."""
    lowest = float(np.min(np.real(np.diag(H.entries))))
    return max(0.0, -lowest)


def shifted_matrix(H: SparseHamiltonian, offset: float) -> np.ndarray:
    return H.entries + offset * np.eye(H.N)


def walk_parameters(H: SparseHamiltonian, X: Optional[float] = None) -> Tuple[float, int, float]:
    """Return (X, d_pow2, offset) for H.

    X defaults to the max-entry norm of the shifted matrix.
    """
    offset = diagonal_offset(H)
    shifted = shifted_matrix(H, offset)
    a_max = float(np.max(np.abs(shifted)))
    widest = max(int(np.count_nonzero(row)) for row in shifted)
    d_pow2 = next_power_of_two(max(H.d, widest, 1))
    if X is None:
        X = a_max if a_max > 0 else 1.0
    if not X > 0:
        raise ParameterError(f"X must be positive, got {X}")
    if X < a_max * (1 - X_TOLERANCE):
        raise ParameterError(f"X={X} is below the max-entry norm {a_max} of the encoded matrix")
    return float(X), d_pow2, offset


def _slot_amplitude(value: complex, X: float, row: int, col: int) -> complex:
    """sqrt(conj(A_row,col) / X) with the antisymmetric branch on the negative axis."""
    w = complex(value).conjugate() / X
    if w.imag == 0 and w.real < 0:
        root = math.sqrt(-w.real)
        return 1j * root if row < col else -1j * root
    return complex(np.sqrt(w))


def build_isometry(H: SparseHamiltonian, X: Optional[float] = None) -> np.ndarray:
    """Isometry T of shape (dim_big, dim_small).

    Column |j,0> holds |j,0> (x) |phi_j0>, column |j,1> holds |j,1> (x) |0,1>.
    The d_pow2 - |F_j| padding slots point back at j and contribute their
    weight to the |j,1> amplitude of |phi_j0>.
    """
    X, d_pow2, offset = walk_parameters(H, X)
    shifted = shifted_matrix(H, offset)
    dim_small = 2 * H.N
    T = np.zeros((dim_small * dim_small, dim_small), dtype=complex)

    for j in range(H.N):
        occupied = np.flatnonzero(shifted[j])
        phi = np.zeros(dim_small, dtype=complex)
        self_weight = 0.0
        for l in occupied:
            value = shifted[j, l]
            phi[2 * l] = _slot_amplitude(value, X, j, l)
            rest = max(0.0, 1.0 - abs(value) / X)
            if l == j:
                self_weight = rest
            else:
                phi[2 * l + 1] = math.sqrt(rest)
        padding = d_pow2 - len(occupied)
        phi[2 * j + 1] = math.sqrt(self_weight + padding)
        phi /= math.sqrt(d_pow2)

        column = 2 * j
        T[column * dim_small : (column + 1) * dim_small, column] = phi
        column = 2 * j + 1
        T[column * dim_small + 1, column] = 1.0
    return T


def swap_permutation(dim_small: int) -> np.ndarray:
    """perm with (S v)[i] = v[perm[i]]; an involution."""
    index = np.arange(dim_small * dim_small)
    first, second = np.divmod(index, dim_small)
    return second * dim_small + first


def build_swap(dim_small: int) -> np.ndarray:
    """Dense permutation matrix exchanging the two copies of the small space."""
    perm = swap_permutation(dim_small)
    return np.eye(dim_small * dim_small)[perm]


def build_walk(T: np.ndarray, S: np.ndarray) -> np.ndarray:
    """U = iS(2TT^dag - 1)."""
    reflection = 2.0 * (T @ T.conj().T) - np.eye(T.shape[0])
    return 1j * (S @ reflection)


@dataclass(frozen=True, eq=False)
class WalkSystem:
    """Walk operators for one Hamiltonian and scale X.

    The dense ``S`` and ``U`` are built on first access; ``apply_walk``
    works without them.
    """

    H: SparseHamiltonian
    X: float
    d_pow2: int
    offset: float
    T: np.ndarray = field(repr=False)
    swap_perm: np.ndarray = field(repr=False)

    @property
    def dim_small(self) -> int:
        return 2 * self.H.N

    @property
    def dim_big(self) -> int:
        return self.dim_small * self.dim_small

    @cached_property
    def S(self) -> np.ndarray:
        return build_swap(self.dim_small)

    @cached_property
    def U(self) -> np.ndarray:
        return build_walk(self.T, self.S)

    @cached_property
    def encoded_matrix(self) -> np.ndarray:
        """A = H + offset * I."""
        return shifted_matrix(self.H, self.offset)

    @property
    def scale(self) -> float:
        return self.X * self.d_pow2

    def apply_swap(self, vectors: np.ndarray) -> np.ndarray:
        return vectors[self.swap_perm]

    def apply_walk(self, vectors: np.ndarray) -> np.ndarray:
        reflected = 2.0 * (self.T @ (self.T.conj().T @ vectors)) - vectors
        return 1j * self.apply_swap(reflected)

    def pad_ancilla(self, vector: np.ndarray) -> np.ndarray:
        """|v> -> |v>|0> in the small space."""
        padded = np.zeros(self.dim_small, dtype=complex)
        padded[0::2] = vector
        return padded


def build_walk_system(H: SparseHamiltonian, X: Optional[float] = None) -> WalkSystem:
    X, d_pow2, offset = walk_parameters(H, X)
    T = build_isometry(H, X)
    logger.debug("walk system n=%d X=%.6g d_pow2=%d offset=%.6g", H.n, X, d_pow2, offset)
    return WalkSystem(
        H=H,
        X=X,
        d_pow2=d_pow2,
        offset=offset,
        T=T,
        swap_perm=swap_permutation(2 * H.N),
    )


def predicted_eigenvalues(nu: float) -> Tuple[complex, complex]:
    """(mu_plus, mu_minus) = (e^{i arcsin nu}, -e^{-i arcsin nu})."""
    root = math.sqrt(max(0.0, 1.0 - nu * nu))
    return complex(root, nu), complex(-root, nu)


def walk_phases(ws: WalkSystem) -> np.ndarray:
    """arcsin(lambda / (X d)) for every eigenvalue of the encoded matrix."""
    eigenvalues = np.linalg.eigvalsh(ws.encoded_matrix)
    return np.arcsin(np.clip(eigenvalues / ws.scale, -1.0, 1.0))


@dataclass(frozen=True, eq=False)
class WalkSubspace:
    """Orthonormal basis of span{T, ST}, which U leaves invariant."""

    basis: np.ndarray
    unitary: np.ndarray
    isometry: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def walk_subspace(ws: WalkSystem) -> WalkSubspace:
    """Restrict U to span{T, ST} without forming the dense U."""
    basis = scipy.linalg.orth(np.hstack([ws.T, ws.apply_swap(ws.T)]))
    unitary = basis.conj().T @ ws.apply_walk(basis)
    isometry = basis.conj().T @ ws.T
    logger.debug("walk subspace dim=%d of %d", basis.shape[1], ws.dim_big)
    return WalkSubspace(basis=basis, unitary=unitary, isometry=isometry)


def eigenvector_pair(ws: WalkSystem, vector: np.ndarray, nu: float) -> List[Tuple[complex, np.ndarray]]:
    """Eigenpairs (mu, (T + i mu S T)|lambda>') of U for one eigenvector of A.

    At |nu| = 1 both vectors vanish and T|lambda>' (eigenvalue i nu) is used.
    """
    image = ws.T @ ws.pad_ancilla(vector)
    swapped = ws.apply_swap(image)
    pairs = []
    for mu in predicted_eigenvalues(nu):
        candidate = image + 1j * mu * swapped
        norm = np.linalg.norm(candidate)
        if norm < 1e-7:
            pairs.append((complex(0.0, nu), image / np.linalg.norm(image)))
        else:
            pairs.append((mu, candidate / norm))
    return pairs


@dataclass
class SpectralReport:
    max_residual: float
    max_mismatch: float
    eigenvalues: List[float]
    nus: List[float]
    subspace_used: bool

    @property
    def passed(self) -> bool:
        return max(self.max_residual, self.max_mismatch) <= SPECTRAL_TOLERANCE


def spectral_check(ws: WalkSystem, tolerance: float = SPECTRAL_TOLERANCE) -> SpectralReport:
    """Match every predicted mu against spec(U) and check eigenvector residuals.

    Raises VerificationError naming the first eigenvalue outside tolerance.
    """
    lambdas, vectors = np.linalg.eigh(ws.encoded_matrix)
    subspace_used = ws.dim_big > DENSE_EIG_LIMIT
    if subspace_used:
        spectrum = np.linalg.eigvals(walk_subspace(ws).unitary)
    else:
        spectrum = np.linalg.eigvals(ws.U)

    max_residual = 0.0
    max_mismatch = 0.0
    nus = []
    for index, lam in enumerate(lambdas):
        nu = float(np.clip(lam / ws.scale, -1.0, 1.0))
        nus.append(nu)
        for mu in predicted_eigenvalues(nu):
            mismatch = float(np.min(np.abs(spectrum - mu)))
            max_mismatch = max(max_mismatch, mismatch)
            if mismatch > tolerance:
                raise VerificationError(
                    f"eigenvalue lambda={lam - ws.offset:.12g} predicts mu={mu:.12g}, "
                    f"nearest walk eigenvalue is {mismatch:.3e} away",
                    invariant="walk spectrum",
                )
        for mu, vec in eigenvector_pair(ws, vectors[:, index], nu):
            residual = float(np.linalg.norm(ws.apply_walk(vec) - mu * vec))
            max_residual = max(max_residual, residual)
            if residual > tolerance:
                raise VerificationError(
                    f"eigenvalue lambda={lam - ws.offset:.12g}: eigenvector residual {residual:.3e}",
                    invariant="walk eigenvector",
                )

    return SpectralReport(
        max_residual=max_residual,
        max_mismatch=max_mismatch,
        eigenvalues=[float(lam) - ws.offset for lam in lambdas],
        nus=nus,
        subspace_used=subspace_used,
    )


def sector_eigenvalues(ws: WalkSystem, coefficients) -> np.ndarray:
    """Rayleigh quotients of V_k = sum a_m U^m on the paired mu+ / mu- eigenvectors.

    Returns an array of shape (N, 2); column 0 is the mu+ sector.
    """
    subspace = walk_subspace(ws)
    powers = walk_powers(subspace.unitary, coefficients.k)
    combined = np.tensordot(coefficients.a, powers, axes=1)
    lambdas, vectors = np.linalg.eigh(ws.encoded_matrix)
    values = np.zeros((len(lambdas), 2), dtype=complex)
    for index, lam in enumerate(lambdas):
        nu = float(np.clip(lam / ws.scale, -1.0, 1.0))
        for sector, (_, vec) in enumerate(eigenvector_pair(ws, vectors[:, index], nu)):
            local = subspace.basis.conj().T @ vec
            values[index, sector] = np.vdot(local, combined @ local) / np.vdot(local, local)
    return values
