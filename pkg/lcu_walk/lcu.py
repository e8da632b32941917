"""
Linear combination of walk powers as a block encoding, and oblivious
amplitude amplification of that block.

Register layout on the ancilla side: index f * M + (m + k) with the flag
qubit f outermost and the M = 2k + 1 valued selector next; the system
register is innermost. The projector P selects ancilla index 0.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev, polynomial

from .errors import ParameterError

logger = logging.getLogger(__name__)

SINE_TOLERANCE = 1e-12
S_TOLERANCE = 1e-12
L_SEARCH_LIMIT = 10000


def walk_powers(U: np.ndarray, k: int) -> np.ndarray:
    """Stack of U^m for m = -k..k (negative powers via U^dag)."""
    dim = U.shape[0]
    powers = np.empty((2 * k + 1, dim, dim), dtype=complex)
    powers[k] = np.eye(dim)
    for m in range(1, k + 1):
        powers[k + m] = U @ powers[k + m - 1]
        powers[k - m] = powers[k + m].conj().T
    return powers


def build_select(U: np.ndarray, k: int) -> np.ndarray:
    """Block-diagonal sum_m |m><m| (x) U^m, blocks ordered m = -k..k."""
    return scipy.linalg.block_diag(*walk_powers(U, k))


def flag_rotation(c: float) -> np.ndarray:
    """Real rotation with first column (sqrt(c), sqrt(1-c))."""
    cos, sin = math.sqrt(c), math.sqrt(max(0.0, 1.0 - c))
    return np.array([[cos, -sin], [sin, cos]])


def unflag_rotation(c: float) -> np.ndarray:
    """Real rotation whose (0, 0) entry is c."""
    sin = math.sqrt(max(0.0, 1.0 - c * c))
    return np.array([[c, -sin], [sin, c]])


def selector_unitary(amplitudes: np.ndarray) -> np.ndarray:
    """Unitary G with G[:, 0] = amplitudes (unit vector)."""
    rest = scipy.linalg.null_space(amplitudes.conj()[np.newaxis, :])
    return np.column_stack([amplitudes, rest])


@dataclass(frozen=True, eq=False)
class Preparation:
    """State preparation B = R_flag (x) G with B|00> = |chi>.

    ``unprepare`` is the matching uncompute, (F R_flag^dag) (x) G^T, where F
    has <0|F|0> = a / s. Using G^T rather than G^dag keeps the sign of every
    a_m in the encoded block.
    """

    coefficients: object
    s: float
    amplitudes: np.ndarray
    selector: np.ndarray
    flag: np.ndarray
    unflag: np.ndarray

    @property
    def M(self) -> int:
        return len(self.amplitudes)

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.kron(self.flag, self.selector)

    @cached_property
    def unprepare(self) -> np.ndarray:
        return np.kron(self.unflag @ self.flag.conj().T, self.selector.T)

    @property
    def state(self) -> np.ndarray:
        """|chi> = B|00>."""
        return self.matrix[:, 0]


def build_prep(coefficients, s: float) -> Preparation:
    """Preparation for the coefficient set; sqrt(a_m) is the principal branch."""
    a = coefficients.abs_sum
    if s < a - S_TOLERANCE:
        raise ParameterError(f"s={s} is below the coefficient sum a={a}")
    amplitudes = np.sqrt(coefficients.a.astype(complex)) / math.sqrt(a)
    ratio = min(1.0, a / s)
    return Preparation(
        coefficients=coefficients,
        s=float(s),
        amplitudes=amplitudes,
        selector=selector_unitary(amplitudes),
        flag=flag_rotation(ratio),
        unflag=unflag_rotation(ratio),
    )


def build_W(prep: Preparation, select: np.ndarray) -> np.ndarray:
    """W = (L (x) 1) (1_flag (x) select) (B (x) 1); PWP = (1/s) |00><00| (x) sum a_m U^m."""
    system_dim = select.shape[0] // prep.M
    identity = np.eye(system_dim)
    flagged = np.kron(np.eye(2), select)
    return np.kron(prep.unprepare, identity) @ flagged @ np.kron(prep.matrix, identity)


def projector(ancilla_dim: int, system_dim: int) -> np.ndarray:
    """|0><0|_ancilla (x) 1_system."""
    P = np.zeros((ancilla_dim * system_dim, ancilla_dim * system_dim))
    P[:system_dim, :system_dim] = np.eye(system_dim)
    return P


def amplification_step(W: np.ndarray, P: np.ndarray) -> np.ndarray:
    """R = -W(1-2P)W^dag(1-2P)."""
    reflect = np.eye(P.shape[0]) - 2.0 * P
    return -W @ reflect @ W.conj().T @ reflect


def sine_condition_residual(s: float, l_iters: int) -> float:
    return abs(math.sin(math.pi / (2 * (2 * l_iters + 1))) - 1.0 / s)


def solve_s_l(a: float) -> Tuple[float, int]:
    """Smallest l with s(l) = 1/sin(pi/(2(2l+1))) >= a; returns (s(l), l)."""
    for l_iters in range(L_SEARCH_LIMIT):
        s = 1.0 / math.sin(math.pi / (2 * (2 * l_iters + 1)))
        if s >= a - S_TOLERANCE:
            return s, l_iters
    raise ParameterError(f"no amplification schedule reaches a={a}")


@dataclass
class SegmentOperator:
    """System block of P R^l W P."""

    effective: np.ndarray
    l_iters: int
    s: Optional[float] = None
    k: Optional[int] = None
    coefficients: object = None
    delta_cert: Optional[float] = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.effective, 2))


def _system_dim(P: np.ndarray) -> int:
    return int(round(float(np.trace(P).real)))


def amplified_block(W: np.ndarray, P: np.ndarray, l_iters: int, s: Optional[float] = None) -> SegmentOperator:
    """Apply R^l to WP and extract the projected block.

    When ``s`` is given the sine condition sin(pi/(2(2l+1))) = 1/s is enforced.
    """
    if s is not None and sine_condition_residual(s, l_iters) > SINE_TOLERANCE:
        raise ParameterError(f"s={s} and l={l_iters} violate the sine condition")
    dim = _system_dim(P)
    R = amplification_step(W, P)
    state = W[:, :dim]
    for _ in range(l_iters):
        state = R @ state
    return SegmentOperator(effective=state[:dim].copy(), l_iters=l_iters, s=s)


def _odd_chebyshev_over_y(m: int) -> np.ndarray:
    """Power-basis coefficients of p with p(y^2) = T_{2m+1}(y) / y."""
    series = np.zeros(2 * m + 2)
    series[-1] = 1.0
    power = chebyshev.cheb2poly(series)
    return power[1::2]


def _hermitian_function(matrix: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(matrix)
    values = np.clip(values, 0.0, 1.0)
    mapped = polynomial.polyval(values, coeffs)
    return (vectors * mapped) @ vectors.conj().T


def chebyshev_formula_check(W: np.ndarray, P: np.ndarray, m_max: int) -> float:
    """Max spectral-norm gap between R^m W P and its Chebyshev closed form, m = 0..m_max."""
    if m_max > 5:
        raise ParameterError(f"m_max={m_max} exceeds 5")
    dim = _system_dim(P)
    R = amplification_step(W, P)
    WP = W[:, :dim]
    Z = np.zeros_like(WP)
    Z[:dim] = WP[:dim]
    gram = Z.conj().T @ Z
    identity = np.eye(dim)

    worst = 0.0
    direct = WP
    for m in range(m_max + 1):
        coeffs = _odd_chebyshev_over_y(m)
        closed = (WP - Z) @ _hermitian_function(identity - gram, coeffs)
        closed = closed + (-1) ** m * Z @ _hermitian_function(gram, coeffs)
        worst = max(worst, float(np.linalg.norm(direct - closed, 2)))
        direct = R @ direct
    return worst


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(matrix)
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def block_encode_contraction(V: np.ndarray, s: float) -> np.ndarray:
    """Unitary dilation [[Z, sqrt(1-ZZ^dag)], [sqrt(1-Z^dag Z), -Z^dag]] of Z = V/s."""
    Z = np.asarray(V, dtype=complex) / s
    if np.linalg.norm(Z, 2) > 1.0 + 1e-12:
        raise ParameterError(f"V/s is not a contraction (s={s})")
    identity = np.eye(Z.shape[0])
    top = np.hstack([Z, _psd_sqrt(identity - Z @ Z.conj().T)])
    bottom = np.hstack([_psd_sqrt(identity - Z.conj().T @ Z), -Z.conj().T])
    return np.vstack([top, bottom])


@dataclass(frozen=True, eq=False)
class LcuAssembly:
    """Block encoding of sum a_m U^m applied without forming W densely.

    ``powers`` is the stack U^{-k..k} on the system space.
    """

    coefficients: object
    powers: np.ndarray = field(repr=False)
    s: float
    l_iters: int

    @classmethod
    def from_unitary(cls, U: np.ndarray, coefficients, s: Optional[float] = None) -> "LcuAssembly":
        if s is None:
            s, l_iters = solve_s_l(coefficients.abs_sum)
        else:
            l_iters = solve_s_l(s)[1]
            if sine_condition_residual(s, l_iters) > SINE_TOLERANCE:
                raise ParameterError(f"s={s} is not on the amplification lattice (nearest l={l_iters})")
        return cls(coefficients=coefficients, powers=walk_powers(U, coefficients.k), s=s, l_iters=l_iters)

    @property
    def M(self) -> int:
        return self.powers.shape[0]

    @property
    def system_dim(self) -> int:
        return self.powers.shape[1]

    @property
    def ancilla_dim(self) -> int:
        return 2 * self.M

    @cached_property
    def prep(self) -> Preparation:
        return build_prep(self.coefficients, self.s)

    def _split(self, vectors: np.ndarray) -> np.ndarray:
        return vectors.reshape(2, self.M, self.system_dim, -1)

    def _merge(self, blocks: np.ndarray) -> np.ndarray:
        return blocks.reshape(2 * self.M * self.system_dim, -1)

    def apply_w(self, vectors: np.ndarray) -> np.ndarray:
        G = self.prep.selector
        blocks = np.einsum("nm,fmrc->fnrc", G, self._split(vectors))
        blocks = np.matmul(self.powers[np.newaxis], blocks)
        blocks = np.einsum("mn,fmrc->fnrc", G, blocks)
        blocks = np.einsum("gf,fmrc->gmrc", self.prep.unflag, blocks)
        return self._merge(blocks)

    def apply_w_dag(self, vectors: np.ndarray) -> np.ndarray:
        G = self.prep.selector
        adjoint_powers = np.conj(np.swapaxes(self.powers, 1, 2))
        blocks = np.einsum("gf,gmrc->fmrc", self.prep.unflag, self._split(vectors))
        blocks = np.einsum("nm,fmrc->fnrc", G.conj(), blocks)
        blocks = np.matmul(adjoint_powers[np.newaxis], blocks)
        blocks = np.einsum("mn,fmrc->fnrc", G.conj(), blocks)
        return self._merge(blocks)

    def _reflect(self, vectors: np.ndarray) -> np.ndarray:
        reflected = np.array(vectors)
        reflected[: self.system_dim] *= -1.0
        return reflected

    def apply_r(self, vectors: np.ndarray) -> np.ndarray:
        """R = -W(1-2P)W^dag(1-2P)."""
        return -self.apply_w(self._reflect(self.apply_w_dag(self._reflect(vectors))))

    def _embedded_identity(self) -> np.ndarray:
        embedded = np.zeros((2 * self.M * self.system_dim, self.system_dim), dtype=complex)
        embedded[: self.system_dim] = np.eye(self.system_dim)
        return embedded

    def block(self) -> np.ndarray:
        """System block of PWP, equal to sum a_m U^m / s."""
        return self.apply_w(self._embedded_identity())[: self.system_dim]

    def combination(self) -> np.ndarray:
        """sum a_m U^m computed directly."""
        return np.tensordot(self.coefficients.a, self.powers, axes=1)

    def amplified(self) -> SegmentOperator:
        state = self.apply_w(self._embedded_identity())
        for _ in range(self.l_iters):
            state = self.apply_r(state)
        return SegmentOperator(
            effective=state[: self.system_dim].copy(),
            l_iters=self.l_iters,
            s=self.s,
            k=self.coefficients.k,
            coefficients=self.coefficients,
            delta_cert=self.coefficients.bound,
        )

    @cached_property
    def W(self) -> np.ndarray:
        """Dense W (small systems only)."""
        return build_W(self.prep, scipy.linalg.block_diag(*self.powers))

    @cached_property
    def P(self) -> np.ndarray:
        return projector(self.ancilla_dim, self.system_dim)
