"""
End-to-end segmented simulation, the exact-evolution oracle, query
accounting and the operator-norm to channel-norm checks.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import scipy.linalg

from .bessel import CoefficientSet, choose_k, describe as describe_coefficients, lcu_coefficients
from .errors import NumericError, ParameterError, VerificationError
from .hamiltonian import SparseHamiltonian, describe as describe_hamiltonian
from .lcu import LcuAssembly, solve_s_l
from .walk import build_walk_system, walk_parameters, walk_subspace

logger = logging.getLogger(__name__)

STRATEGIES = ("fixed_z", "tradeoff")
FIXED_Z = -0.5
TRADEOFF_Z_CAP = 64.0
QUERIES_PER_WALK_STEP = 2
UNITARITY_TOLERANCE = 1e-10
SEGMENT_SLACK = 1e-12
SEGMENT_NORM_TOLERANCE = 1e-10
DIAMOND_SLACK = 1e-10
LOWER_BOUND_SCAN_LIMIT = 10 ** 6


@dataclass(frozen=True, eq=False)
class SegmentPlan:
    """Segment schedule for one evolution.

    All but the last segment use parameter ``z``; the last one uses
    ``residual_z`` so that (num_segments - 1)|z| + |residual_z| equals the
    total phase t * X * d_pow2.
    """

    t: float
    epsilon: float
    strategy: str
    alpha: float
    X: float
    d_pow2: int
    offset: float
    nu_max: float
    phase: float
    num_segments: int
    per_segment_delta: float
    coefficients: Optional[CoefficientSet] = field(repr=False)
    s: float
    l_iters: int
    residual_coefficients: Optional[CoefficientSet] = field(repr=False)
    residual_s: float
    residual_l: int

    @property
    def z(self) -> float:
        return self.coefficients.z if self.coefficients else FIXED_Z

    @property
    def k(self) -> int:
        return self.coefficients.k if self.coefficients else 0

    @property
    def residual_z(self) -> float:
        return self.residual_coefficients.z if self.residual_coefficients else 0.0

    @property
    def residual_k(self) -> int:
        return self.residual_coefficients.k if self.residual_coefficients else 0

    @property
    def query_count(self) -> int:
        return count_queries(self)

    def total_phase(self) -> float:
        if self.num_segments == 0:
            return 0.0
        return (self.num_segments - 1) * abs(self.z) + abs(self.residual_z)


def _encoded_norm(H: SparseHamiltonian, offset: float) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(H.entries + offset * np.eye(H.N)))))


def _segment_schedule(z: float, delta: float, nu_max: float):
    k = choose_k(z, delta, nu_max)
    coefficients = lcu_coefficients(z, k, nu_max)
    s, l_iters = solve_s_l(coefficients.abs_sum)
    return coefficients, s, l_iters


def plan_segments(
    H: SparseHamiltonian,
    t: float,
    epsilon: float,
    strategy: str = "fixed_z",
    alpha: float = 1.0,
    X: Optional[float] = None,
) -> SegmentPlan:
    """Split evolution time t into segments and size each one for budget epsilon.

    ``fixed_z`` uses z = -1/2 (so a < 2 and s = 2); ``tradeoff`` uses
    |z| = min(tau^alpha, 64, tau) with tau the total phase.
    """
    if strategy not in STRATEGIES:
        raise ParameterError(f"Unknown strategy {strategy!r}")
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    if strategy == "tradeoff" and not 0 <= alpha <= 1:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")

    X, d_pow2, offset = walk_parameters(H, X)
    nu_max = min(1.0, _encoded_norm(H, offset) / (X * d_pow2))
    phase = t * X * d_pow2
    common = dict(
        t=float(t),
        epsilon=float(epsilon),
        strategy=strategy,
        alpha=float(alpha) if strategy == "tradeoff" else 0.0,
        X=X,
        d_pow2=d_pow2,
        offset=offset,
        nu_max=nu_max,
        phase=phase,
    )
    if phase == 0:
        return SegmentPlan(
            num_segments=0,
            per_segment_delta=float(epsilon),
            coefficients=None,
            s=1.0,
            l_iters=0,
            residual_coefficients=None,
            residual_s=1.0,
            residual_l=0,
            **common,
        )

    if strategy == "fixed_z":
        magnitude = abs(FIXED_Z)
    else:
        magnitude = min(phase ** alpha, TRADEOFF_Z_CAP, phase)
    num_segments = max(1, int(math.ceil(phase / magnitude - SEGMENT_SLACK)))
    residual = phase - (num_segments - 1) * magnitude
    delta = epsilon / num_segments

    coefficients, s, l_iters = _segment_schedule(-magnitude, delta, nu_max)
    if abs(residual - magnitude) <= SEGMENT_SLACK * max(1.0, magnitude):
        residual_coefficients, residual_s, residual_l = coefficients, s, l_iters
    else:
        residual_coefficients, residual_s, residual_l = _segment_schedule(-residual, delta, nu_max)

    logger.debug(
        "plan %s: phase=%.6g segments=%d delta=%.3e %s s=%.6g l=%d",
        strategy,
        phase,
        num_segments,
        delta,
        describe_coefficients(coefficients),
        s,
        l_iters,
    )
    return SegmentPlan(
        num_segments=num_segments,
        per_segment_delta=delta,
        coefficients=coefficients,
        s=s,
        l_iters=l_iters,
        residual_coefficients=residual_coefficients,
        residual_s=residual_s,
        residual_l=residual_l,
        **common,
    )


def count_queries(plan: SegmentPlan) -> int:
    """Controlled-U plus controlled-U^dag applications.

    Each W or W^dag costs one select (k of each), and R^l W holds 2l + 1 of them.
    """
    if plan.num_segments == 0:
        return 0
    full = (plan.num_segments - 1) * (2 * plan.l_iters + 1) * 2 * plan.k
    last = (2 * plan.residual_l + 1) * 2 * plan.residual_k
    return full + last


def exact_evolution(H, t: float) -> np.ndarray:
    """e^{-iHt} via the Hermitian eigendecomposition."""
    matrix = H.entries if isinstance(H, SparseHamiltonian) else np.asarray(H, dtype=complex)
    try:
        values, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"eigensolver failed: {e}") from e
    evolution = (vectors * np.exp(-1j * values * t)) @ vectors.conj().T
    residual = np.linalg.norm(evolution.conj().T @ evolution - np.eye(len(values)), 2)
    if residual > UNITARITY_TOLERANCE:
        raise NumericError(f"exact evolution is not unitary (residual {residual:.3e})")
    return evolution


def spectral_distance(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.linalg.norm(A - B, 2))


@dataclass
class SimulationReport:
    plan: SegmentPlan
    effective_unitary: np.ndarray = field(repr=False)
    exact_unitary: np.ndarray = field(repr=False)
    spectral_error: float
    success_amplitude_deficit: float
    queries: int
    oracle_queries: int
    wall_time: float
    segment_error: float = 0.0
    segment_bound: float = 0.0
    amplification_error: float = 0.0
    leakage_ratio: float = 0.0
    segment_norm: float = 1.0
    parity_fidelity: Optional[float] = None
    instance: Dict = field(default_factory=dict)

    @property
    def diamond_bound(self) -> float:
        return 2.0 * self.spectral_error

    @property
    def channel_bound(self) -> float:
        return 4.0 * self.spectral_error

    def fidelity(self, start: np.ndarray, target: np.ndarray) -> float:
        """|<target| E |start>|^2 for the effective operator E."""
        return float(abs(np.vdot(target, self.effective_unitary @ start)) ** 2)

    def to_json(self) -> Dict:
        plan = self.plan
        data = {
            "params": {
                "t": plan.t,
                "epsilon": plan.epsilon,
                "strategy": plan.strategy,
                "alpha": plan.alpha,
                "X": plan.X,
                "d_pow2": plan.d_pow2,
                "offset": plan.offset,
                **self.instance,
            },
            "spectral_error": self.spectral_error,
            "diamond_bound": self.diamond_bound,
            "channel_bound": self.channel_bound,
            "queries": self.queries,
            "oracle_queries": self.oracle_queries,
            "segments": plan.num_segments,
            "k": plan.k,
            "s": plan.s,
            "l": plan.l_iters,
            "residual_z": plan.residual_z,
            "success_amplitude_deficit": self.success_amplitude_deficit,
            "segment_error": self.segment_error,
            "segment_bound": self.segment_bound,
            "amplification_error": self.amplification_error,
            "leakage_ratio": self.leakage_ratio,
            "segment_norm": self.segment_norm,
            "wall_ms": self.wall_time * 1000.0,
        }
        if self.parity_fidelity is not None:
            data["parity_fidelity"] = self.parity_fidelity
        return data


def run(H: SparseHamiltonian, plan: SegmentPlan, X: Optional[float] = None) -> SimulationReport:
    """Compose the amplified segments on the walk subspace and compare with e^{-iHt}."""
    if X is not None and abs(X - plan.X) > 1e-12 * max(1.0, plan.X):
        raise ParameterError(f"X={X} does not match the plan's X={plan.X}")
    started = time.perf_counter()
    exact = exact_evolution(H, plan.t)

    if plan.num_segments == 0:
        effective = np.eye(H.N, dtype=complex)
        segment_error = segment_bound = amplification_error = 0.0
        segment_norm = 1.0
    else:
        ws = build_walk_system(H, plan.X)
        subspace = walk_subspace(ws)
        inputs = subspace.isometry[:, 0::2]

        main = LcuAssembly.from_unitary(subspace.unitary, plan.coefficients)
        amplified = main.amplified()
        segment = amplified.effective
        segment_norm = amplified.norm
        if plan.residual_coefficients is plan.coefficients:
            last = segment
        else:
            residual = LcuAssembly.from_unitary(subspace.unitary, plan.residual_coefficients).amplified()
            last = residual.effective
            segment_norm = max(segment_norm, residual.norm)
        if segment_norm > 1.0 + SEGMENT_NORM_TOLERANCE:
            raise VerificationError(
                f"amplified segment has norm {segment_norm:.12g} > 1", invariant="segment contraction"
            )

        state = np.linalg.matrix_power(segment, plan.num_segments - 1) @ inputs
        state = last @ state
        effective = inputs.conj().T @ state * np.exp(1j * plan.offset * plan.t)

        generator = 0.5 * (subspace.unitary - subspace.unitary.conj().T)
        ideal = scipy.linalg.expm(plan.z * generator)
        combination = main.combination()
        segment_error = spectral_distance(combination @ inputs, ideal @ inputs)
        amplification_error = spectral_distance(segment @ inputs, combination @ inputs)
        segment_bound = plan.coefficients.bound

    wall_time = time.perf_counter() - started
    spectral_error = spectral_distance(effective, exact)
    smallest = float(np.linalg.svd(effective, compute_uv=False).min())
    deficit = math.sqrt(max(0.0, 1.0 - smallest ** 2))
    budget = plan.per_segment_delta * plan.num_segments
    queries = count_queries(plan)

    report = SimulationReport(
        plan=plan,
        effective_unitary=effective,
        exact_unitary=exact,
        spectral_error=spectral_error,
        success_amplitude_deficit=deficit,
        queries=queries,
        oracle_queries=QUERIES_PER_WALK_STEP * queries,
        wall_time=wall_time,
        segment_error=segment_error,
        segment_bound=segment_bound,
        amplification_error=amplification_error,
        leakage_ratio=deficit / budget if budget > 0 else 0.0,
        segment_norm=segment_norm,
        instance=describe_hamiltonian(H),
    )
    logger.info(
        "run t=%.6g segments=%d queries=%d spectral_error=%.3e (%.1f ms)",
        plan.t,
        plan.num_segments,
        queries,
        spectral_error,
        wall_time * 1000.0,
    )
    return report


def simulate(
    H: SparseHamiltonian,
    t: float,
    epsilon: float,
    strategy: str = "fixed_z",
    alpha: float = 1.0,
    X: Optional[float] = None,
) -> SimulationReport:
    """plan_segments followed by run."""
    return run(H, plan_segments(H, t, epsilon, strategy, alpha, X))


def _trace_norm_difference(a: np.ndarray, b: np.ndarray) -> float:
    """||aa^dag - bb^dag||_1 for vectors a, b.

    The rank-two difference has eigenvalues of opposite sign, so the trace
    norm is sqrt((|a|^2 - |b|^2)^2 + 4 |a|^2 |b_perp|^2) with b_perp the
    part of b orthogonal to a.
    """
    norm_a = float(np.vdot(a, a).real)
    norm_b = float(np.vdot(b, b).real)
    if norm_a == 0.0:
        return norm_b
    perp = b - a * (np.vdot(a, b) / norm_a)
    return math.sqrt((norm_a - norm_b) ** 2 + 4.0 * norm_a * float(np.vdot(perp, perp).real))


def diamond_bound_check(U: np.ndarray, V: np.ndarray, trials: int = 200, seed: int = 0) -> float:
    """Largest sampled ratio of trace distance to 2||U - V||.

    States are random pure states on system (x) reference.
    """
    for name, op in (("U", U), ("V", V)):
        if np.linalg.norm(op, 2) > 1.0 + DIAMOND_SLACK:
            raise ParameterError(f"{name} is not a contraction")
    dim = U.shape[0]
    bound = 2.0 * spectral_distance(U, V)
    rng = np.random.Generator(np.random.PCG64(seed))
    worst = 0.0
    for _ in range(trials):
        psi = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        psi /= np.linalg.norm(psi)
        distance = _trace_norm_difference((U @ psi).ravel(), (V @ psi).ravel())
        if distance > bound + DIAMOND_SLACK:
            raise VerificationError(
                f"trace distance {distance:.6e} exceeds 2||U-V|| = {bound:.6e}",
                invariant="diamond bound",
                seed=seed,
            )
        if bound > 0:
            worst = max(worst, distance / bound)
    return worst


def combined_lower_bound(t: float, d: float, epsilon: float, limit: int = LOWER_BOUND_SCAN_LIMIT) -> int:
    """Largest N with epsilon < |sin(td/N)|^N / 2, or 0."""
    if not (t > 0 and d > 0):
        raise ParameterError("t and d must be positive")
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if epsilon >= 0.5:
        return 0
    td = t * d
    turning = 2.0 * td / math.pi
    best = 0
    for N in range(1, limit + 1):
        if epsilon < 0.5 * abs(math.sin(td / N)) ** N:
            best = N
        elif N >= turning:
            break
    return best
