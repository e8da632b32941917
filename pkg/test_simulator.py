import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from lcu_walk.bessel import lcu_coefficients
from lcu_walk.errors import ParameterError, VerificationError
from lcu_walk.hamiltonian import (
    ParitySpec,
    SparseHamiltonian,
    make_blown_up_parity,
    make_parity_path,
    make_random_sparse,
    parity_states,
    parity_time,
)
from lcu_walk.lcu import solve_s_l
from lcu_walk.simulator import (
    combined_lower_bound,
    count_queries,
    diamond_bound_check,
    exact_evolution,
    plan_segments,
    run,
    simulate,
)


def _diag(*values):
    return SparseHamiltonian.from_matrix(np.diag(values))


def test_exact_evolution_zero():
    assert np.allclose(exact_evolution(np.zeros((4, 4)), 3.0), np.eye(4))


def test_exact_evolution_diagonal():
    U = exact_evolution(_diag(1.0, -1.0), math.pi / 2)
    assert np.allclose(U, np.diag([-1j, 1j]), atol=1e-15)


def test_exact_evolution_semigroup():
    H = make_random_sparse(2, 3, 1.0, 1)
    half = exact_evolution(H, 0.35)
    assert np.linalg.norm(half @ half - exact_evolution(H, 0.7), 2) <= 1e-12


def test_zero_time_plan():
    H = make_random_sparse(1, 2, 1.0, 0)
    plan = plan_segments(H, 0.0, 1e-6)
    assert plan.num_segments == 0
    assert count_queries(plan) == 0
    report = run(H, plan)
    assert np.allclose(report.effective_unitary, np.eye(2), atol=1e-10)
    assert report.queries == 0


def test_zero_hamiltonian_is_identity():
    H = SparseHamiltonian.from_matrix(np.zeros((2, 2)), d=1)
    report = simulate(H, 2.0, 1e-6)
    assert np.allclose(report.effective_unitary, np.eye(2), atol=1e-10)


def test_fixed_z_plan():
    H = make_random_sparse(2, 2, 1.0, 3)
    plan = plan_segments(H, 1.0, 1e-8)
    assert plan.z == -0.5
    assert plan.s == pytest.approx(2.0)
    assert plan.l_iters == 1
    assert plan.residual_l == 1
    assert plan.residual_z < 0
    assert plan.total_phase() == pytest.approx(plan.t * plan.X * plan.d_pow2, abs=1e-12)
    assert plan.per_segment_delta * plan.num_segments == pytest.approx(1e-8)


def test_tradeoff_single_segment():
    H = _diag(1.0, 0.0)
    plan = plan_segments(H, 16.0, 1e-6, "tradeoff", 1.0)
    assert plan.phase == 16.0
    assert plan.num_segments == 1
    assert plan.z == -16.0
    assert plan.k >= 16
    assert (plan.s, plan.l_iters) == solve_s_l(plan.coefficients.abs_sum)


def test_tradeoff_splits_phase():
    H = _diag(1.0, 0.0)
    plan = plan_segments(H, 16.0, 1e-6, "tradeoff", 0.5)
    assert plan.z == -4.0
    assert plan.num_segments == 4
    assert plan.residual_coefficients is plan.coefficients


def test_plan_errors():
    H = make_random_sparse(1, 2, 1.0, 0)
    with pytest.raises(ParameterError):
        plan_segments(H, 1.0, 0.0)
    with pytest.raises(ParameterError):
        plan_segments(H, -1.0, 1e-6)
    with pytest.raises(ParameterError):
        plan_segments(H, 1.0, 1e-6, "bogus")
    with pytest.raises(ParameterError):
        plan_segments(H, 1.0, 1e-6, "tradeoff", 1.5)


def test_count_queries_formula():
    H = make_random_sparse(1, 2, 1.0, 0)
    plan = plan_segments(H, 1.0, 1e-6)
    per_segment = (2 * plan.l_iters + 1) * 2 * plan.k
    last = (2 * plan.residual_l + 1) * 2 * plan.residual_k
    assert count_queries(plan) == (plan.num_segments - 1) * per_segment + last
    assert plan.query_count == count_queries(plan)


def test_query_count_ignores_matrix_values():
    a = plan_segments(_diag(1.0, 0.0), 2.0, 1e-6)
    b = plan_segments(_diag(0.0, 1.0), 2.0, 1e-6)
    assert count_queries(a) == count_queries(b)


def test_diagonal_run_within_budget():
    report = simulate(_diag(0.5, -0.5), 1.0, 1e-6)
    assert report.spectral_error <= 1e-6
    assert report.diamond_bound == 2 * report.spectral_error
    assert report.plan.offset == 0.5


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_run_within_budget(seed):
    H = make_random_sparse(2, 2, 1.0, seed)
    report = simulate(H, 2.0 / H.h_max, 1e-6)
    assert report.spectral_error <= 1e-6
    assert report.segment_error <= report.segment_bound
    assert 0.0 <= report.success_amplitude_deficit <= math.sqrt(2e-6)
    assert report.oracle_queries == 2 * report.queries


def test_tradeoff_run_within_budget():
    H = make_random_sparse(2, 2, 1.0, 4)
    plan = plan_segments(H, 4.0, 1e-5, "tradeoff", 0.5)
    report = run(H, plan)
    assert report.spectral_error <= 1e-5


def test_negative_spectrum_run():
    matrix = np.array([[-1.0, 0.3j], [-0.3j, 0.2]])
    report = simulate(SparseHamiltonian.from_matrix(matrix), 1.5, 1e-7)
    assert report.spectral_error <= 1e-7


def test_segment_composability():
    H = make_random_sparse(2, 2, 1.0, 5)
    eps = 1e-6
    first = simulate(H, 0.7, eps).effective_unitary
    second = simulate(H, 1.1, eps).effective_unitary
    joint = simulate(H, 1.8, eps).effective_unitary
    assert np.linalg.norm(joint - second @ first, 2) <= 3 * eps


def test_parity_path_fidelity():
    spec = ParitySpec(4, "1101")
    H = make_parity_path(spec, "H2")
    report = simulate(H, math.pi / 2, 1e-6)
    start, target = parity_states(spec, "H2", H.N)
    assert report.fidelity(start, target) >= 1 - 1e-5


def test_run_rejects_mismatched_x():
    H = make_random_sparse(1, 2, 1.0, 0)
    plan = plan_segments(H, 1.0, 1e-6)
    with pytest.raises(ParameterError):
        run(H, plan, X=2 * plan.X)


def test_report_json():
    report = simulate(make_random_sparse(1, 1, 1.0, 2), 1.0, 1e-6)
    data = report.to_json()
    assert data["params"]["strategy"] == "fixed_z"
    assert data["params"]["n"] == 1
    assert data["queries"] == report.queries
    assert data["diamond_bound"] == 2 * data["spectral_error"]
    assert "parity_fidelity" not in data


def test_diamond_identical():
    U = np.eye(3)
    assert diamond_bound_check(U, U, trials=20) == 0.0


def test_diamond_global_phase():
    U = np.eye(3)
    ratio = diamond_bound_check(U, np.exp(0.4j) * U, trials=20)
    assert ratio <= 1e-7


def test_diamond_random_pairs():
    rng = np.random.Generator(np.random.PCG64(3))
    for _ in range(3):
        U, V = unitary_group.rvs(4, size=2, random_state=rng)
        assert diamond_bound_check(U, V, trials=200) <= 1 + 1e-10


def test_diamond_requires_contractions():
    with pytest.raises(ParameterError):
        diamond_bound_check(2 * np.eye(2), np.eye(2))


def test_verification_error_text():
    error = VerificationError("trace distance too large", invariant="diamond bound", seed=4)
    assert str(error) == "[diamond bound] trace distance too large (seed=4)"


def test_combined_lower_bound():
    assert combined_lower_bound(1.0, 1.0, 0.5) == 0
    assert combined_lower_bound(math.pi / 2, 1.0, 0.4) == 1
    assert combined_lower_bound(10.0, 1.0, 0.01) == 12
    with pytest.raises(ParameterError):
        combined_lower_bound(0.0, 1.0, 0.1)


def test_segment_bound_uses_coefficients():
    H = make_random_sparse(1, 2, 1.0, 1)
    plan = plan_segments(H, 1.0, 1e-6)
    expected = lcu_coefficients(-0.5, plan.k, plan.nu_max).bound
    assert plan.coefficients.bound == expected


def test_report_records_leakage():
    report = simulate(make_random_sparse(2, 2, 1.0, 1), 2.0, 1e-6)
    data = report.to_json()
    for key in ("leakage_ratio", "amplification_error", "segment_norm"):
        assert math.isfinite(data[key])
    assert data["leakage_ratio"] >= 0.0
    assert data["segment_norm"] <= 1.0 + 1e-10


def test_tight_budget_dense_rows():
    H = make_random_sparse(2, 4, 1.0, 5)
    report = simulate(H, 6.0 / (4 * H.h_max), 1e-8)
    assert report.spectral_error <= 1e-8
    assert report.segment_norm <= 1.0 + 1e-10


@pytest.mark.parametrize("alpha", [0.5, 1.0])
@pytest.mark.parametrize("tau", [4.0, 8.0, 16.0])
def test_tradeoff_runs(tau, alpha):
    H = make_random_sparse(2, 2, 1.0, 0)
    plan = plan_segments(H, tau / (2 * H.h_max), 1e-4, "tradeoff", alpha)
    if alpha == 1.0:
        assert plan.num_segments == 1
    assert run(H, plan).spectral_error <= 1e-4


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("N", [2, 4, 8])
def test_blown_up_parity_fidelity(N, d):
    spec = ParitySpec.random(N, d, 10 * N + d)
    H = make_blown_up_parity(spec)
    report = simulate(H, parity_time(spec), 1e-4)
    start, target = parity_states(spec, "blowup", H.N)
    assert report.fidelity(start, target) >= 0.999
