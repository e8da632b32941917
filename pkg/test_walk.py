import cmath
import dataclasses
import math

import numpy as np
import pytest

from lcu_walk.bessel import lcu_coefficients
from lcu_walk.errors import ParameterError, VerificationError
from lcu_walk.hamiltonian import SparseHamiltonian, make_random_sparse
from lcu_walk.walk import (
    build_isometry,
    build_swap,
    build_walk,
    build_walk_system,
    diagonal_offset,
    next_power_of_two,
    predicted_eigenvalues,
    sector_eigenvalues,
    spectral_check,
    swap_permutation,
    walk_parameters,
    walk_phases,
    walk_subspace,
)


def _diag(*values):
    return SparseHamiltonian.from_matrix(np.diag(values))


def test_next_power_of_two():
    assert [next_power_of_two(v) for v in (1, 2, 3, 4, 5, 8, 9)] == [1, 2, 4, 4, 8, 8, 16]


def test_zero_hamiltonian_isometry_uses_padding():
    H = SparseHamiltonian.from_matrix(np.zeros((2, 2)), d=1)
    T = build_isometry(H)
    dim_small = 4
    for j in range(2):
        phi = T[2 * j * dim_small : (2 * j + 1) * dim_small, 2 * j]
        expected = np.zeros(dim_small)
        expected[2 * j + 1] = 1.0
        assert np.allclose(phi, expected, atol=1e-15)


def test_projector_hamiltonian_maps_to_itself():
    H = _diag(1.0, 0.0)
    T = build_isometry(H, 1.0)
    assert np.allclose(T[:4, 0], [1, 0, 0, 0], atol=1e-15)


def test_ancilla_one_columns():
    H = make_random_sparse(1, 2, 1.0, 3)
    T = build_isometry(H)
    dim_small = 4
    for j in range(2):
        column = 2 * j + 1
        expected = np.zeros(dim_small * dim_small)
        expected[column * dim_small + 1] = 1.0
        assert np.array_equal(T[:, column], expected)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_isometry_random(seed):
    H = make_random_sparse(2, 2, 1.0, seed)
    T = build_isometry(H, H.h_max)
    assert np.linalg.norm(T.conj().T @ T - np.eye(8), 2) <= 1e-12


def test_isometry_negative_real_entries():
    H = SparseHamiltonian.from_matrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    ws = build_walk_system(H)
    assert np.linalg.norm(ws.T.conj().T @ ws.T - np.eye(4), 2) <= 1e-12
    assert spectral_check(ws).passed


def test_x_below_max_norm_rejected():
    H = make_random_sparse(1, 2, 1.0, 0)
    with pytest.raises(ParameterError):
        build_isometry(H, 0.5 * H.h_max)


def test_negative_diagonal_gets_offset():
    H = _diag(-1.0, 0.5)
    assert diagonal_offset(H) == 1.0
    X, d_pow2, offset = walk_parameters(H)
    assert (X, d_pow2, offset) == (1.5, 1, 1.0)


def test_swap_is_an_involution():
    S = build_swap(4)
    assert np.array_equal(S @ S, np.eye(16))
    perm = swap_permutation(4)
    assert np.array_equal(perm[perm], np.arange(16))


def test_swap_exchanges_copies():
    S = build_swap(4)
    vec = np.zeros(16)
    vec[0 * 4 + 2] = 1.0
    assert np.flatnonzero(S @ vec).tolist() == [2 * 4 + 0]


def test_swap_trace_counts_fixed_points():
    for dim_small in (2, 4, 8):
        assert np.trace(build_swap(dim_small)) == dim_small


@pytest.mark.parametrize("matrix", [np.zeros((2, 2)), np.diag([0.5, -0.5])])
def test_walk_unitary(matrix):
    H = SparseHamiltonian.from_matrix(matrix, d=1)
    ws = build_walk_system(H)
    U = build_walk(ws.T, ws.S)
    assert np.linalg.norm(U.conj().T @ U - np.eye(ws.dim_big), 2) <= 1e-12
    assert np.allclose(np.abs(np.linalg.eigvals(U)), 1.0, atol=1e-12)


def test_apply_walk_matches_dense():
    H = make_random_sparse(2, 2, 1.0, 5)
    ws = build_walk_system(H)
    rng = np.random.Generator(np.random.PCG64(1))
    vectors = rng.normal(size=(ws.dim_big, 3)) + 1j * rng.normal(size=(ws.dim_big, 3))
    assert np.allclose(ws.apply_walk(vectors), ws.U @ vectors, atol=1e-12)


def test_predicted_eigenvalues_half():
    plus, minus = predicted_eigenvalues(0.5)
    assert plus == pytest.approx(cmath.exp(1j * math.pi / 6))
    assert minus == pytest.approx(-cmath.exp(-1j * math.pi / 6))


def test_predicted_eigenvalues_zero():
    assert predicted_eigenvalues(0.0) == (1.0, -1.0)


def test_spectral_check_zero():
    ws = build_walk_system(SparseHamiltonian.from_matrix(np.zeros((2, 2)), d=1))
    report = spectral_check(ws)
    assert report.passed
    assert report.nus == [0.0, 0.0]


def test_spectral_check_saturated_diagonal():
    H = _diag(0.5, -0.5)
    ws = build_walk_system(H)
    report = spectral_check(ws)
    assert report.passed
    assert sorted(report.nus) == [0.0, 1.0]
    assert sorted(report.eigenvalues) == pytest.approx([-0.5, 0.5])


@pytest.mark.parametrize("seed", [0, 7, 11])
def test_spectral_check_random(seed):
    ws = build_walk_system(make_random_sparse(2, 2, 1.0, seed))
    report = spectral_check(ws)
    assert report.max_residual <= 1e-9
    assert report.max_mismatch <= 1e-9
    assert not report.subspace_used


def test_spectral_check_reports_broken_walk():
    ws = build_walk_system(make_random_sparse(1, 2, 1.0, 3))
    broken = dataclasses.replace(ws, swap_perm=np.arange(ws.dim_big))
    with pytest.raises(VerificationError) as info:
        spectral_check(broken)
    assert "lambda=" in str(info.value)


def test_walk_subspace_is_invariant():
    ws = build_walk_system(make_random_sparse(2, 2, 1.0, 4))
    subspace = walk_subspace(ws)
    assert subspace.dim <= 2 * ws.dim_small
    assert np.allclose(subspace.basis @ subspace.unitary, ws.apply_walk(subspace.basis), atol=1e-12)
    identity = np.eye(subspace.dim)
    assert np.linalg.norm(subspace.unitary.conj().T @ subspace.unitary - identity, 2) <= 1e-12


def test_sector_independence():
    ws = build_walk_system(make_random_sparse(1, 2, 1.0, 2))
    sectors = sector_eigenvalues(ws, lcu_coefficients(-0.5, 5))
    assert np.max(np.abs(sectors[:, 0] - sectors[:, 1])) <= 1e-12


def test_monotone_flattening():
    H = make_random_sparse(2, 2, 1.0, 6)
    narrow = walk_phases(build_walk_system(H))
    wide = walk_phases(build_walk_system(H, 3.0 * H.h_max))
    assert np.all(np.abs(wide) <= np.abs(narrow) + 1e-15)
