"""
Sparse Hermitian Hamiltonians, their two black-box oracles, instance
generators and JSON serialization.
"""

import json
import logging
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import (
    HamiltonianFileError,
    HermiticityError,
    IndexRangeError,
    ParameterError,
    SparsityError,
)

logger = logging.getLogger(__name__)

PARITY_VARIANTS = ("H1", "H2")
MAX_FILE_QUBITS = 10


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    """Hermitian N x N matrix (N = 2**n) with at most ``d`` nonzeros per row.

    ``entries`` is stored densely and is read-only; ``rows[j]`` lists the
    nonzero columns of row j in ascending order.
    """

    n: int
    d: int
    entries: np.ndarray
    rows: Tuple[Tuple[int, ...], ...]
    h_max: float
    h_spec: float

    @classmethod
    def from_matrix(cls, matrix, d: Optional[int] = None) -> "SparseHamiltonian":
        """Validate a dense matrix and wrap it.

        When ``d`` is omitted the true row sparsity is used.
        """
        entries = np.array(matrix, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ParameterError(f"Hamiltonian must be square, got shape {entries.shape}")
        dim = entries.shape[0]
        if dim < 1 or dim & (dim - 1):
            raise ParameterError(f"Dimension {dim} is not a power of two")
        if not np.array_equal(entries, entries.conj().T):
            raise HermiticityError("Matrix is not Hermitian")

        rows = tuple(tuple(int(c) for c in np.flatnonzero(entries[j])) for j in range(dim))
        widest = max(len(row) for row in rows)
        if d is None:
            d = max(1, widest)
        if not 1 <= d <= dim:
            raise ParameterError(f"Sparsity d={d} must lie in [1, {dim}]")
        for j, row in enumerate(rows):
            if len(row) > d:
                raise SparsityError(f"Row {j} holds {len(row)} nonzeros, more than d={d}")

        entries.setflags(write=False)
        h_max = float(np.max(np.abs(entries))) if entries.size else 0.0
        h_spec = float(np.max(np.abs(np.linalg.eigvalsh(entries))))
        return cls(
            n=dim.bit_length() - 1,
            d=int(d),
            entries=entries,
            rows=rows,
            h_max=h_max,
            h_spec=h_spec,
        )

    @property
    def N(self) -> int:
        return 1 << self.n

    def dense(self) -> np.ndarray:
        """Writable copy of the matrix."""
        return np.array(self.entries)

    def scaled(self, factor: float) -> "SparseHamiltonian":
        """Return ``factor * H``, keeping the declared sparsity."""
        if not factor > 0:
            raise ParameterError(f"Scale factor must be positive, got {factor}")
        upper = np.triu(self.entries * factor, 1)
        diagonal = np.diag(np.real(np.diag(self.entries)) * factor)
        return SparseHamiltonian.from_matrix(upper + upper.conj().T + diagonal, self.d)


@dataclass(frozen=True)
class ParitySpec:
    """Bit string ``x`` of length ``N`` with blow-up factor ``d``."""

    N: int
    x: str
    d: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise ParameterError(f"Path length N must be positive, got {self.N}")
        if self.d < 1:
            raise ParameterError(f"Blow-up factor d must be positive, got {self.d}")
        if len(self.x) != self.N or set(self.x) - {"0", "1"}:
            raise ParameterError(f"x must be a bit string of length {self.N}, got {self.x!r}")

    @classmethod
    def random(cls, N: int, d: int = 1, seed: int = 0) -> "ParitySpec":
        rng = np.random.Generator(np.random.PCG64(seed))
        bits = rng.integers(0, 2, size=N)
        return cls(N=N, x="".join(str(int(b)) for b in bits), d=d)

    @property
    def bits(self) -> Tuple[int, ...]:
        return tuple(int(c) for c in self.x)

    @property
    def parity(self) -> int:
        return parity_bit(self.x)


# --- oracles ---------------------------------------------------------------


def _check_index(H: SparseHamiltonian, index: int, name: str):
    if not 0 <= index < H.N:
        raise IndexRangeError(f"{name}={index} outside [0, {H.N})")


def entry_oracle(H: SparseHamiltonian, j: int, k: int) -> complex:
    """Return H_jk exactly as stored."""
    _check_index(H, j, "j")
    _check_index(H, k, "k")
    return complex(H.entries[j, k])


def nonzero_index_oracle(H: SparseHamiltonian, j: int, l: int) -> int:
    """Column of the l-th nonzero (1-based) of row j.

    Slots past the end of the row map to j itself.
    """
    _check_index(H, j, "j")
    if not 1 <= l <= H.d:
        raise IndexRangeError(f"slot l={l} outside [1, {H.d}]")
    row = H.rows[j]
    if l <= len(row):
        return row[l - 1]
    return j


def reverse_index_oracle(H: SparseHamiltonian, j: int, column: int) -> int:
    """Inverse of ``nonzero_index_oracle`` for fixed j: returns the 1-based slot.

    A padding self-loop column maps to the first padding slot.
    """
    _check_index(H, j, "j")
    _check_index(H, column, "column")
    row = H.rows[j]
    pos = bisect_left(row, column)
    if pos < len(row) and row[pos] == column:
        return pos + 1
    if column == j and len(row) < H.d:
        return len(row) + 1
    raise ParameterError(f"column {column} is not a neighbour of row {j}")


def norms(H: SparseHamiltonian) -> Tuple[float, float]:
    """(max-entry norm, spectral norm)."""
    return H.h_max, H.h_spec


# --- generators ------------------------------------------------------------


def _padded_dim(size: int) -> int:
    return max(2, 1 << (size - 1).bit_length())


def _embed(block: np.ndarray) -> SparseHamiltonian:
    dim = _padded_dim(block.shape[0])
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[: block.shape[0], : block.shape[1]] = block
    return SparseHamiltonian.from_matrix(matrix)


def make_random_sparse(n: int, d: int, h_max_target: float, seed: int) -> SparseHamiltonian:
    """Seeded random d-sparse Hermitian matrix on n qubits.

    Diagonals are real and nonnegative; off-diagonal pairs are placed in a
    random order while both rows still have room. The result is rescaled so
    that ``h_max`` equals ``h_max_target``.
    """
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    dim = 1 << n
    if not 1 <= d <= dim:
        raise ParameterError(f"Sparsity d={d} infeasible for dimension {dim}")
    if not h_max_target > 0:
        raise ParameterError(f"h_max_target must be positive, got {h_max_target}")

    rng = np.random.Generator(np.random.PCG64(seed))
    diagonal = rng.uniform(0.0, h_max_target, size=dim)
    upper = np.zeros((dim, dim), dtype=complex)
    counts = np.ones(dim, dtype=int)

    pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    for index in rng.permutation(len(pairs)):
        i, j = pairs[index]
        if counts[i] < d and counts[j] < d:
            magnitude = rng.uniform(0.5, 1.0) * h_max_target
            phase = rng.uniform(0.0, 2.0 * math.pi)
            upper[i, j] = magnitude * np.exp(1j * phase)
            counts[i] += 1
            counts[j] += 1

    peak = max(np.max(np.abs(upper)), np.max(diagonal))
    scale = h_max_target / peak
    upper = upper * scale
    matrix = upper + upper.conj().T + np.diag(diagonal * scale)
    logger.debug("random instance n=%d d=%d seed=%d nnz=%d", n, d, seed, int(np.count_nonzero(matrix)))
    return SparseHamiltonian.from_matrix(matrix, d)


def _path_weight(i: int, N: int) -> float:
    return math.sqrt(i * (N - i + 1))


def make_parity_path(spec: ParitySpec, variant: str = "H2") -> SparseHamiltonian:
    """Weighted path H1, or the bit-string twisted double path H2.

    H2 uses index 2*i + j for vertex (i, j).
    """
    if variant not in PARITY_VARIANTS:
        raise ParameterError(f"Unknown parity variant {variant!r}")
    N = spec.N
    if variant == "H1":
        block = np.zeros((N + 1, N + 1))
        for i in range(1, N + 1):
            block[i - 1, i] = block[i, i - 1] = _path_weight(i, N)
        return _embed(block)

    block = np.zeros((2 * (N + 1), 2 * (N + 1)))
    for i, bit in enumerate(spec.bits, start=1):
        weight = _path_weight(i, N)
        for j in (0, 1):
            a, b = 2 * (i - 1) + j, 2 * i + (j ^ bit)
            block[a, b] = block[b, a] = weight
    return _embed(block)


def make_blown_up_parity(spec: ParitySpec) -> SparseHamiltonian:
    """H2 / N with every vertex replaced by ``d`` copies joined completely.

    Vertex (i, j, l) has index (2*i + j) * d + l.
    """
    N, d = spec.N, spec.d
    block = np.zeros((2 * (N + 1) * d, 2 * (N + 1) * d))
    for i, bit in enumerate(spec.bits, start=1):
        weight = _path_weight(i, N) / N
        for j in (0, 1):
            a = (2 * (i - 1) + j) * d
            b = (2 * i + (j ^ bit)) * d
            block[a : a + d, b : b + d] = weight
            block[b : b + d, a : a + d] = weight
    return _embed(block)


def parity_bit(x: str) -> int:
    return sum(int(c) for c in x) % 2


def parity_time(spec: ParitySpec, variant: str = "blowup") -> float:
    """Evolution time that carries |0,0> to |N, parity(x)>."""
    if variant in PARITY_VARIANTS:
        return math.pi / 2
    if variant == "blowup":
        return spec.N * math.pi / (2 * spec.d)
    raise ParameterError(f"Unknown parity variant {variant!r}")


def _vertex_vector(dim: int, vertex: int, copies: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    vec[vertex * copies : (vertex + 1) * copies] = 1.0 / math.sqrt(copies)
    return vec


def parity_states(spec: ParitySpec, variant: str, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """(start, target) vectors in the padded basis of dimension ``dim``.

    For the blown-up family the copy register is in uniform superposition.
    """
    N = spec.N
    if variant == "H1":
        return _vertex_vector(dim, 0, 1), _vertex_vector(dim, N, 1)
    copies = spec.d if variant == "blowup" else 1
    if variant not in PARITY_VARIANTS + ("blowup",):
        raise ParameterError(f"Unknown parity variant {variant!r}")
    start = _vertex_vector(dim, 0, copies)
    target = _vertex_vector(dim, 2 * N + spec.parity, copies)
    return start, target


def invariant_subspace_block(H: SparseHamiltonian, spec: ParitySpec) -> np.ndarray:
    """Restriction of a blown-up instance to span{|i, j, *>}."""
    d = spec.d
    basis = np.zeros((H.N, 2 * (spec.N + 1)))
    for vertex in range(2 * (spec.N + 1)):
        basis[vertex * d : (vertex + 1) * d, vertex] = 1.0 / math.sqrt(d)
    return basis.T @ H.entries @ basis


# --- serialization ---------------------------------------------------------


def _float17(value: float) -> str:
    return format(float(value), ".17g")


def save_json(H: SparseHamiltonian, path: str):
    """Write the upper triangle (row <= col) of H."""
    entries = []
    for j, row in enumerate(H.rows):
        for k in row:
            if j <= k:
                value = H.entries[j, k]
                entries.append(f" [{j}, {k}, {_float17(value.real)}, {_float17(value.imag)}]")
    body = ",\n".join(entries)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f'{{"n": {H.n}, "d": {H.d}, "entries": [\n{body}\n]}}\n')


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def load_json(path: str) -> SparseHamiltonian:
    """Read a Hamiltonian file; missing mirror entries are filled in."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise HamiltonianFileError(f"{path}: invalid JSON ({e})") from e

    if not isinstance(data, dict) or not {"n", "d", "entries"} <= set(data):
        raise HamiltonianFileError(f"{path}: expected keys n, d, entries")
    n, d, raw = data["n"], data["d"], data["entries"]
    if not isinstance(n, int) or isinstance(n, bool) or not 0 <= n <= MAX_FILE_QUBITS:
        raise HamiltonianFileError(f"{path}: qubit count {n!r} outside 0..{MAX_FILE_QUBITS}")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise HamiltonianFileError(f"{path}: bad sparsity {d!r}")
    if not isinstance(raw, list):
        raise HamiltonianFileError(f"{path}: entries must be a list")

    dim = 1 << n
    given: Dict[Tuple[int, int], complex] = {}
    for item in raw:
        if not (isinstance(item, list) and len(item) == 4):
            raise HamiltonianFileError(f"{path}: malformed entry {item!r}")
        row, col, re, im = item
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (row, col)):
            raise HamiltonianFileError(f"{path}: non-integer index in {item!r}")
        if not (_is_number(re) and _is_number(im)):
            raise HamiltonianFileError(f"{path}: non-numeric value in {item!r}")
        if not (0 <= row < dim and 0 <= col < dim):
            raise HamiltonianFileError(f"{path}: index out of range in {item!r}")
        value = complex(re, im)
        if given.get((row, col), value) != value:
            raise HamiltonianFileError(f"{path}: conflicting duplicates for ({row}, {col})")
        given[(row, col)] = value

    matrix = np.zeros((dim, dim), dtype=complex)
    for (row, col), value in given.items():
        matrix[row, col] = value
    for (row, col), value in given.items():
        if (col, row) not in given:
            matrix[col, row] = value.conjugate()
    if d > dim:
        raise HamiltonianFileError(f"{path}: sparsity d={d} exceeds dimension {dim}")
    return SparseHamiltonian.from_matrix(matrix, d)


def describe(H: SparseHamiltonian) -> Dict[str, Union[int, float]]:
    """Summary fields used in reports."""
    return {"n": H.n, "d": H.d, "h_max": H.h_max, "h_spec": H.h_spec}


def row_degrees(H: SparseHamiltonian) -> List[int]:
    return [len(row) for row in H.rows]
