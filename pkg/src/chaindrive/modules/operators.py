"""
Operators for chaindrive

Dense operators on the 2^N dimensional space of an open spin-1/2 chain,
built from Pauli strings, together with the pure-state and density-matrix
value types the rest of the package passes around.

Ordering convention: site 1 is the leftmost (most significant) tensor
factor, so basis index b has site i in state (b >> (N - i)) & 1.
"""

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from ..config import SIMULATION_CONFIG
from ..exceptions import InvalidSite, ShapeError, NumericalError
from ..logger import get_logger

# Get logger
logger = get_logger()

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

AXES = ("X", "Y", "Z")

# Single-site eigenvectors: label 0 is the +1 eigenvector, label 1 the -1 one.
# The first amplitude of each is real and positive.
_SQRT_HALF = 1.0 / math.sqrt(2.0)
BASIS_VECTORS = {
    "Z": (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
    "Y": (np.array([1, 1j], dtype=complex) * _SQRT_HALF, np.array([1, -1j], dtype=complex) * _SQRT_HALF),
    "X": (np.array([1, 1], dtype=complex) * _SQRT_HALF, np.array([1, -1], dtype=complex) * _SQRT_HALF),
}


def _read_only(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


def _sites_from_dim(dim: int) -> int:
    n_sites = int(round(math.log2(dim))) if dim > 0 else -1
    if n_sites < 0 or 2 ** n_sites != dim:
        raise ShapeError(f"Dimension {dim} is not a power of two", expected="2^N", actual=dim)
    return n_sites


@dataclass(frozen=True)
class PauliString:
    """A coefficient times a tensor product of single-site Pauli axes."""
    n_sites: int
    factors: Mapping[int, str] = field(default_factory=dict)
    coefficient: complex = 1.0

    def validate(self) -> None:
        """Check site indices and axis labels."""
        if self.n_sites < 1:
            raise InvalidSite(f"A chain needs at least one site, got {self.n_sites}", n_sites=self.n_sites)
        for site, axis in self.factors.items():
            if not 1 <= site <= self.n_sites:
                raise InvalidSite(f"Site {site} outside 1..{self.n_sites}", site=site, n_sites=self.n_sites)
            if str(axis).upper() not in AXES:
                raise ValueError(f"Unknown Pauli axis '{axis}' on site {site}")


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """A dim x dim complex matrix, read-only after construction."""
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _read_only(self.matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeError("Operator must be a square matrix", expected="(d, d)", actual=matrix.shape)
        _sites_from_dim(matrix.shape[0])
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return _sites_from_dim(self.dim)

    def hermiticity_error(self) -> float:
        """Largest elementwise deviation from the adjoint."""
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = None) -> bool:
        tol = SIMULATION_CONFIG["hermiticity_tol"] if tol is None else tol
        return self.hermiticity_error() <= tol

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.matrix.conj().T)

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        return sum_operators([self, other])

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        return sum_operators([self, -1.0 * other])

    def __mul__(self, scalar) -> "DenseOperator":
        return DenseOperator(self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        if self.dim != other.dim:
            raise ShapeError("Operator dimensions differ", expected=self.dim, actual=other.dim)
        return DenseOperator(self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized state vector, read-only after construction."""
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _read_only(self.amplitudes)
        if amplitudes.ndim != 1:
            raise ShapeError("State must be a vector", expected="(d,)", actual=amplitudes.shape)
        _sites_from_dim(amplitudes.shape[0])
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > SIMULATION_CONFIG["norm_tol"]:
            raise NumericalError(f"State norm {norm:.12g} differs from 1", quantity="norm")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_sites(self) -> int:
        return _sites_from_dim(self.dim)

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        if self.dim != other.dim:
            raise ShapeError("State dimensions differ", expected=self.dim, actual=other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A density matrix, read-only after construction.

    Construction checks shape, hermiticity and trace; positivity is checked
    on demand by validate() since it needs a full eigendecomposition.
    """
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _read_only(self.matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeError("Density matrix must be square", expected="(d, d)", actual=matrix.shape)
        _sites_from_dim(matrix.shape[0])
        if np.max(np.abs(matrix - matrix.conj().T)) > SIMULATION_CONFIG["hermiticity_tol"]:
            raise NumericalError("Density matrix is not Hermitian", quantity="hermiticity")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > SIMULATION_CONFIG["norm_tol"]:
            raise NumericalError(f"Density matrix trace {trace.real:.12g} differs from 1", quantity="trace")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return _sites_from_dim(self.dim)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def validate(self, tol: float = None) -> None:
        """Raise NumericalError unless the matrix is positive semidefinite within tol."""
        tol = SIMULATION_CONFIG["psd_tol"] if tol is None else tol
        lowest = self.min_eigenvalue()
        if lowest < -tol:
            raise NumericalError(f"Density matrix has eigenvalue {lowest:.3e}", quantity="positivity")


def build_pauli_operator(p: PauliString) -> DenseOperator:
    """
    Build coefficient x (tensor product over sites 1..N) with identity at
    sites absent from the string.

    Args:
        p: The Pauli string

    Returns:
        The dense operator
    """
    p.validate()
    factors = {site: str(axis).upper() for site, axis in p.factors.items()}
    matrices = [PAULI_MATRICES[factors.get(site, "I")] for site in range(1, p.n_sites + 1)]
    return DenseOperator(p.coefficient * reduce(np.kron, matrices))


def sum_operators(terms: Sequence[DenseOperator]) -> DenseOperator:
    """Elementwise sum of operators of equal dimension."""
    if not terms:
        raise ShapeError("Cannot sum an empty list of operators", expected="at least one term", actual=0)
    dim = terms[0].dim
    total = np.zeros((dim, dim), dtype=complex)
    for term in terms:
        if term.dim != dim:
            raise ShapeError("Operator dimensions differ", expected=dim, actual=term.dim)
        total += term.matrix
    return DenseOperator(total)


def _labels(n_sites: int, labels: Union[str, Sequence[int]]) -> Tuple[int, ...]:
    values = tuple(int(c) for c in labels) if isinstance(labels, str) else tuple(int(v) for v in labels)
    if len(values) != n_sites:
        raise ShapeError("One label per site is required", expected=n_sites, actual=len(values))
    if set(values) - {0, 1}:
        raise ValueError(f"Labels must be 0 or 1, got {values}")
    return values


def basis_product_state(n_sites: int, labels: Union[str, Sequence[int]], basis: str = "Z") -> PureState:
    """
    Tensor product of single-site eigenstates of the given axis.

    Args:
        n_sites: Number of sites
        labels: Per-site labels, 0 for the +1 eigenvector and 1 for the -1 one;
            a bit string such as "0111" is accepted
        basis: "Z", "Y" (or "X")

    Returns:
        The product state
    """
    basis = basis.upper()
    if basis not in BASIS_VECTORS:
        raise ValueError(f"Unknown basis '{basis}'")
    vectors = [BASIS_VECTORS[basis][label] for label in _labels(n_sites, labels)]
    return PureState(reduce(np.kron, vectors))


def superposition_state(n_sites: int, alpha: complex, beta: complex, basis: str = "Z") -> PureState:
    """(alpha|0> + beta|1>) on site 1, |1> on every other site."""
    basis = basis.upper()
    zero, one = BASIS_VECTORS[basis]
    rest = [one] * (n_sites - 1)
    return PureState(reduce(np.kron, [alpha * zero + beta * one] + rest))


def _check_pair(keep: Tuple[int, int], n_sites: int) -> Tuple[int, int]:
    a, b = int(keep[0]), int(keep[1])
    for site in (a, b):
        if not 1 <= site <= n_sites:
            raise InvalidSite(f"Site {site} outside 1..{n_sites}", site=site, n_sites=n_sites)
    if a == b:
        raise InvalidSite(f"Pair must name two distinct sites, got ({a}, {b})", site=a, n_sites=n_sites)
    return a, b


def partial_trace_to_pair(rho: DensityMatrix, keep: Tuple[int, int]) -> DensityMatrix:
    """
    Trace out every site except the ordered pair `keep`.

    The result is a 4x4 matrix over (keep[0], keep[1]) in that order.
    """
    n = rho.n_sites
    a, b = _check_pair(keep, n)
    others = [k for k in range(n) if k not in (a - 1, b - 1)]
    rest = 2 ** len(others)
    tensor = rho.matrix.reshape((2,) * (2 * n))
    order = [a - 1, b - 1] + others + [n + a - 1, n + b - 1] + [n + k for k in others]
    tensor = tensor.transpose(order).reshape(4, rest, 4, rest)
    return DensityMatrix(np.einsum("ikjk->ij", tensor))


def _pair_amplitudes(amplitudes: np.ndarray, n_sites: int, keep: Tuple[int, int]) -> np.ndarray:
    a, b = keep
    others = [k for k in range(n_sites) if k not in (a - 1, b - 1)]
    lead = amplitudes.shape[:-1]
    tensor = amplitudes.reshape(lead + (2,) * n_sites)
    offset = len(lead)
    order = list(range(offset)) + [offset + a - 1, offset + b - 1] + [offset + k for k in others]
    return tensor.transpose(order).reshape(lead + (4, 2 ** len(others)))


def pair_density_from_state(psi: PureState, keep: Tuple[int, int]) -> DensityMatrix:
    """Reduced 4x4 density matrix of a pure state over the ordered pair `keep`."""
    keep = _check_pair(keep, psi.n_sites)
    m = _pair_amplitudes(psi.amplitudes, psi.n_sites, keep)
    return DensityMatrix(m @ m.conj().T)


def pair_density_array(states: np.ndarray, n_sites: int, keep: Tuple[int, int]) -> np.ndarray:
    """Reduced pair matrices of a stack of state vectors, shape (..., 4, 4)."""
    keep = _check_pair(keep, n_sites)
    m = _pair_amplitudes(np.asarray(states), n_sites, keep)
    return m @ np.swapaxes(m.conj(), -1, -2)


def ensemble_average_density(states: Union[Sequence[PureState], np.ndarray]) -> DensityMatrix:
    """Equal-weight average of the projectors of a list of states."""
    if isinstance(states, np.ndarray):
        vectors = states
    else:
        vectors = np.array([s.amplitudes for s in states])
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise ShapeError("Need a non-empty stack of state vectors", expected="(trials, d)", actual=vectors.shape)
    return DensityMatrix(vectors.T @ vectors.conj() / vectors.shape[0])


def local_field_matrix(n_sites: int, terms: Iterable[Tuple[int, str, float]]) -> np.ndarray:
    """
    Dense matrix of sum_k b_k sigma_{axis_k}^{site_k} built by index scatter.

    Args:
        n_sites: Number of sites
        terms: (site, axis, amplitude) triples

    Returns:
        A complex ndarray of shape (2^N, 2^N)
    """
    dim = 2 ** n_sites
    rows = np.arange(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for site, axis, amplitude in terms:
        if not 1 <= site <= n_sites:
            raise InvalidSite(f"Site {site} outside 1..{n_sites}", site=site, n_sites=n_sites)
        mask = 1 << (n_sites - site)
        down = (rows & mask) != 0
        if axis == "Z":
            out[rows, rows] += amplitude * np.where(down, -1.0, 1.0)
        elif axis == "X":
            out[rows ^ mask, rows] += amplitude
        elif axis == "Y":
            out[rows ^ mask, rows] += amplitude * np.where(down, -1j, 1j)
        else:
            raise ValueError(f"Unknown Pauli axis '{axis}'")
    return out


def drive_operator(n_sites: int, axis: str) -> DenseOperator:
    """Sum over all sites of sigma_axis."""
    return DenseOperator(local_field_matrix(n_sites, [(site, axis.upper(), 1.0) for site in range(1, n_sites + 1)]))


def expectation_value(operator: DenseOperator, psi: PureState) -> float:
    """Real part of <psi|O|psi>."""
    if operator.dim != psi.dim:
        raise ShapeError("Operator and state dimensions differ", expected=operator.dim, actual=psi.dim)
    return float(np.real(np.vdot(psi.amplitudes, operator.matrix @ psi.amplitudes)))
