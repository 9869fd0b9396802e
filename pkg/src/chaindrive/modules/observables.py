"""
Observables for chaindrive

Transfer fidelity, two-site concurrence along trajectories, and the
single-excitation block used to derive exact transfer times.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import eigh, expm

from ..config import SIMULATION_CONFIG
from ..exceptions import NotExcitationConserving, NumericalError, ShapeError
from ..logger import get_logger
from .dynamics import EvolutionResult, TimeGrid
from .operators import (
    PAULI_MATRICES, DenseOperator, DensityMatrix, PureState, pair_density_array
)

# Get logger
logger = get_logger()

# Eigenvalues of rho * rho_tilde below this are treated as zero
EIGENVALUE_DUST = 1e-12

_YY = np.kron(PAULI_MATRICES["Y"], PAULI_MATRICES["Y"])


@dataclass(frozen=True, eq=False)
class TransferTask:
    """Initial and target states of a state-transfer experiment."""
    initial: PureState
    target: PureState
    description: str = ""

    def __post_init__(self):
        if self.initial.dim != self.target.dim:
            raise ShapeError("Initial and target states differ in dimension",
                             expected=self.initial.dim, actual=self.target.dim)


@dataclass(frozen=True, eq=False)
class ConcurrenceSeries:
    """Concurrence of one site pair at every sample of a grid."""
    grid: TimeGrid
    pair: Tuple[int, int]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise ShapeError("One value per sample is required", expected=len(self.grid), actual=values.shape)
        if np.any(values < 0) or np.any(values > 1):
            raise NumericalError("Concurrence values must lie in [0, 1]", quantity="concurrence")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def peak(self) -> Tuple[float, float]:
        """(time, value) of the largest concurrence."""
        index = int(np.argmax(self.values))
        return float(self.grid.samples[index]), float(self.values[index])


def _clamp_unit(value: float, quantity: str) -> float:
    tol = SIMULATION_CONFIG["psd_tol"]
    if value < -tol or value > 1 + tol:
        raise NumericalError(f"{quantity} {value:.12g} outside [0, 1]", quantity=quantity)
    return min(1.0, max(0.0, value))


def fidelity(rho: Union[DensityMatrix, PureState], target: PureState) -> float:
    """
    F = <target|rho|target>, clamped to [0, 1].

    A PureState argument is treated as its projector.
    """
    if rho.dim != target.dim:
        raise ShapeError("State and target dimensions differ", expected=target.dim, actual=rho.dim)
    if isinstance(rho, PureState):
        value = abs(np.vdot(target.amplitudes, rho.amplitudes)) ** 2
    else:
        value = np.real(np.vdot(target.amplitudes, rho.matrix @ target.amplitudes))
    return _clamp_unit(float(value), "fidelity")


def state_fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2."""
    return _clamp_unit(abs(a.overlap(b)) ** 2, "fidelity")


def transfer_fidelity_series(result: EvolutionResult, target: PureState) -> np.ndarray:
    """Fidelity to `target` at every sample, averaged over trials (linear in the state)."""
    if result.dim != target.dim:
        raise ShapeError("Trajectory and target dimensions differ", expected=target.dim, actual=result.dim)
    overlaps = np.abs(result.states @ target.amplitudes.conj()) ** 2
    return np.clip(overlaps.mean(axis=0), 0.0, 1.0)


def superposition_transfer_fidelity(rho: DensityMatrix, alpha: complex, beta: complex,
                                    zero_state: PureState, one_state: PureState) -> float:
    """
    Fidelity to alpha|a> + beta e^{i phi}|b>, maximised over the correctable phase phi:
    |alpha|^2 rho_aa + |beta|^2 rho_bb + 2 |alpha* beta rho_ab|.
    """
    a, b = zero_state.amplitudes, one_state.amplitudes
    rho_aa = np.real(np.vdot(a, rho.matrix @ a))
    rho_bb = np.real(np.vdot(b, rho.matrix @ b))
    rho_ab = np.vdot(a, rho.matrix @ b)
    value = abs(alpha) ** 2 * rho_aa + abs(beta) ** 2 * rho_bb + 2 * abs(np.conj(alpha) * beta * rho_ab)
    return _clamp_unit(float(value), "fidelity")


def superposition_fidelity_series(result: EvolutionResult, alpha: complex, beta: complex,
                                  zero_state: PureState, one_state: PureState) -> np.ndarray:
    """superposition_transfer_fidelity at every sample of a (possibly noisy) trajectory."""
    amp_a = result.states @ zero_state.amplitudes.conj()
    amp_b = result.states @ one_state.amplitudes.conj()
    rho_aa = np.mean(np.abs(amp_a) ** 2, axis=0)
    rho_bb = np.mean(np.abs(amp_b) ** 2, axis=0)
    rho_ab = np.mean(amp_a * amp_b.conj(), axis=0)
    values = abs(alpha) ** 2 * rho_aa + abs(beta) ** 2 * rho_bb + 2 * np.abs(np.conj(alpha) * beta * rho_ab)
    return np.clip(values, 0.0, 1.0)


def concurrence(rho4: DensityMatrix) -> float:
    """
    Wootters concurrence max(0, l1 - l2 - l3 - l4), the l_i being the square
    roots of the eigenvalues of rho (Y x Y) rho* (Y x Y) in decreasing order.

    Raises:
        ShapeError: If rho4 is not a two-qubit density matrix
        NumericalError: If rho4 is not positive semidefinite within tolerance
    """
    if rho4.dim != 4:
        raise ShapeError("Concurrence needs a two-qubit density matrix", expected=4, actual=rho4.dim)
    return _concurrence_matrix(rho4.matrix, check=True)


def _concurrence_matrix(rho: np.ndarray, check: bool = False) -> float:
    if check:
        lowest = float(np.linalg.eigvalsh(rho)[0])
        if lowest < -SIMULATION_CONFIG["psd_tol"]:
            raise NumericalError(f"Two-qubit state has eigenvalue {lowest:.3e}", quantity="positivity")
    spin_flipped = _YY @ rho.conj() @ _YY
    evals = np.real(np.linalg.eigvals(rho @ spin_flipped))
    evals[evals < EIGENVALUE_DUST] = 0.0
    lambdas = np.sort(np.sqrt(evals))[::-1]
    value = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]
    return float(min(1.0, max(0.0, value)))


def pair_concurrence_series(result: EvolutionResult, pair: Tuple[int, int],
                            mode: Optional[str] = None) -> ConcurrenceSeries:
    """
    Concurrence of a site pair along a trajectory.

    For ensembles, mode "observable" averages the per-trial concurrences and
    mode "state" takes the concurrence of the trial-averaged pair state.
    The default is the result's recorded averaging mode, else "observable".
    """
    mode = mode or result.meta.get("average", "observable")
    if mode not in ("observable", "state"):
        raise ValueError(f"Unknown averaging mode '{mode}'")
    rho_pairs = pair_density_array(result.states, result.n_sites, pair)
    if mode == "state" or result.n_trials == 1:
        averaged = rho_pairs.mean(axis=0)
        values = [_concurrence_matrix(r) for r in averaged]
    else:
        per_trial = np.array([[_concurrence_matrix(r) for r in trial] for trial in rho_pairs])
        values = per_trial.mean(axis=0)
    return ConcurrenceSeries(grid=result.grid, pair=(int(pair[0]), int(pair[1])), values=np.asarray(values))


def end_to_end_concurrence(result: EvolutionResult) -> ConcurrenceSeries:
    """Concurrence between sites 1 and N."""
    return pair_concurrence_series(result, (1, result.n_sites))


def adjacent_concurrence(result: EvolutionResult, pair: Tuple[int, int] = (1, 2)) -> ConcurrenceSeries:
    """Concurrence between neighboring sites, (1, 2) unless given."""
    return pair_concurrence_series(result, pair)


def single_excitation_indices(n_sites: int) -> np.ndarray:
    """Basis indices of the all-|1> state with one site flipped to |0>, ordered by site."""
    ones = 2 ** n_sites - 1
    return np.array([ones ^ (1 << (n_sites - site)) for site in range(1, n_sites + 1)])


def single_excitation_block(H: DenseOperator, n_sites: int) -> np.ndarray:
    """
    Restrict H to the single-flip subspace.

    Raises:
        NotExcitationConserving: If H does not commute with the total z magnetization
    """
    if H.dim != 2 ** n_sites:
        raise ShapeError("Operator does not act on the chain", expected=2 ** n_sites, actual=H.dim)
    rows = np.arange(H.dim)
    magnetization = np.array([n_sites - 2 * bin(r).count("1") for r in rows], dtype=float)
    commutator = H.matrix * (magnetization[np.newaxis, :] - magnetization[:, np.newaxis])
    norm = float(np.linalg.norm(commutator))
    if norm > SIMULATION_CONFIG["conservation_tol"]:
        raise NotExcitationConserving(
            f"Hamiltonian does not conserve the number of flipped spins (||[H, Sz]|| = {norm:.3e})",
            commutator_norm=norm
        )
    indices = single_excitation_indices(n_sites)
    return np.array(H.matrix[np.ix_(indices, indices)])


def level_spacings(block: np.ndarray) -> np.ndarray:
    """Gaps between consecutive eigenvalues of a Hermitian block."""
    return np.diff(eigh(block, eigvals_only=True))


def transfer_time(block: np.ndarray, tol: float = 1e-8) -> float:
    """
    First end-to-end transfer time pi / spacing of an equally spaced spectrum.

    Raises:
        NumericalError: If the spectrum is not equally spaced within tol
    """
    spacings = level_spacings(block)
    if spacings.size == 0 or np.ptp(spacings) > tol:
        raise NumericalError("Single-excitation spectrum is not equally spaced", quantity="spectrum")
    return float(np.pi / spacings.mean())


def transfer_probability(block: np.ndarray, t: float, source: int = 0, target: int = -1) -> float:
    """|<target| exp(-i block t) |source>|^2 within the single-excitation block."""
    evolved = expm(-1j * t * block)
    return float(abs(evolved[target, source]) ** 2)
