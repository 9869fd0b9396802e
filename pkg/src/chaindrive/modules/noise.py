"""
Noise for chaindrive

Ornstein-Uhlenbeck local fields B_m^i(t) on every site and noise axis,
noisy ensemble propagation, and the per-period residual of a static local
noise term seen from the frame of the control field.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse.linalg import expm_multiply

from ..config import SIMULATION_CONFIG, NOISE_CONFIG
from ..exceptions import ShapeError
from ..logger import get_logger
from ..schemas import ChainModel, DriveSpec, NoiseSpec, PropagatorConfig
from .dynamics import EvolutionResult, TimeGrid, step_average_field, walk_lattice, check_normalization
from .models import build_static_hamiltonian, control_frame_unitary
from .operators import PAULI_MATRICES, DenseOperator, PureState, drive_operator, local_field_matrix

# Get logger
logger = get_logger()

# Fixed stream index per axis, so runs with different axis subsets still
# share the realisation of a common axis
AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}


@dataclass(frozen=True, eq=False)
class OUTrajectory:
    """OU field values on a lattice, shape (sites, axes, lattice points)."""
    grid: TimeGrid
    axes: Tuple[str, ...]
    values: np.ndarray
    trial: int = 0

    def __post_init__(self):
        if self.values.ndim != 3 or self.values.shape[1:] != (len(self.axes), len(self.grid)):
            raise ShapeError(
                "Trajectory values must have shape (sites, axes, samples)",
                expected=(None, len(self.axes), len(self.grid)), actual=self.values.shape
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("OU trajectory contains non-finite values")

    def field_terms(self, k: int):
        """(site, axis, amplitude) triples held on lattice interval k."""
        n_sites = self.values.shape[0]
        return [
            (site, axis, self.values[site - 1, a, k])
            for site in range(1, n_sites + 1)
            for a, axis in enumerate(self.axes)
        ]


def noise_stream(master_seed: int, trial: int, site: int, axis: str) -> np.random.Generator:
    """Independent generator for one (trial, site, axis) stream."""
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial, site, AXIS_INDEX[axis]))
    return np.random.default_rng(sequence)


def ou_path(rng: np.random.Generator, spec: NoiseSpec, times: np.ndarray) -> np.ndarray:
    """
    Exact AR(1) discretization of the stationary OU process on arbitrary times:
    B(t+d) = mu + (B(t) - mu) e^{-d/tau} + sigma sqrt(1 - e^{-2d/tau}) xi,
    with B(t_0) drawn from N(mu, sigma^2).
    """
    xi = rng.standard_normal(times.size)
    steps = np.diff(times)
    decay = np.exp(-steps / spec.tau)
    scale = spec.sigma * np.sqrt(-np.expm1(-2.0 * steps / spec.tau))
    path = np.empty(times.size)
    path[0] = spec.mu + spec.sigma * xi[0]
    for k in range(1, times.size):
        path[k] = spec.mu + (path[k - 1] - spec.mu) * decay[k - 1] + scale[k - 1] * xi[k]
    return path


def sample_ou(spec: NoiseSpec, grid: TimeGrid, stream_id: int = 0, n_sites: int = 1) -> OUTrajectory:
    """
    Sample one trial of OU fields on every site and noise axis.

    Args:
        spec: Noise parameters
        grid: Lattice the fields are sampled on
        stream_id: Trial index; streams are keyed by (trial, site, axis)
        n_sites: Number of sites carrying noise

    Returns:
        OUTrajectory with values of shape (n_sites, len(spec.axes), len(grid))
    """
    values = np.empty((n_sites, len(spec.axes), len(grid)))
    for site in range(1, n_sites + 1):
        for a, axis in enumerate(spec.axes):
            rng = noise_stream(spec.master_seed, stream_id, site, axis)
            values[site - 1, a] = ou_path(rng, spec, grid.samples)
    return OUTrajectory(grid=grid, axes=tuple(spec.axes), values=values, trial=stream_id)


def noise_lattice_step(d: Optional[DriveSpec], cfg: PropagatorConfig) -> float:
    """Lattice spacing for noisy propagation: explicit substep, else the drive substep, else the default."""
    if cfg.substep is not None:
        return cfg.substep
    if d is not None:
        return d.period / cfg.steps_per_period
    return NOISE_CONFIG["undriven_substep"]


class NoisyPropagator:
    """Piecewise-constant propagation of H_0 + h(t) D + sum B_m^i(t) sigma_m^i for one trial."""

    def __init__(self, base: np.ndarray, drive_op: Optional[np.ndarray], drive: Optional[DriveSpec],
                 trajectory: OUTrajectory, n_sites: int, delta: float):
        self.base = base
        self.drive_op = drive_op
        self.drive = drive
        self.trajectory = trajectory
        self.n_sites = n_sites
        self.delta = delta

    def generator(self, k: int, tau: float) -> np.ndarray:
        h = self.base + local_field_matrix(self.n_sites, self.trajectory.field_terms(k))
        if self.drive is not None:
            t0 = k * self.delta
            h = h + step_average_field(self.drive, t0, t0 + tau) * self.drive_op
        return h

    def full_step(self, k: int, psi: np.ndarray) -> np.ndarray:
        return expm_multiply(-1j * self.delta * self.generator(k, self.delta), psi)

    def partial_step(self, k: int, tau: float, psi: np.ndarray) -> np.ndarray:
        return expm_multiply(-1j * tau * self.generator(k, tau), psi)


def evolve_noisy(m: ChainModel, d: Optional[DriveSpec], spec: NoiseSpec, psi0: PureState, grid: TimeGrid,
                 cfg: Optional[PropagatorConfig] = None,
                 hamiltonian: Optional[DenseOperator] = None) -> EvolutionResult:
    """
    Propagate one state per noise trial.

    The OU fields are held constant on each interval of the propagation
    lattice (spacing from noise_lattice_step), sampled at its left end.

    Args:
        m: Chain model
        d: Drive, or None for an undriven chain
        spec: Noise parameters
        psi0: Initial state
        grid: Sample times
        cfg: Propagator settings
        hamiltonian: Static part to use instead of the model's chain Hamiltonian
            (the effective chain, for example)

    Returns:
        EvolutionResult with states of shape (trials, samples, dim) and the
        per-trial OU trajectories
    """
    cfg = cfg or PropagatorConfig()
    base = (hamiltonian or build_static_hamiltonian(m)).matrix
    if base.shape[0] != psi0.dim:
        raise ShapeError("Hamiltonian and state dimensions differ", expected=base.shape[0], actual=psi0.dim)
    drive_op = drive_operator(m.n_sites, d.axis).matrix if d is not None else None
    delta = noise_lattice_step(d, cfg)
    n_points = int(math.floor(grid.t_end / delta + 1e-9)) + 1
    lattice = TimeGrid(np.arange(n_points) * delta)

    def run_trial(trial: int):
        trajectory = sample_ou(spec, lattice, trial, m.n_sites)
        propagator = NoisyPropagator(base, drive_op, d, trajectory, m.n_sites, delta)
        states = walk_lattice(psi0.amplitudes, grid.samples, delta, propagator.full_step, propagator.partial_step)
        logger.debug(f"Noise trial {trial} finished ({n_points} lattice points)")
        return states, trajectory

    workers = max(1, int(SIMULATION_CONFIG["max_workers"]))
    logger.info(f"Running {spec.trials} noise trials on axes {','.join(spec.axes)} with {workers} worker(s)")
    if workers == 1:
        outcomes = [run_trial(trial) for trial in range(spec.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_trial, range(spec.trials)))

    states = np.stack([states for states, _ in outcomes])
    check_normalization(states, "Noisy")
    meta = {
        "mode": "noisy_driven" if d is not None else "noisy",
        "trials": spec.trials,
        "master_seed": spec.master_seed,
        "axes": list(spec.axes),
        "substep": delta,
        "average": spec.average,
    }
    return EvolutionResult(grid=grid, states=states, meta=meta, trajectories=[t for _, t in outcomes])


def decoupling_residual(d: DriveSpec, axes: Sequence[str],
                        per_axis_amplitude: Union[float, Mapping[str, float]] = 1.0,
                        nodes: Optional[int] = None) -> float:
    """
    Operator norm of the one-period average of U_c(t)^dag G U_c(t) for a
    static single-site noise generator G = sum_m b_m sigma_m.

    A transverse component is scaled by the period average of cos(2 g sin(wt)/w),
    i.e. by J0(2g/w); a component along the drive axis is left unchanged.

    Args:
        d: Drive
        axes: Noise axes
        per_axis_amplitude: One amplitude for every axis, or a mapping axis -> amplitude
        nodes: Quadrature nodes over the period (rectangle rule)

    Returns:
        The residual norm
    """
    nodes = SIMULATION_CONFIG["decoupling_nodes"] if nodes is None else nodes
    generator = np.zeros((2, 2), dtype=complex)
    for axis in axes:
        axis = axis.upper()
        amplitude = per_axis_amplitude[axis] if isinstance(per_axis_amplitude, Mapping) else per_axis_amplitude
        generator += amplitude * PAULI_MATRICES[axis]
    average = np.zeros((2, 2), dtype=complex)
    for k in range(nodes):
        u = control_frame_unitary(d, 1, k * d.period / nodes).matrix
        average += u.conj().T @ generator @ u
    return float(np.linalg.norm(average / nodes, 2))
