"""
Scenario runner for chaindrive

Executes the comparison runs of a scenario (driven chain, effective chain,
undriven chain and their noisy counterparts) and reduces each trajectory to
the scenario's observable on the sample grid.
"""

import time
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from ..exceptions import ChainDriveError, ConvergenceWarning, RunError
from ..logger import get_logger
from ..modules.dynamics import EvolutionResult, TimeGrid, evolve_constant, evolve_driven, stroboscopic_times, uniform_times
from ..modules.models import build_static_hamiltonian, effective_hamiltonian, is_high_frequency
from ..modules.noise import evolve_noisy, noise_lattice_step
from ..modules.observables import pair_concurrence_series, superposition_fidelity_series, transfer_fidelity_series
from ..modules.operators import PureState, basis_product_state, superposition_state
from ..schemas import Scenario

# Get logger
logger = get_logger()


@dataclass
class RunRecord:
    """Observable values of one comparison run, aligned with its sample times."""
    scenario: str
    label: str
    times: np.ndarray
    values: np.ndarray
    converged: bool = True
    high_frequency: Optional[bool] = None
    seed: Optional[int] = None
    wall_time: float = 0.0

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise ValueError(f"Run '{self.label}' has {self.values.size} values for {self.times.size} samples")

    def peak(self):
        """(time, value) of the largest observable value."""
        index = int(np.argmax(self.values))
        return float(self.times[index]), float(self.values[index])


def scenario_grid(s: Scenario) -> TimeGrid:
    """Sample times of a scenario."""
    if s.grid.kind == "stroboscopic":
        return stroboscopic_times(s.drive.omega, s.grid.horizon)
    return uniform_times(s.grid.horizon, s.grid.samples)


def initial_state(s: Scenario) -> PureState:
    n = s.model.n_sites
    if s.task.alpha is not None:
        return superposition_state(n, s.task.alpha, s.task.beta, s.task.basis)
    return basis_product_state(n, s.task.initial, s.task.basis)


def _observable(s: Scenario) -> Callable[[EvolutionResult], np.ndarray]:
    n = s.model.n_sites
    task = s.task
    if task.kind == "concurrence":
        mode = s.noise.average if s.noise is not None else None
        return lambda result: pair_concurrence_series(result, task.pair, mode=mode).values
    if task.alpha is not None:
        zero_state = basis_product_state(n, "1" * (n - 1) + "0", task.basis)
        one_state = basis_product_state(n, "1" * n, task.basis)
        return lambda result: superposition_fidelity_series(result, task.alpha, task.beta, zero_state, one_state)
    target = basis_product_state(n, task.target, task.basis)
    return lambda result: transfer_fidelity_series(result, target)


def _paired_config(s: Scenario):
    """Noise lattice of undriven noisy runs, aligned with the driven lattice when a drive exists."""
    if s.drive is None or s.propagator.substep is not None:
        return s.propagator
    return s.propagator.model_copy(update={"substep": noise_lattice_step(s.drive, s.propagator)})


def _evolve(s: Scenario, label: str, psi0: PureState, grid: TimeGrid) -> EvolutionResult:
    m, d = s.model, s.drive
    if label == "driven":
        return evolve_driven(m, d, psi0, grid, s.propagator)
    if label == "effective":
        return evolve_constant(effective_hamiltonian(m, d), psi0, grid)
    if label == "undriven":
        return evolve_constant(build_static_hamiltonian(m), psi0, grid)
    if label == "noisy_driven":
        return evolve_noisy(m, d, s.noise, psi0, grid, s.propagator)
    if label == "noisy_effective":
        return evolve_noisy(m, None, s.noise, psi0, grid, _paired_config(s),
                            hamiltonian=effective_hamiltonian(m, d))
    if label == "noisy_undriven":
        return evolve_noisy(m, None, s.noise, psi0, grid, _paired_config(s))
    raise RunError(f"Unknown run kind '{label}'", run_label=label)


def run_scenario(s: Scenario) -> List[RunRecord]:
    """
    Execute every comparison run of a scenario.

    Args:
        s: A resolved scenario

    Returns:
        One RunRecord per run, in the scenario's run order

    Raises:
        RunError: If a run fails; the run label is attached
    """
    grid = scenario_grid(s)
    psi0 = initial_state(s)
    observable = _observable(s)
    high_frequency = is_high_frequency(s.model, s.drive) if s.drive is not None else None
    logger.info(f"Running scenario '{s.name}' with {len(s.runs)} run(s) on {len(grid)} samples")

    records = []
    for label in s.runs:
        started = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                result = _evolve(s, label, psi0, grid)
            values = np.asarray(observable(result), dtype=float)
        except ChainDriveError as e:
            logger.error(f"Run '{label}' of scenario '{s.name}' failed: {str(e)}")
            raise RunError(f"Run '{label}' failed: {str(e)}", run_label=label) from e
        converged = bool(result.meta.get("converged", True))
        record = RunRecord(
            scenario=s.name,
            label=label,
            times=np.array(grid.samples),
            values=values,
            converged=converged,
            high_frequency=high_frequency if label in ("driven", "noisy_driven") else None,
            seed=s.noise.master_seed if label.startswith("noisy") else None,
            wall_time=time.perf_counter() - started,
        )
        logger.info(f"Run '{label}' finished in {record.wall_time:.2f}s (peak {record.peak()[1]:.6f})")
        if not converged:
            logger.warning(f"Run '{label}' is flagged unconverged")
        records.append(record)
    return records


def apply_overrides(s: Scenario, seed: Optional[int] = None, omega_scale: Optional[float] = None) -> Scenario:
    """
    Return a copy of a scenario with a new noise seed and/or a scaled drive.

    omega_scale multiplies both w and g, keeping A = J0(4g/w) fixed.
    """
    update: Dict[str, object] = {}
    if seed is not None and s.noise is not None:
        if seed < 0:
            raise RunError(f"seed must be non-negative, got {seed}", run_label="noise")
        update["noise"] = s.noise.model_copy(update={"master_seed": seed})
    if omega_scale is not None and s.drive is not None:
        if omega_scale <= 0:
            raise RunError(f"omega scale must be positive, got {omega_scale}", run_label="drive")
        update["drive"] = s.drive.model_copy(
            update={"omega": s.drive.omega * omega_scale, "g": s.drive.g * omega_scale}
        )
    return s.model_copy(update=update) if update else s
