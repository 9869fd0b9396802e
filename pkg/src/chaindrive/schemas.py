"""
Schema definitions for chaindrive

Declarative descriptions of chains, drives, noise and scenarios. These are
validated on construction and immutable afterwards; numerical objects built
from them live in the modules package.
"""

import math
from typing import Optional, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import SIMULATION_CONFIG, NOISE_CONFIG

Axis = Literal["X", "Y", "Z"]
Family = Literal["ising", "xy", "xy_gamma", "ising_nnn"]
RunKind = Literal["driven", "effective", "undriven", "noisy_driven", "noisy_effective", "noisy_undriven"]

DRIVEN_RUNS = ("driven", "effective", "noisy_driven", "noisy_effective")
NOISY_RUNS = ("noisy_driven", "noisy_effective", "noisy_undriven")


def _upper(value):
    return value.upper() if isinstance(value, str) else value


class CouplingProfile(BaseModel):
    """Schema for a per-bond coupling profile before it is expanded to an array."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform", "pst", "explicit"] = Field(
        description="uniform value, perfect-state-transfer profile sqrt(i(N-i)), or explicit array"
    )
    value: float = Field(1.0, description="Coupling used by the uniform profile")
    values: Tuple[float, ...] = Field(default=(), description="Couplings used by the explicit profile")

    def expand(self, n_sites: int, n_bonds: int) -> Tuple[float, ...]:
        """Expand to one coupling per bond (bond i joins sites i and i+1, or i and i+2)."""
        if self.kind == "uniform":
            return (float(self.value),) * n_bonds
        if self.kind == "pst":
            return tuple(math.sqrt(i * (n_sites - i)) for i in range(1, n_bonds + 1))
        return tuple(float(v) for v in self.values)


class ChainModel(BaseModel):
    """Schema describing an open spin-1/2 chain and its couplings."""
    model_config = ConfigDict(frozen=True)

    n_sites: int = Field(description="Number of spins N", ge=2, le=12)
    family: Family = Field(description="Model family: ising, xy, xy_gamma or ising_nnn")
    jx: Tuple[float, ...] = Field(description="Nearest-neighbor couplings J_x^i (J_i for ising, ising_nnn, xy_gamma)")
    jy: Tuple[float, ...] = Field(default=(), description="Nearest-neighbor couplings J_y^i (xy only)")
    gamma: float = Field(0.0, description="Anisotropy parameter (xy_gamma only)")
    l_nnn: Tuple[float, ...] = Field(default=(), description="Next-nearest-neighbor couplings L_i (ising_nnn only)")

    @classmethod
    def from_profiles(cls, family: str, n_sites: int, jx: CouplingProfile,
                      jy: Optional[CouplingProfile] = None, gamma: float = 0.0,
                      l_nnn: Optional[CouplingProfile] = None) -> "ChainModel":
        """Build a model by expanding coupling profiles to bond arrays."""
        return cls(
            n_sites=n_sites,
            family=family,
            jx=jx.expand(n_sites, n_sites - 1),
            jy=jy.expand(n_sites, n_sites - 1) if jy is not None else (),
            gamma=gamma,
            l_nnn=l_nnn.expand(n_sites, n_sites - 2) if l_nnn is not None else (),
        )


class DriveSpec(BaseModel):
    """Schema for the sinusoidal control field h(t) = g cos(omega t) along one axis."""
    model_config = ConfigDict(frozen=True)

    axis: Axis = Field(description="Axis of the control field")
    g: float = Field(description="Drive amplitude g")
    omega: float = Field(description="Angular frequency omega", gt=0.0)

    _normalize_axis = field_validator("axis", mode="before")(_upper)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


class NoiseSpec(BaseModel):
    """Schema for local Ornstein-Uhlenbeck field noise."""
    model_config = ConfigDict(frozen=True)

    mu: float = Field(NOISE_CONFIG["mu"], description="Mean of the OU process")
    sigma: float = Field(NOISE_CONFIG["sigma"], description="Stationary standard deviation", ge=0.0)
    tau: float = Field(NOISE_CONFIG["tau"], description="Correlation time", gt=0.0)
    axes: Tuple[Axis, ...] = Field(description="Axes carrying noise on every site", min_length=1)
    trials: int = Field(NOISE_CONFIG["trials"], description="Number of noise realisations", ge=1)
    master_seed: int = Field(NOISE_CONFIG["master_seed"], description="Seed all streams derive from", ge=0)
    average: Literal["observable", "state"] = Field(
        NOISE_CONFIG["average"],
        description="Average nonlinear observables per trial ('observable') or compute them on the averaged state"
    )

    @field_validator("axes", mode="before")
    @classmethod
    def _normalize_axes(cls, value):
        if isinstance(value, str):
            value = [part for part in value.replace(",", " ").split()]
        return tuple(_upper(v) for v in value)

    @field_validator("axes")
    @classmethod
    def _distinct_axes(cls, value):
        if len(set(value)) != len(value):
            raise ValueError("noise axes must be distinct")
        return value


class PropagatorConfig(BaseModel):
    """Schema for the piecewise-constant midpoint propagator."""
    model_config = ConfigDict(frozen=True)

    steps_per_period: int = Field(SIMULATION_CONFIG["steps_per_period"], description="Substeps per drive period", ge=16)
    convergence_tol: float = Field(SIMULATION_CONFIG["convergence_tol"], description="Allowed final-state infidelity change on doubling", gt=0.0)
    check_convergence: bool = Field(True, description="Repeat driven propagation at doubled resolution and compare")
    substep: Optional[float] = Field(None, description="Noise lattice step when no drive period defines one", gt=0.0)

    @field_validator("steps_per_period")
    @classmethod
    def _even_steps(cls, value):
        if value % 2:
            raise ValueError("steps_per_period must be even")
        return value


class TaskSpec(BaseModel):
    """Schema for what a scenario measures: a transfer fidelity or a pair concurrence."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["transfer", "concurrence"] = Field(description="Observable family")
    basis: Literal["Y", "Z"] = Field("Z", description="Single-site basis of initial and target states")
    initial: Optional[str] = Field(None, description="Initial bit string; defaults to the first site flipped")
    target: Optional[str] = Field(None, description="Target bit string; defaults to the last site flipped")
    pair: Optional[Tuple[int, int]] = Field(None, description="Site pair for concurrence; defaults to the chain ends")
    alpha: Optional[float] = Field(None, description="Amplitude of |0> on the first site for superposition transfer")
    beta: Optional[float] = Field(None, description="Amplitude of |1> on the first site for superposition transfer")

    _normalize_basis = field_validator("basis", mode="before")(_upper)

    @field_validator("initial", "target")
    @classmethod
    def _bit_string(cls, value):
        if value is not None and (not value or set(value) - {"0", "1"}):
            raise ValueError("bit strings may only contain 0 and 1")
        return value

    @model_validator(mode="after")
    def _superposition_pair(self):
        if (self.alpha is None) != (self.beta is None):
            raise ValueError("alpha and beta must be given together")
        if self.alpha is not None:
            if self.kind != "transfer":
                raise ValueError("superposition amplitudes only apply to transfer tasks")
            if not math.isclose(self.alpha ** 2 + self.beta ** 2, 1.0, rel_tol=0.0, abs_tol=1e-9):
                raise ValueError("alpha^2 + beta^2 must equal 1")
        return self


class GridSpec(BaseModel):
    """Schema for the sample times of a scenario."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["stroboscopic", "uniform"] = Field(description="Drive-period multiples or evenly spaced samples")
    horizon: float = Field(description="Last sample time", gt=0.0)
    samples: int = Field(201, description="Number of samples (uniform grids)", ge=2)


class Scenario(BaseModel):
    """Schema for a fully resolved scenario: one figure's paired simulations."""
    model_config = ConfigDict(frozen=True)

    name: str = Field(description="Scenario name, used for output file names", pattern=r"^[A-Za-z0-9_.-]+$")
    model: ChainModel
    drive: Optional[DriveSpec] = None
    noise: Optional[NoiseSpec] = None
    runs: Tuple[RunKind, ...] = Field(description="Comparison runs in output column order", min_length=1)
    task: TaskSpec
    grid: GridSpec
    propagator: PropagatorConfig = Field(default_factory=PropagatorConfig)

    @model_validator(mode="after")
    def _runs_resolvable(self):
        if len(set(self.runs)) != len(self.runs):
            raise ValueError("runs must not repeat")
        for run in self.runs:
            if run in DRIVEN_RUNS and self.drive is None:
                raise ValueError(f"run '{run}' needs a drive")
            if run in NOISY_RUNS and self.noise is None:
                raise ValueError(f"run '{run}' needs noise")
        if self.grid.kind == "stroboscopic" and self.drive is None:
            raise ValueError("stroboscopic grids need a drive")
        n = self.model.n_sites
        for bits in (self.task.initial, self.task.target):
            if bits is not None and len(bits) != n:
                raise ValueError(f"bit string '{bits}' must have {n} sites")
        if self.task.pair is not None:
            a, b = self.task.pair
            if a == b or not (1 <= a <= n and 1 <= b <= n):
                raise ValueError(f"pair {self.task.pair} must be two distinct sites in 1..{n}")
        return self
