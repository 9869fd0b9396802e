"""
Chain models for chaindrive

Builds the static chain Hamiltonians, the driven time-dependent chain
H(t) = H_static + g cos(wt) sum_i sigma_axis^i, and the zeroth-order
rotating-frame effective chains weighted by A = J0(4g/w). Also calibrates
the drive amplitude that reaches a requested A.
"""

from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import j0, jn_zeros

from ..config import SIMULATION_CONFIG
from ..exceptions import ModelError, UnsupportedTransform, CalibrationError
from ..logger import get_logger
from ..schemas import ChainModel, DriveSpec
from .operators import (
    PAULI_MATRICES, DenseOperator, PauliString, build_pauli_operator, sum_operators, drive_operator
)

# Get logger
logger = get_logger()

# The first minimum of J0 sits at the first zero of J1; [0, J0_MIN_ARG] is the
# monotone branch the calibration searches.
J0_MIN_ARG = float(jn_zeros(1, 1)[0])
J0_MIN = float(j0(J0_MIN_ARG))


def validate_model(m: ChainModel) -> None:
    """Raise ModelError when coupling arrays do not fit the model family."""
    n = m.n_sites
    if len(m.jx) != n - 1:
        raise ModelError(f"{m.family} chain with N={n} needs {n - 1} couplings, got {len(m.jx)}", family=m.family)
    if m.family == "xy":
        if len(m.jy) != n - 1:
            raise ModelError(f"xy chain with N={n} needs {n - 1} J_y couplings, got {len(m.jy)}", family=m.family)
    elif m.jy:
        raise ModelError(f"{m.family} chain takes no J_y couplings", family=m.family)
    if m.family == "ising_nnn":
        if n < 3:
            raise ModelError("ising_nnn chain needs at least 3 sites", family=m.family)
        if len(m.l_nnn) != n - 2:
            raise ModelError(f"ising_nnn chain with N={n} needs {n - 2} L couplings, got {len(m.l_nnn)}", family=m.family)
    elif m.l_nnn:
        raise ModelError(f"{m.family} chain takes no next-nearest-neighbor couplings", family=m.family)
    if m.family != "xy_gamma" and m.gamma != 0.0:
        raise ModelError(f"{m.family} chain takes no anisotropy parameter", family=m.family)
    values = np.array(m.jx + m.jy + m.l_nnn + (m.gamma,), dtype=float)
    if not np.all(np.isfinite(values)):
        raise ModelError("Couplings must be finite", family=m.family)


def _bond(n_sites: int, i: int, j: int, axis: str, coefficient: float) -> DenseOperator:
    return build_pauli_operator(PauliString(n_sites, {i: axis, j: axis}, coefficient))


@lru_cache(maxsize=32)
def build_static_hamiltonian(m: ChainModel) -> DenseOperator:
    """
    Build the undriven chain Hamiltonian.

    ising:     sum J_i X_i X_{i+1}
    xy:        sum J_x^i X_i X_{i+1} + J_y^i Y_i Y_{i+1}
    xy_gamma:  sum J_i [(gamma+1) X_i X_{i+1} + (1-gamma) Y_i Y_{i+1}]
    ising_nnn: sum J_i X_i X_{i+1} + sum (L_i/N) X_i X_{i+2}
    """
    validate_model(m)
    n = m.n_sites
    terms: List[DenseOperator] = []
    for i, j in enumerate(m.jx, start=1):
        if m.family == "xy_gamma":
            terms.append(_bond(n, i, i + 1, "X", j * (m.gamma + 1.0)))
            terms.append(_bond(n, i, i + 1, "Y", j * (1.0 - m.gamma)))
        else:
            terms.append(_bond(n, i, i + 1, "X", j))
        if m.family == "xy":
            terms.append(_bond(n, i, i + 1, "Y", m.jy[i - 1]))
    for i, l in enumerate(m.l_nnn, start=1):
        terms.append(_bond(n, i, i + 2, "X", l / n))
    logger.debug(f"Built static {m.family} Hamiltonian for N={n} from {len(terms)} terms")
    return sum_operators(terms)


def drive_value(d: DriveSpec, t):
    """h(t) = g cos(wt); accepts scalars or arrays."""
    return d.g * np.cos(d.omega * t)


def driven_hamiltonian(m: ChainModel, d: DriveSpec, t: float) -> DenseOperator:
    """H(t) = H_static + h(t) sum_i sigma_axis^i."""
    return build_static_hamiltonian(m) + float(drive_value(d, t)) * drive_operator(m.n_sites, d.axis)


def bessel_j0(x: float) -> float:
    """Zeroth Bessel function of the first kind."""
    return float(j0(x))


def bessel_j0_zero(k: int = 1) -> float:
    """The k-th positive zero of J0."""
    if k < 1:
        raise ValueError(f"Zero index must be at least 1, got {k}")
    return float(jn_zeros(0, k)[k - 1])


def bessel_weight(d: DriveSpec) -> float:
    """A = J0(4g/w)."""
    return bessel_j0(4.0 * d.g / d.omega)


def calibrate_drive(target_A: float, omega: float) -> float:
    """
    Find the smallest amplitude g >= 0 with J0(4g/w) = target_A.

    The search runs on the monotone branch of J0 between 0 and its first
    minimum, so reachable weights are J0_MIN <= A <= 1.

    Args:
        target_A: The requested Bessel weight
        omega: Drive angular frequency

    Returns:
        The drive amplitude g

    Raises:
        CalibrationError: If target_A cannot be reached or omega is not positive
    """
    if omega <= 0:
        raise CalibrationError(f"Drive frequency must be positive, got {omega}", target=target_A)
    if not J0_MIN <= target_A <= 1.0:
        raise CalibrationError(
            f"Bessel weight {target_A} outside the reachable range [{J0_MIN:.6f}, 1]",
            target=target_A
        )
    if target_A == 1.0:
        x = 0.0
    elif target_A == 0.0:
        x = bessel_j0_zero(1)
    elif target_A == J0_MIN:
        x = J0_MIN_ARG
    else:
        x = brentq(lambda v: j0(v) - target_A, 0.0, J0_MIN_ARG, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    g = omega * x / 4.0
    logger.debug(f"Calibrated drive: A={target_A} at w={omega} needs g={g:.12g}")
    return g


def _ising_z(m: ChainModel, A: float) -> List[DenseOperator]:
    n = m.n_sites
    terms = []
    for i, j in enumerate(m.jx, start=1):
        terms.append(_bond(n, i, i + 1, "X", j / 2 * (A + 1)))
        terms.append(_bond(n, i, i + 1, "Y", -j / 2 * (A - 1)))
    return terms


def _xy_z(m: ChainModel, A: float) -> List[DenseOperator]:
    n = m.n_sites
    terms = []
    for i, (jx, jy) in enumerate(zip(m.jx, m.jy), start=1):
        terms.append(_bond(n, i, i + 1, "X", 0.5 * (jx * (A + 1) - jy * (A - 1))))
        terms.append(_bond(n, i, i + 1, "Y", 0.5 * (jy * (A + 1) - jx * (A - 1))))
    return terms


def _xy_y(m: ChainModel, A: float) -> List[DenseOperator]:
    n = m.n_sites
    terms = []
    for i, (jx, jy) in enumerate(zip(m.jx, m.jy), start=1):
        terms.append(_bond(n, i, i + 1, "X", 0.5 * jx * (A + 1)))
        terms.append(_bond(n, i, i + 1, "Z", -0.5 * jx * (A - 1)))
        terms.append(_bond(n, i, i + 1, "Y", jy))
    return terms


def _xy_gamma_y(m: ChainModel, A: float) -> List[DenseOperator]:
    n = m.n_sites
    gamma = m.gamma
    terms = []
    for i, j in enumerate(m.jx, start=1):
        terms.append(_bond(n, i, i + 1, "X", j / 2 * (gamma + 1) * (A + 1)))
        terms.append(_bond(n, i, i + 1, "Z", -j / 2 * (gamma + 1) * (A - 1)))
        terms.append(_bond(n, i, i + 1, "Y", j * (1 - gamma)))
    return terms


def _ising_nnn_z(m: ChainModel, A: float) -> List[DenseOperator]:
    n = m.n_sites
    terms = _ising_z(m, A)
    for i, l in enumerate(m.l_nnn, start=1):
        terms.append(_bond(n, i, i + 2, "X", l / (2 * n) * (A + 1)))
        terms.append(_bond(n, i, i + 2, "Y", -l / (2 * n) * (A - 1)))
    return terms


# (family, drive axis) -> builder of the effective bond terms
EFFECTIVE_BUILDERS: Dict[Tuple[str, str], Callable[[ChainModel, float], List[DenseOperator]]] = {
    ("ising", "Z"): _ising_z,
    ("xy", "Z"): _xy_z,
    ("xy", "Y"): _xy_y,
    ("xy_gamma", "Y"): _xy_gamma_y,
    ("ising_nnn", "Z"): _ising_nnn_z,
}


def supports_effective(family: str, axis: str) -> bool:
    return (family, axis.upper()) in EFFECTIVE_BUILDERS


def effective_hamiltonian(m: ChainModel, d: DriveSpec) -> DenseOperator:
    """
    Build the zeroth-order effective Hamiltonian of the driven chain.

    Raises:
        UnsupportedTransform: If no effective form exists for (family, drive axis)
    """
    builder = EFFECTIVE_BUILDERS.get((m.family, d.axis))
    if builder is None:
        raise UnsupportedTransform(
            f"No effective Hamiltonian for a {m.family} chain driven along {d.axis}",
            family=m.family, axis=d.axis
        )
    validate_model(m)
    A = bessel_weight(d)
    logger.debug(f"Effective {m.family} chain under {d.axis} drive with A={A:.6g}")
    return sum_operators(builder(m, A))


def control_frame_unitary(d: DriveSpec, n_sites: int, t: float) -> DenseOperator:
    """
    U_c(t) = exp(-i g sin(wt)/w sum_i sigma_axis^i), built as the N-fold
    tensor power of the single-site rotation cos(theta) I - i sin(theta) sigma.
    """
    theta = d.g * np.sin(d.omega * t) / d.omega
    single = np.cos(theta) * np.eye(2, dtype=complex) - 1j * np.sin(theta) * PAULI_MATRICES[d.axis]
    full = single
    for _ in range(n_sites - 1):
        full = np.kron(full, single)
    return DenseOperator(full)


def frame_averaged_hamiltonian(m: ChainModel, d: DriveSpec, nodes: Optional[int] = None) -> DenseOperator:
    """
    Average U_c(t)^dag H_static U_c(t) over one drive period by the
    rectangle rule on `nodes` equally spaced points.
    """
    nodes = SIMULATION_CONFIG["quadrature_nodes"] if nodes is None else nodes
    h_static = build_static_hamiltonian(m).matrix
    total = np.zeros_like(h_static)
    for k in range(nodes):
        u = control_frame_unitary(d, m.n_sites, k * d.period / nodes).matrix
        total += u.conj().T @ h_static @ u
    return DenseOperator(total / nodes)


def max_coupling(m: ChainModel) -> float:
    """Largest coupling magnitude of the chain."""
    values = [abs(v) for v in m.jx + m.jy + m.l_nnn]
    if m.family == "xy_gamma":
        values = [abs(v) * max(abs(1 + m.gamma), abs(1 - m.gamma)) for v in m.jx]
    return max(values) if values else 0.0


def is_high_frequency(m: ChainModel, d: DriveSpec) -> bool:
    """True when w reaches the configured multiple of the largest coupling; warns otherwise."""
    ratio = SIMULATION_CONFIG["high_frequency_ratio"]
    scale = max_coupling(m)
    ok = scale == 0.0 or d.omega >= ratio * scale
    if not ok:
        logger.warning(
            f"Drive frequency {d.omega:.6g} is below {ratio:g} x max coupling {scale:.6g}; "
            f"the effective description may not hold"
        )
    return ok
