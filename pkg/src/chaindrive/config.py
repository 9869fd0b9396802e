"""
Configuration module for chaindrive

This module centralizes the numerical and I/O settings of the package so
that tolerances, defaults and output locations can be changed through the
environment (or a .env file) without touching simulation code.
"""

import os
from typing import Dict, Any

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Propagation and numerical tolerances
SIMULATION_CONFIG = {
    # Midpoint propagator
    "steps_per_period": int(os.environ.get("CHAINDRIVE_STEPS_PER_PERIOD", "64")),
    "convergence_tol": float(os.environ.get("CHAINDRIVE_CONVERGENCE_TOL", "1e-8")),

    # ω must exceed this multiple of the largest coupling for the
    # zeroth-order effective description to be trusted (advisory only)
    "high_frequency_ratio": float(os.environ.get("CHAINDRIVE_HIGH_FREQUENCY_RATIO", "20")),

    # Validity checks on operators and states
    "hermiticity_tol": 1e-10,
    "norm_tol": 1e-9,
    "psd_tol": 1e-9,
    "conservation_tol": 1e-10,

    # Quadrature resolution for period averages
    "quadrature_nodes": 512,
    "decoupling_nodes": 1024,

    # Concurrent noise trials (1 = sequential)
    "max_workers": int(os.environ.get("CHAINDRIVE_MAX_WORKERS", "1")),
}

# Ornstein-Uhlenbeck noise defaults
NOISE_CONFIG = {
    "mu": 0.0,
    "sigma": 0.5,
    "tau": 0.005,
    "trials": 20,
    "master_seed": int(os.environ.get("CHAINDRIVE_SEED", "20240101")),

    # Substep used for the noise lattice when no drive period is available
    "undriven_substep": float(os.environ.get("CHAINDRIVE_UNDRIVEN_SUBSTEP", "2.5e-4")),

    # How nonlinear observables are averaged: "observable" or "state"
    "average": os.environ.get("CHAINDRIVE_NOISE_AVERAGE", "observable"),
}

# Result files
OUTPUT_CONFIG = {
    "output_dir": os.environ.get("CHAINDRIVE_OUTPUT_DIR", "results"),
    "significant_digits": 12,
    "metadata_suffix": ".meta.yaml",
}

# Logging Configuration
LOGGING_CONFIG = {
    "log_level": os.environ.get("CHAINDRIVE_LOG_LEVEL", "INFO"),
    "log_file": os.environ.get("CHAINDRIVE_LOG_FILE", "chaindrive.log"),
    "console_logging": os.environ.get("CHAINDRIVE_CONSOLE_LOGGING", "True") == "True",
    "log_format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
}


def get_default_noise_parameters() -> Dict[str, Any]:
    """Get the OU parameters used when a scenario enables noise without overriding them."""
    return {
        "mu": NOISE_CONFIG["mu"],
        "sigma": NOISE_CONFIG["sigma"],
        "tau": NOISE_CONFIG["tau"],
        "trials": NOISE_CONFIG["trials"],
        "master_seed": NOISE_CONFIG["master_seed"],
        "average": NOISE_CONFIG["average"],
    }


def get_value_format() -> str:
    """Get the format spec used for floating values in result files."""
    return f".{OUTPUT_CONFIG['significant_digits']}g"
