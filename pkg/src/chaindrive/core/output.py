"""
Result output for chaindrive

CSV files of run records, a YAML metadata sidecar, and a plain-text summary.
"""

import csv
import os
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import yaml

from .. import __version__
from ..config import OUTPUT_CONFIG, get_value_format
from ..exceptions import OutputError
from ..logger import get_logger
from ..schemas import Scenario
from .runner import RunRecord
from .scenario import dump_scenario

# Get logger
logger = get_logger()


def _write_rows(path: Path, header: List[str], columns: Sequence[np.ndarray]) -> None:
    spec = get_value_format()
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([format(float(v), spec) for v in row])


def _shared_grid(records: Sequence[RunRecord]) -> bool:
    first = records[0].times
    return all(r.times.shape == first.shape and np.array_equal(r.times, first) for r in records[1:])


def emit_csv(records: Sequence[RunRecord], destination: Optional[str] = None,
             scenario: Optional[Scenario] = None) -> List[Path]:
    """
    Write run records as CSV.

    Records on a common grid go to one `<name>.csv` with columns
    `t,<label>...`; otherwise each record gets `<name>_<label>.csv`. When the
    scenario is given a `<name>.meta.yaml` sidecar is written as well.

    Args:
        records: Non-empty list of records from one scenario
        destination: Output directory (created if missing)
        scenario: The resolved scenario the records came from

    Returns:
        Paths of the files written
    """
    if not records:
        raise OutputError("No run records to emit")
    names = {r.scenario for r in records}
    if len(names) != 1:
        raise OutputError(f"Records belong to several scenarios: {sorted(names)}")
    name = records[0].scenario
    directory = Path(destination or OUTPUT_CONFIG["output_dir"])
    written = []
    try:
        os.makedirs(directory, exist_ok=True)
        if _shared_grid(records):
            path = directory / f"{name}.csv"
            _write_rows(path, ["t"] + [r.label for r in records], [records[0].times] + [r.values for r in records])
            written.append(path)
        else:
            for record in records:
                path = directory / f"{name}_{record.label}.csv"
                _write_rows(path, ["t", record.label], [record.times, record.values])
                written.append(path)

        if scenario is not None:
            written.append(write_metadata(records, scenario, directory))
    except OSError as e:
        logger.error(f"Could not write results to {directory}: {str(e)}")
        raise OutputError(f"Cannot write results to {directory}: {e}")
    for path in written:
        logger.info(f"Wrote {path}")
    return written


def run_summary(record: RunRecord) -> dict:
    peak_time, peak_value = record.peak()
    return {
        "label": record.label,
        "peak": float(peak_value),
        "peak_time": float(peak_time),
        "final": float(record.values[-1]),
        "converged": bool(record.converged),
        "high_frequency": record.high_frequency,
        "seed": record.seed,
        "samples": int(record.times.size),
    }


def write_metadata(records: Sequence[RunRecord], scenario: Scenario, directory: Path) -> Path:
    """Write the resolved scenario, seeds, library version and per-run summary next to the CSV."""
    path = Path(directory) / f"{scenario.name}{OUTPUT_CONFIG['metadata_suffix']}"
    metadata = {
        "library": "chaindrive",
        "version": __version__,
        "scenario": dump_scenario(scenario),
        "noise_average": scenario.noise.average if scenario.noise is not None else None,
        "seeds": sorted({r.seed for r in records if r.seed is not None}),
        "runs": [run_summary(r) for r in records],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        yaml.safe_dump(metadata, handle, sort_keys=False, default_flow_style=False)
    return path


def format_summary(records: Sequence[RunRecord]) -> str:
    """Plain-text table of peak, peak time and final value per run."""
    lines = [f"{'run':<16} {'peak':>10} {'t_peak':>10} {'final':>10}  flags"]
    for record in records:
        summary = run_summary(record)
        flags = []
        if not summary["converged"]:
            flags.append("unconverged")
        if summary["high_frequency"] is False:
            flags.append("low-frequency")
        if summary["seed"] is not None:
            flags.append(f"seed={summary['seed']}")
        lines.append(
            f"{summary['label']:<16} {summary['peak']:>10.6f} {summary['peak_time']:>10.4f} "
            f"{summary['final']:>10.6f}  {' '.join(flags)}"
        )
    return "\n".join(lines)
