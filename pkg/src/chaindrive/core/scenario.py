"""
Scenario files for chaindrive

A scenario is a flat list of `key = value` lines. `#` starts a comment,
blank lines are ignored, every key may appear once.

    name                          identifier used for output files
    model.family                  ising | xy | xy_gamma | ising_nnn
    model.n_sites                 integer >= 2
    model.jx, model.jy,           coupling profile: pst | uniform:<v> |
    model.l_nnn                   list:<v1>,<v2>,... | <v> (uniform)
    model.gamma                   float (xy_gamma)
    drive.axis                    x | y | z
    drive.omega                   float > 0, or
    drive.omega_per_coupling      w = value x largest coupling
    drive.g                       float, or
    drive.target_a                Bessel weight A; g is calibrated
    noise.enabled                 true | false (default false)
    noise.mu, noise.sigma,        OU parameters (defaults 0, 0.5, 0.005)
    noise.tau
    noise.axes                    e.g. x,y (default: axes transverse to the drive)
    noise.trials, noise.seed      integers (defaults 20 and the configured seed)
    noise.average                 observable | state
    task.kind                     transfer | concurrence
    task.basis                    z | y
    task.initial, task.target     bit strings (default 01..1 and 1..10)
    task.pair                     ends | adjacent | i,j (concurrence; default ends)
    task.alpha, task.beta         superposition amplitudes (transfer)
    grid.kind                     stroboscopic | uniform
    grid.horizon                  float > 0
    grid.samples                  integer (uniform grids, default 201)
    propagator.steps_per_period   even integer >= 16 (default 64)
    propagator.convergence_tol    float (default 1e-8)
    propagator.check_convergence  true | false
    propagator.substep            noise lattice step when no drive is present
    runs                          comma list of driven, effective, undriven,
                                  noisy_driven, noisy_effective, noisy_undriven

dump_scenario writes a resolved scenario back in the same grammar, with
every derived value spelled out.
"""

import re
from typing import Any, Callable, Dict, Optional, Tuple

from pydantic import ValidationError

from ..config import get_default_noise_parameters
from ..exceptions import ChainDriveError, ParseError
from ..logger import get_logger
from ..modules.models import calibrate_drive, max_coupling, supports_effective, validate_model
from ..schemas import (
    ChainModel, CouplingProfile, DriveSpec, GridSpec, NoiseSpec, PropagatorConfig, Scenario, TaskSpec
)

# Get logger
logger = get_logger()

_FLOAT_LIST = re.compile(r"^\s*[-+0-9.eE]+(\s*,\s*[-+0-9.eE]+)*\s*$")


def _as_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected true or false, got '{value}'")


def _as_int(value: str) -> int:
    return int(value.strip())


def _as_float(value: str) -> float:
    return float(value.strip())


def _as_word(value: str) -> str:
    word = value.strip()
    if not word or " " in word:
        raise ValueError(f"expected a single word, got '{value}'")
    return word


def _as_coupling(value: str) -> CouplingProfile:
    text = value.strip()
    lowered = text.lower()
    if lowered == "pst":
        return CouplingProfile(kind="pst")
    if lowered.startswith("uniform:"):
        return CouplingProfile(kind="uniform", value=float(text.split(":", 1)[1]))
    if lowered.startswith("list:"):
        items = text.split(":", 1)[1]
        if not _FLOAT_LIST.match(items):
            raise ValueError(f"expected comma-separated numbers, got '{items}'")
        return CouplingProfile(kind="explicit", values=tuple(float(v) for v in items.split(",")))
    return CouplingProfile(kind="uniform", value=float(text))


def _as_list(value: str) -> Tuple[str, ...]:
    items = tuple(item.strip() for item in value.split(",") if item.strip())
    if not items:
        raise ValueError("expected a comma-separated list")
    return items


def _as_pair(value: str):
    text = value.strip().lower()
    if text in ("ends", "adjacent"):
        return text
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'ends', 'adjacent' or two site indices, got '{value}'")
    return int(parts[0]), int(parts[1])


KEY_TYPES: Dict[str, Callable[[str], Any]] = {
    "name": _as_word,
    "model.family": _as_word,
    "model.n_sites": _as_int,
    "model.jx": _as_coupling,
    "model.jy": _as_coupling,
    "model.gamma": _as_float,
    "model.l_nnn": _as_coupling,
    "drive.axis": _as_word,
    "drive.omega": _as_float,
    "drive.omega_per_coupling": _as_float,
    "drive.g": _as_float,
    "drive.target_a": _as_float,
    "noise.enabled": _as_bool,
    "noise.mu": _as_float,
    "noise.sigma": _as_float,
    "noise.tau": _as_float,
    "noise.axes": _as_list,
    "noise.trials": _as_int,
    "noise.seed": _as_int,
    "noise.average": _as_word,
    "task.kind": _as_word,
    "task.basis": _as_word,
    "task.initial": _as_word,
    "task.target": _as_word,
    "task.pair": _as_pair,
    "task.alpha": _as_float,
    "task.beta": _as_float,
    "grid.kind": _as_word,
    "grid.horizon": _as_float,
    "grid.samples": _as_int,
    "propagator.steps_per_period": _as_int,
    "propagator.convergence_tol": _as_float,
    "propagator.check_convergence": _as_bool,
    "propagator.substep": _as_float,
    "runs": _as_list,
}

# Schema field names that differ from their scenario keys
FIELD_KEYS = {
    ("noise", "master_seed"): "noise.seed",
}

TRANSVERSE_AXES = {"X": ("Y", "Z"), "Y": ("X", "Z"), "Z": ("X", "Y")}


class _Document:
    """Typed key/value pairs of a scenario file with the line each came from."""

    def __init__(self, values: Dict[str, Any], lines: Dict[str, int]):
        self.values = values
        self.lines = lines

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def has(self, key: str) -> bool:
        return key in self.values

    def line(self, key: str) -> Optional[int]:
        return self.lines.get(key)

    def section_line(self, section: str) -> Optional[int]:
        found = [line for key, line in self.lines.items() if key.split(".")[0] == section]
        return min(found) if found else None

    def fail(self, key: str, message: str) -> ParseError:
        line = self.line(key) or self.section_line(key.split(".")[0])
        return ParseError(message, line=line, field=key)


def _tokenize(text: str) -> _Document:
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ParseError("expected 'key = value'", line=number)
        key, value = (part.strip() for part in content.split("=", 1))
        key = key.lower()
        if key not in KEY_TYPES:
            raise ParseError("unknown key", line=number, field=key)
        if key in values:
            raise ParseError(f"duplicate key (first given on line {lines[key]})", line=number, field=key)
        if not value:
            raise ParseError("missing value", line=number, field=key)
        try:
            values[key] = KEY_TYPES[key](value)
        except ValueError as e:
            raise ParseError(f"invalid value '{value}': {e}", line=number, field=key)
        lines[key] = number
    return _Document(values, lines)


def _build(doc: _Document, section: str, cls, **kwargs):
    """Construct a schema object, mapping validation errors back to scenario keys."""
    try:
        return cls(**kwargs)
    except ValidationError as e:
        error = e.errors()[0]
        loc = error.get("loc") or ()
        field = str(loc[0]) if loc else None
        if field is None:
            key = section
        else:
            key = FIELD_KEYS.get((section, field), field if section == "scenario" else f"{section}.{field}")
        raise doc.fail(key, error.get("msg", str(e))) from e


def _require(doc: _Document, key: str):
    if not doc.has(key):
        raise ParseError("required key is missing", field=key)
    return doc.get(key)


def _parse_model(doc: _Document) -> ChainModel:
    n_sites = _require(doc, "model.n_sites")
    family = _require(doc, "model.family").lower()
    jx = _require(doc, "model.jx")
    profiles = {"jx": jx, "jy": doc.get("model.jy"), "l_nnn": doc.get("model.l_nnn")}
    if not isinstance(n_sites, int) or n_sites < 2:
        raise doc.fail("model.n_sites", "Input should be greater than or equal to 2")
    expanded = {}
    for name, profile in profiles.items():
        if profile is None:
            expanded[name] = ()
        else:
            bonds = n_sites - 2 if name == "l_nnn" else n_sites - 1
            expanded[name] = profile.expand(n_sites, bonds)
    model = _build(doc, "model", ChainModel, n_sites=n_sites, family=family,
                   gamma=doc.get("model.gamma", 0.0), **expanded)
    try:
        validate_model(model)
    except ChainDriveError as e:
        raise doc.fail("model.family", str(e)) from e
    return model


def _parse_drive(doc: _Document, model: ChainModel) -> Optional[DriveSpec]:
    keys = [k for k in doc.values if k.startswith("drive.")]
    if not keys:
        return None
    axis = _require(doc, "drive.axis").upper()
    if doc.has("drive.omega") == doc.has("drive.omega_per_coupling"):
        raise doc.fail("drive.omega", "give exactly one of drive.omega and drive.omega_per_coupling")
    if doc.has("drive.omega"):
        omega = doc.get("drive.omega")
    else:
        omega = doc.get("drive.omega_per_coupling") * max_coupling(model)
    if doc.has("drive.g") == doc.has("drive.target_a"):
        raise doc.fail("drive.g", "give exactly one of drive.g and drive.target_a")
    if doc.has("drive.g"):
        g = doc.get("drive.g")
    else:
        if omega <= 0:
            raise doc.fail("drive.omega", "drive frequency must be positive")
        try:
            g = calibrate_drive(doc.get("drive.target_a"), omega)
        except ChainDriveError as e:
            raise doc.fail("drive.target_a", str(e)) from e
    return _build(doc, "drive", DriveSpec, axis=axis, g=g, omega=omega)


def _parse_noise(doc: _Document, drive: Optional[DriveSpec]) -> Optional[NoiseSpec]:
    enabled = doc.get("noise.enabled", False)
    others = [k for k in doc.values if k.startswith("noise.") and k != "noise.enabled"]
    if not enabled:
        if others:
            raise doc.fail(others[0], "noise parameters given but noise.enabled is not true")
        return None
    params = get_default_noise_parameters()
    for key, name in (("noise.mu", "mu"), ("noise.sigma", "sigma"), ("noise.tau", "tau"),
                      ("noise.trials", "trials"), ("noise.seed", "master_seed"), ("noise.average", "average")):
        if doc.has(key):
            params[name] = doc.get(key)
    if doc.has("noise.axes"):
        axes = doc.get("noise.axes")
    else:
        axes = TRANSVERSE_AXES[drive.axis] if drive is not None else ("X", "Y", "Z")
    return _build(doc, "noise", NoiseSpec, axes=axes, **params)


def _parse_task(doc: _Document, model: ChainModel) -> TaskSpec:
    n = model.n_sites
    kind = _require(doc, "task.kind").lower()
    pair = doc.get("task.pair")
    if pair == "ends":
        pair = (1, n)
    elif pair == "adjacent":
        pair = (1, 2)
    if kind == "concurrence" and pair is None:
        pair = (1, n)
    if kind == "transfer" and pair is not None:
        raise doc.fail("task.pair", "a site pair only applies to concurrence tasks")
    initial = doc.get("task.initial", "0" + "1" * (n - 1))
    target = doc.get("task.target")
    if kind == "transfer" and target is None:
        target = "1" * (n - 1) + "0"
    if kind == "concurrence" and target is not None:
        raise doc.fail("task.target", "a target state only applies to transfer tasks")
    return _build(doc, "task", TaskSpec, kind=kind, basis=doc.get("task.basis", "Z"),
                  initial=initial, target=target, pair=pair,
                  alpha=doc.get("task.alpha"), beta=doc.get("task.beta"))


def default_runs(drive: Optional[DriveSpec], noise: Optional[NoiseSpec]) -> Tuple[str, ...]:
    """Comparison runs used when a scenario does not list its own."""
    if drive is None:
        return ("undriven",) + (("noisy_undriven",) if noise is not None else ())
    return ("driven", "effective", "undriven") + (("noisy_driven",) if noise is not None else ())


def parse_scenario(text: str) -> Scenario:
    """
    Parse and resolve a scenario document.

    Args:
        text: Scenario file contents

    Returns:
        A fully resolved Scenario

    Raises:
        ParseError: On unknown keys, malformed values or violated constraints,
            with the offending line and key when known
    """
    doc = _tokenize(text)
    name = _require(doc, "name")
    model = _parse_model(doc)
    drive = _parse_drive(doc, model)
    noise = _parse_noise(doc, drive)
    task = _parse_task(doc, model)
    grid = _build(doc, "grid", GridSpec, kind=_require(doc, "grid.kind").lower(),
                  horizon=_require(doc, "grid.horizon"), samples=doc.get("grid.samples", 201))
    propagator_args = {
        field_name: doc.get(f"propagator.{field_name}")
        for field_name in ("steps_per_period", "convergence_tol", "check_convergence", "substep")
        if doc.has(f"propagator.{field_name}")
    }
    propagator = _build(doc, "propagator", PropagatorConfig, **propagator_args)
    runs = tuple(r.lower() for r in doc.get("runs", ())) or default_runs(drive, noise)
    if drive is not None and any(r in ("effective", "noisy_effective") for r in runs):
        if not supports_effective(model.family, drive.axis):
            raise doc.fail("runs", f"no effective chain for a {model.family} chain driven along {drive.axis}")
    scenario = _build(doc, "scenario", Scenario, name=name, model=model, drive=drive, noise=noise,
                      runs=runs, task=task, grid=grid, propagator=propagator)
    logger.info(f"Parsed scenario '{scenario.name}': N={model.n_sites} {model.family}, runs {', '.join(runs)}")
    return scenario


def _floats(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def dump_scenario(s: Scenario) -> str:
    """Write a resolved scenario in the scenario grammar."""
    m = s.model
    lines = [
        f"name = {s.name}",
        f"model.family = {m.family}",
        f"model.n_sites = {m.n_sites}",
        f"model.jx = list:{_floats(m.jx)}",
    ]
    if m.jy:
        lines.append(f"model.jy = list:{_floats(m.jy)}")
    if m.l_nnn:
        lines.append(f"model.l_nnn = list:{_floats(m.l_nnn)}")
    if m.family == "xy_gamma":
        lines.append(f"model.gamma = {m.gamma!r}")
    if s.drive is not None:
        lines += [
            f"drive.axis = {s.drive.axis.lower()}",
            f"drive.omega = {s.drive.omega!r}",
            f"drive.g = {s.drive.g!r}",
        ]
    if s.noise is not None:
        n = s.noise
        lines += [
            "noise.enabled = true",
            f"noise.mu = {n.mu!r}",
            f"noise.sigma = {n.sigma!r}",
            f"noise.tau = {n.tau!r}",
            f"noise.axes = {','.join(a.lower() for a in n.axes)}",
            f"noise.trials = {n.trials}",
            f"noise.seed = {n.master_seed}",
            f"noise.average = {n.average}",
        ]
    t = s.task
    lines += [f"task.kind = {t.kind}", f"task.basis = {t.basis.lower()}"]
    if t.initial is not None:
        lines.append(f"task.initial = {t.initial}")
    if t.target is not None:
        lines.append(f"task.target = {t.target}")
    if t.pair is not None:
        lines.append(f"task.pair = {t.pair[0]},{t.pair[1]}")
    if t.alpha is not None:
        lines += [f"task.alpha = {t.alpha!r}", f"task.beta = {t.beta!r}"]
    lines += [
        f"grid.kind = {s.grid.kind}",
        f"grid.horizon = {s.grid.horizon!r}",
        f"grid.samples = {s.grid.samples}",
        f"propagator.steps_per_period = {s.propagator.steps_per_period}",
        f"propagator.convergence_tol = {s.propagator.convergence_tol!r}",
        f"propagator.check_convergence = {str(s.propagator.check_convergence).lower()}",
    ]
    if s.propagator.substep is not None:
        lines.append(f"propagator.substep = {s.propagator.substep!r}")
    lines.append(f"runs = {', '.join(s.runs)}")
    return "\n".join(lines) + "\n"
