"""Experiment definitions, run records, the results file and the analysis step.

Config files are INI text::

    [heraldgen]
    version = 1
    cutoff = 20
    results = results.txt

    [experiment cat2]
    modes = 2
    photons = 0
    pattern = 2
    target = cat
    alpha = 2
    parity = even
    restarts = 50
    seed = 1

Results files start with ``# heraldgen-results v1`` followed by one JSON
object per line. The headline fields are ``n`` (single photons),
``one_minus_F``, ``p``, ``n_T``.
"""

from __future__ import annotations

import configparser
import fcntl
import json
import math
import os
import re
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import __version__
from .constants import DEFAULT_CUTOFF, R_MAX
from .errors import ValidationError
from .fock import FockVector, basis, quantum_angle
from .heralding import HeraldPattern
from .optimizer import OptimizationProblem, optimize, pareto_front
from .targets import cat_state, gkp_core_target

CONFIG_VERSION = "1"
RESULTS_HEADER = "# heraldgen-results v1"
CUTOFF_ENV = "HERALDGEN_CUTOFF"
TARGET_KINDS = ("cat", "gkp-core", "fock")
CAT_TAIL = 1e-6


class ConfigError(ValidationError):
    """Malformed experiment config; message carries the file line when known."""


class DegenerateDataError(ValidationError):
    """Correlation or regression undefined because a variable has zero variance."""


class RecordNotFoundError(ValidationError):
    """No run record with the requested id."""


def default_cutoff() -> int:
    raw = os.environ.get(CUTOFF_ENV)
    if raw is None:
        return DEFAULT_CUTOFF
    try:
        D = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{CUTOFF_ENV}={raw!r} is not an integer") from exc
    if D < 4:
        raise ConfigError(f"{CUTOFF_ENV} must be >= 4")
    return D


@dataclass(frozen=True)
class ExperimentDef:
    """Everything needed to rebuild an optimization problem and rerun it."""

    name: str
    modes: int
    photon_modes: tuple
    pattern: tuple
    heralded_mode: int = 0
    target: str = "cat"
    alpha: float = 2.0
    parity: str = "even"
    delta: float = 0.25
    fock_n: int = 1
    cutoff: int = DEFAULT_CUTOFF
    restarts: int = 50
    seed: int = 1
    include_displacement: bool = False
    r_max: float = R_MAX

    @property
    def s(self) -> int:
        return len(self.photon_modes)

    def target_state(self) -> FockVector:
        if self.target == "cat":
            return cat_state(self.alpha, self.parity, self.cutoff, max_tail=CAT_TAIL)
        if self.target == "gkp-core":
            return gkp_core_target(self.delta).embedded(self.cutoff)
        if self.target == "fock":
            return basis(self.fock_n, self.cutoff)
        raise ValidationError(f"unknown target {self.target!r}")

    def problem(self) -> OptimizationProblem:
        return OptimizationProblem(self.modes, self.photon_modes,
                                   HeraldPattern(self.pattern, self.heralded_mode),
                                   self.target_state(), self.cutoff, self.r_max,
                                   self.include_displacement)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["photon_modes"] = list(self.photon_modes)
        d["pattern"] = list(self.pattern)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentDef:
        d = dict(d)
        d["photon_modes"] = tuple(d["photon_modes"])
        d["pattern"] = tuple(d["pattern"])
        return cls(**d)


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    in_section = False
    for no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = stripped == f"[{section}]"
            if in_section and key is None:
                return no
            continue
        if in_section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return no
    return None


def _int_list(raw: str) -> tuple:
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(int(tok) for tok in re.split(r"[,\s]+", raw) if tok)


def parse_config(text: str, source: str = "<config>") -> tuple[dict, list]:
    """Parse config text into ``(settings, [ExperimentDef, ...])``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if not parser.has_section("heraldgen"):
        raise ConfigError(f"{source}: missing [heraldgen] header section")
    head = parser["heraldgen"]
    if head.get("version") != CONFIG_VERSION:
        line = _line_of(text, "heraldgen", "version") or _line_of(text, "heraldgen")
        raise ConfigError(f"{source}:{line}: unsupported config version {head.get('version')!r}")
    settings = {
        "cutoff": head.get("cutoff"),
        "results": head.get("results", "results.txt"),
    }
    default_D = default_cutoff()
    experiments = []
    for section in parser.sections():
        if section == "heraldgen":
            continue
        if not section.startswith("experiment "):
            raise ConfigError(f"{source}:{_line_of(text, section)}: unknown section [{section}]")
        name = section.split(None, 1)[1].strip()
        sec = parser[section]
        failed = []

        def get(key, conv, default=None, required=False):
            if key not in sec:
                if required:
                    failed.append(key)
                    raise ValueError("required key is missing")
                return default
            try:
                return conv(sec[key])
            except ValueError:
                failed.append(key)
                raise

        try:
            modes = get("modes", int, required=True)
            if "photon_modes" in sec:
                photon_modes = get("photon_modes", _int_list)
            else:
                photon_modes = tuple(range(get("photons", int, 0)))
            target = get("target", str, "cat")
            if target not in TARGET_KINDS:
                failed.append("target")
                raise ValueError(f"must be one of {', '.join(TARGET_KINDS)}")
            cutoff = get("cutoff", int, int(settings["cutoff"]) if settings["cutoff"] else default_D)
            exp = ExperimentDef(
                name=name, modes=modes, photon_modes=photon_modes,
                pattern=get("pattern", _int_list, required=True),
                heralded_mode=get("heralded_mode", int, 0), target=target,
                alpha=get("alpha", float, 2.0), parity=get("parity", str, "even"),
                delta=get("delta", float, 0.25), fock_n=get("fock_n", int, 1),
                cutoff=cutoff, restarts=get("restarts", int, 50), seed=get("seed", int, 1),
                include_displacement=get("include_displacement", _boolean, False),
                r_max=get("r_max", float, R_MAX),
            )
            exp.problem()
        except (ValueError, ValidationError) as exc:
            key = failed[-1] if failed else None
            line = (_line_of(text, section, key) if key else None) or _line_of(text, section)
            where = f"key {key!r}" if key else "experiment"
            raise ConfigError(f"{source}:{line}: [{section}] {where}: {exc}") from exc
        experiments.append(exp)
    if not experiments:
        raise ConfigError(f"{source}: no [experiment ...] sections")
    return settings, experiments


def _boolean(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def load_config(path: str) -> tuple[dict, list]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=path)


@dataclass(frozen=True)
class RunRecord:
    id: str
    definition: ExperimentDef
    one_minus_F: float
    p: float
    n_T: int
    reward: float
    restart: int
    params: tuple
    frontier: tuple = ()
    wall_time: float = 0.0
    version: str = __version__

    @property
    def n(self) -> int:
        return self.definition.s

    @property
    def fidelity(self) -> float:
        return 1.0 - self.one_minus_F

    def to_json(self) -> str:
        d = {
            "id": self.id,
            "n": self.n,
            "one_minus_F": self.one_minus_F,
            "p": self.p,
            "n_T": self.n_T,
            "reward": self.reward,
            "restart": self.restart,
            "params": list(self.params),
            "frontier": [list(f) for f in self.frontier],
            "wall_time": self.wall_time,
            "version": self.version,
            "definition": self.definition.to_dict(),
        }
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> RunRecord:
        d = json.loads(line)
        return cls(
            id=d["id"], definition=ExperimentDef.from_dict(d["definition"]),
            one_minus_F=d["one_minus_F"], p=d["p"], n_T=d["n_T"], reward=d["reward"],
            restart=d["restart"], params=tuple(d["params"]),
            frontier=tuple(tuple(f) for f in d.get("frontier", ())),
            wall_time=d.get("wall_time", 0.0), version=d.get("version", ""),
        )


def run_experiment(exp: ExperimentDef, restarts: int | None = None, record_id: str | None = None,
                   progress=None) -> tuple[RunRecord, list]:
    """Optimize one experiment; returns the record and the sorted restart results."""
    problem = exp.problem()
    n_restarts = exp.restarts if restarts is None else restarts
    t0 = time.perf_counter()
    results = optimize(problem, n_restarts, exp.seed, progress=progress)
    wall = time.perf_counter() - t0
    best = results[0]
    front = tuple((r.one_minus_F, r.probability, r.restart) for r in pareto_front(results))
    if restarts is not None and restarts != exp.restarts:
        exp = ExperimentDef.from_dict({**exp.to_dict(), "restarts": n_restarts})
    rec = RunRecord(record_id or exp.name, exp, best.one_minus_F, best.probability, best.n_T,
                    best.reward, best.restart, tuple(float(v) for v in best.params), front, wall)
    return rec, results


def append_record(path: str, record: RunRecord) -> None:
    """Append one record as a whole line under an exclusive lock."""
    line = record.to_json() + "\n"
    with open(path, "a+", encoding="utf-8") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            fh.seek(0, os.SEEK_END)
            if fh.tell() == 0:
                line = RESULTS_HEADER + "\n" + line
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def read_records(path: str) -> list:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != RESULTS_HEADER:
        raise ValidationError(f"{path}: missing header {RESULTS_HEADER!r}")
    records = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            records.append(RunRecord.from_json(line))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValidationError(f"{path}:{no}: bad record ({exc})") from exc
    return records


def find_record(records, record_id: str) -> RunRecord:
    for rec in reversed(records):
        if rec.id == record_id:
            return rec
    raise RecordNotFoundError(f"no run record with id {record_id!r}")


# ------------------------------------------------------------------ analysis

@dataclass(frozen=True)
class Row:
    """Minimal (s, 1-F, p) triple."""

    n: int
    one_minus_F: float
    p: float


@dataclass(frozen=True)
class AnalysisReport:
    scores: tuple
    pearson_r: float
    slope: float
    intercept: float
    residuals: tuple = field(default=(), repr=False)


def quality_score(one_minus_F: float, p: float) -> float:
    """``p - arccos(sqrt(F))``; negative values are kept."""
    return p - quantum_angle(1.0 - one_minus_F).radians


def analyze(records) -> AnalysisReport:
    """Pearson correlation and least-squares line of ``p - QA`` against ``s``."""
    rows = list(records)
    if len(rows) < 2:
        raise ValidationError("analysis needs at least two records")
    # sort for order invariance of the floating-point sums
    pairs = sorted((float(r.n), quality_score(r.one_minus_F, r.p)) for r in rows)
    s = np.array([a for a, _ in pairs])
    y = np.array([b for _, b in pairs])
    if np.ptp(s) == 0:
        raise DegenerateDataError("all records share the same single-photon count")
    if np.ptp(y) == 0:
        raise DegenerateDataError("quality score has zero variance")
    fit = stats.linregress(s, y)
    resid = y - (fit.intercept + fit.slope * s)
    return AnalysisReport(tuple(y), float(fit.rvalue), float(fit.slope), float(fit.intercept),
                          tuple(resid))


def apply_source_noise(record, efficiency: float = 1.0, purity: float = 1.0,
                       indistinguishability: float = 1.0) -> tuple[float, float]:
    """Parametric single-photon-source model: ``(F', p')``.

    ``p' = p eff^s`` and ``F' = F (purity * indist)^s``. A model, not a
    simulation of mixed-state inputs.
    """
    for name, v in (("efficiency", efficiency), ("purity", purity),
                    ("indistinguishability", indistinguishability)):
        if not 0.0 < v <= 1.0:
            raise ValidationError(f"{name} must lie in (0, 1], got {v}")
    s = record.n
    F = 1.0 - record.one_minus_F
    return F * (purity * indistinguishability) ** s, record.p * efficiency**s


def fmt(x) -> str:
    """Six significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.6g}"
