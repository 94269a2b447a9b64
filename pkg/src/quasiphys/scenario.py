"""Scenario configs, dispatch and artifact writing for the command line.

A config is a TOML file with a top-level ``kind``, an optional ``seed`` and
``output``, and one parameter table named after the kind. Every physically
meaningful parameter must be given explicitly; only tolerances and suite
sizes have defaults, and the values used are echoed into ``run.json``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .checks import Check, residual_check
from .errors import ConfigError, SingularityError

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

KINDS = ("qset-suite", "mss-sim", "quasi-mss-sim", "eprb", "stats")
FORMATS = ("csv", "jsonl")
SEED_ENV = "QUASIPHYS_SEED"
FLOAT_FORMAT = ".12g"


# value formatting --------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), FLOAT_FORMAT)
    return "" if x is None else str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(format(x, FLOAT_FORMAT))
    return x if x is None or isinstance(x, str) else str(x)


def json_line(record: dict) -> str:
    return json.dumps(_jsonable(record), separators=(",", ":"), allow_nan=False)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


# config tables ------------------------------------------------------------------


class _Table:
    """Typed access to one TOML table with error messages that name the key."""

    def __init__(self, data: dict, where: str):
        if not isinstance(data, dict):
            raise ConfigError(f"[{where}] must be a table")
        self.data, self.where, self.used = data, where, set()

    def _get(self, key, default=...):
        self.used.add(key)
        if key not in self.data:
            if default is ...:
                raise ConfigError(f"[{self.where}] missing required key '{key}'")
            return default
        return self.data[key]

    def number(self, key, default=..., positive=False) -> float:
        v = self._get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"[{self.where}] '{key}' must be a finite number")
        if positive and not v > 0:
            raise ConfigError(f"[{self.where}] '{key}' must be positive")
        return float(v)

    def integer(self, key, default=..., minimum=0) -> int:
        v = self._get(key, default)
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            raise ConfigError(f"[{self.where}] '{key}' must be an integer >= {minimum}")
        return v

    def boolean(self, key, default=...) -> bool:
        v = self._get(key, default)
        if not isinstance(v, bool):
            raise ConfigError(f"[{self.where}] '{key}' must be true or false")
        return v

    def string(self, key, default=..., choices=None) -> str:
        v = self._get(key, default)
        if not isinstance(v, str) or (choices and v not in choices):
            extra = f" (one of {', '.join(choices)})" if choices else ""
            raise ConfigError(f"[{self.where}] '{key}' must be a string{extra}")
        return v

    def vector(self, key, length=3, default=...) -> tuple:
        v = self._get(key, default)
        ok = isinstance(v, list) and len(v) == length
        ok = ok and all(not isinstance(x, bool) and isinstance(x, (int, float)) and math.isfinite(x) for x in v)
        if not ok:
            raise ConfigError(f"[{self.where}] '{key}' must be a list of {length} numbers")
        return tuple(float(x) for x in v)

    def tables(self, key) -> list["_Table"]:
        v = self._get(key)
        if not isinstance(v, list) or not v:
            raise ConfigError(f"[{self.where}] '{key}' must be a non-empty array of tables")
        return [_Table(item, f"{self.where}.{key}[{i}]") for i, item in enumerate(v)]

    def finish(self):
        unknown = sorted(set(self.data) - self.used)
        if unknown:
            raise ConfigError(f"[{self.where}] unknown keys: {', '.join(unknown)}")


def _interval(t: _Table, h: float) -> tuple[float, float]:
    a, b = t.vector("interval", 2)
    if not b > a:
        raise ConfigError(f"[{t.where}] 'interval' must be increasing")
    steps = (b - a) / h
    if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
        raise ConfigError(f"[{t.where}] interval length must be a multiple of h")
    return a, b


@dataclass(frozen=True)
class QsetSuiteParams:
    random_universes: int = 1000
    exhaustive: bool = True
    universes: tuple = ()  # loaded quasi-sets


@dataclass(frozen=True)
class ParticleSpec:
    id: str
    mass: float
    position: tuple
    velocity: tuple


@dataclass(frozen=True)
class MSSParams:
    h: float
    interval: tuple
    force: str
    gamma: Optional[float]
    external: tuple
    particles: tuple
    tolerance: float = 1e-4


@dataclass(frozen=True)
class QuasiMSSParams:
    h: float
    interval: tuple
    gamma: float
    species: str
    n: int
    particles: tuple
    eps_min: float = 1e-6
    individuation_eps: float = 0.0
    expect_singularity: bool = False
    tolerance: float = 1e-4


@dataclass(frozen=True)
class EPRBParams:
    a: tuple  # (theta, phi)
    b: tuple
    trials: int
    workers: int = 1


@dataclass(frozen=True)
class StatsParams:
    n_max: int
    k_max: int


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    params: Any
    seed: Optional[int] = None
    output: Optional[str] = None
    source: Optional[str] = None


def _particles(t: _Table, ids_required: bool) -> tuple:
    out = []
    for i, p in enumerate(t.tables("particles")):
        pid = p.string("id") if ids_required else p.string("id", f"{i}")
        out.append(ParticleSpec(pid, p.number("mass", positive=True), p.vector("position"), p.vector("velocity")))
        p.finish()
    if len({p.id for p in out}) != len(out):
        raise ConfigError(f"[{t.where}] particle ids must be unique")
    return tuple(out)


def _load_universe(path: Path):
    from .qset.serialize import load

    try:
        return load(path)
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise ConfigError(f"universe file {path}: {err}") from None


def _parse_params(kind: str, data: dict, base: Path):
    t = _Table(data.get(kind, {}), kind)
    if kind == "qset-suite":
        files = t._get("universes", [])
        if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
            raise ConfigError("[qset-suite] 'universes' must be a list of file paths")
        params = QsetSuiteParams(
            t.integer("random_universes", 1000), t.boolean("exhaustive", True), tuple(_load_universe(base / f) for f in files)
        )
    elif kind == "mss-sim":
        if kind not in data:
            raise ConfigError("missing [mss-sim] table")
        h = t.number("h", positive=True)
        force = t.string("force", choices=("gravity", "none"))
        params = MSSParams(
            h,
            _interval(t, h),
            force,
            t.number("gamma", positive=True) if force == "gravity" else None,
            t.vector("external"),
            _particles(t, True),
            t.number("tolerance", 1e-4, positive=True),
        )
    elif kind == "quasi-mss-sim":
        if kind not in data:
            raise ConfigError("missing [quasi-mss-sim] table")
        h = t.number("h", positive=True)
        ens = _Table(t._get("ensemble"), "quasi-mss-sim.ensemble")
        species, n = ens.string("species"), ens.integer("n", minimum=1)
        ens.finish()
        particles = _particles(t, False)
        if len(particles) != n:
            raise ConfigError(f"[quasi-mss-sim] ensemble n={n} but {len(particles)} particles given")
        params = QuasiMSSParams(
            h,
            _interval(t, h),
            t.number("gamma", positive=True),
            species,
            n,
            particles,
            t.number("eps_min", 1e-6, positive=True),
            t.number("individuation_eps", 0.0),
            t.boolean("expect_singularity", False),
            t.number("tolerance", 1e-4, positive=True),
        )
    elif kind == "eprb":
        if kind not in data:
            raise ConfigError("missing [eprb] table")
        params = EPRBParams(t.vector("a", 2), t.vector("b", 2), t.integer("trials", minimum=1), t.integer("workers", 1, minimum=1))
    else:
        if kind not in data:
            raise ConfigError("missing [stats] table")
        params = StatsParams(t.integer("n_max", minimum=0), t.integer("k_max", minimum=1))
    t.finish()
    return params


def parse_config(data: dict, base: Path = Path(".")) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a table")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"'kind' must be one of {', '.join(KINDS)}")
    unknown = sorted(set(data) - {"kind", "seed", "output", kind})
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(unknown)}")
    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError("'seed' must be an unsigned integer")
    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("'output' must be a path string")
    return ScenarioConfig(kind, _parse_params(kind, data, base), seed, output)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: {err}") from None
    cfg = parse_config(data, path.parent)
    return ScenarioConfig(cfg.kind, cfg.params, cfg.seed, cfg.output, str(path))


def resolve_seed(cli_seed: Optional[int], cfg: ScenarioConfig, env=None) -> Optional[int]:
    """``--seed`` beats the environment variable, which beats the config."""
    env = os.environ if env is None else env
    if cli_seed is not None:
        if cli_seed < 0:
            raise ConfigError("--seed must be unsigned")
        return cli_seed
    raw = env.get(SEED_ENV)
    if raw not in (None, ""):
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None
        if value < 0:
            raise ConfigError(f"{SEED_ENV} must be unsigned")
        return value
    return cfg.seed


# running --------------------------------------------------------------------------


@dataclass
class RunSummary:
    kind: str
    checks: list
    metrics: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)  # file name -> text
    duration: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> int:
        return sum(1 for c in self.checks if c.passed)

    @property
    def failed(self) -> int:
        return len(self.checks) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0


def _trajectory_csv(names, trajectories) -> str:
    rows = []
    for name, tr in zip(names, trajectories):
        for t, s in zip(tr.times, tr.samples):
            rows.append((name, t, *s))
    return csv_text(("particle", "t", "x", "y", "z"), rows)


def _check_records(checks) -> list[dict]:
    return [
        {
            "check": c.name,
            "passed": c.passed,
            "max_residual": c.max_residual,
            "cases": c.cases,
            "witness": None if c.witness is None else repr(c.witness),
            "detail": c.detail,
        }
        for c in checks
    ]


def _jsonl(records) -> str:
    return "".join(json_line(r) + "\n" for r in records)


def _run_qset(p: QsetSuiteParams, seed: int) -> RunSummary:
    from .qset.suite import check_universes, run_suite

    checks = run_suite(p.random_universes, seed, p.exhaustive)
    if p.universes:
        extra = check_universes(p.universes)
        checks += [Check(f"file:{c.name}", c.passed, c.max_residual, c.witness, c.detail, c.cases) for c in extra]
    metrics = {"cases": sum(c.cases for c in checks), "random_universes": p.random_universes, "exhaustive": p.exhaustive}
    return RunSummary("qset-suite", checks, metrics, {"validation.jsonl": _jsonl(_check_records(checks))})


def _run_mss(p: MSSParams) -> RunSummary:
    from .mss import ConstantExternal, Gravity, ZeroInternal, conservation_drift, is_isolated, simulate, validate

    ids = [s.id for s in p.particles]
    internal = Gravity(p.gamma) if p.force == "gravity" else ZeroInternal()
    external = ConstantExternal.uniform(p.external, ids)
    sys = simulate(
        {s.id: s.mass for s in p.particles},
        {s.id: s.position for s in p.particles},
        {s.id: s.velocity for s in p.particles},
        internal,
        external,
        p.h,
        p.interval,
    )
    report = validate(sys, p.tolerance)
    checks = list(report)
    dp, dl = conservation_drift(sys)
    metrics = {"tolerance": p.tolerance, "momentum_drift": dp, "angular_momentum_drift": dl}
    if is_isolated(sys):
        checks.append(residual_check("momentum-conservation", dp, p.tolerance))
        checks.append(residual_check("angular-momentum-conservation", dl, p.tolerance))
    metrics["max_residual"] = max(c.max_residual for c in report)
    artifacts = {
        "trajectory.csv": _trajectory_csv(ids, [sys.trajectories[i] for i in ids]),
        "validation.jsonl": _jsonl(_check_records(checks)),
    }
    return RunSummary("mss-sim", checks, metrics, artifacts)


def _run_quasi_mss(p: QuasiMSSParams) -> RunSummary:
    from .quasi_mss import individuation_report, simulate_gravity, validate_q

    initial = [(s.mass, s.position, s.velocity) for s in p.particles]
    metrics = {"tolerance": p.tolerance, "eps_min": p.eps_min}
    try:
        sys = simulate_gravity(initial, p.gamma, p.h, p.eps_min, p.interval, p.species)
    except SingularityError as err:
        metrics.update(singularity_time=err.time, singularity_pair=list(err.pair), singularity_separation=err.separation)
        check = Check("singularity", p.expect_singularity, 0.0, (err.pair, err.time), str(err))
        return RunSummary("quasi-mss-sim", [check], metrics, {"validation.jsonl": _jsonl(_check_records([check]))})
    checks = list(validate_q(sys, p.tolerance))
    checks.append(Check("singularity", not p.expect_singularity, 0.0, detail="run completed without a close encounter"))
    ind = individuation_report(sys, eps=p.individuation_eps)
    metrics.update(max_residual=max(c.max_residual for c in checks), min_classes=min(len(c) for c in ind.classes))
    artifacts = {
        "trajectory.csv": _trajectory_csv([str(i) for i in range(sys.n)], [q.traj for q in sys.particles]),
        "validation.jsonl": _jsonl(_check_records(checks)),
        "individuation.csv": csv_text(("t", "class_index", "class_size"), ind.rows()),
    }
    return RunSummary("quasi-mss-sim", checks, metrics, artifacts)


def _run_eprb(p: EPRBParams, seed: int) -> RunSummary:
    from .quantum import direction, eprb_statistics

    a, b = direction(*p.a), direction(*p.b)
    stats = eprb_statistics(a, b, p.trials, seed, workers=p.workers, keep_outcomes=True)
    expected = -float(np.clip(a @ b, -1.0, 1.0))
    checks = []
    if np.allclose(a, b, rtol=0, atol=1e-15):
        anti = bool(np.all(stats.outcomes[:, 0] == -stats.outcomes[:, 1]))
        checks.append(Check("same-axis-anticorrelation", anti, 0.0 if anti else 1.0, cases=p.trials))
    deviation = abs(stats.correlation - expected)
    bound = 3 * math.sqrt(max(1 - expected * expected, 0.0) / p.trials)
    checks.append(Check("correlation-within-3se", deviation <= bound, deviation, detail=f"bound {bound:.12g}", cases=p.trials))
    metrics = {
        "trials": p.trials,
        "correlation": stats.correlation,
        "expected": expected,
        "std_error": stats.std_error,
        **{f"count_{x:+d}{y:+d}": n for (x, y), n in stats.counts.items()},
    }
    rows = ((i, int(x), int(y)) for i, (x, y) in enumerate(stats.outcomes))
    return RunSummary("eprb", checks, metrics, {"trials.csv": csv_text(("trial", "outcome_a", "outcome_b"), rows)})


def _run_stats(p: StatsParams) -> RunSummary:
    import itertools

    from .occupancy import Mode, count_configurations

    rows, bad = [], []
    for n in range(p.n_max + 1):
        for k in range(1, p.k_max + 1):
            ind = count_configurations(n, k, Mode.INDIVIDUALS)
            non = count_configurations(n, k, Mode.NON_INDIVIDUALS)
            labelled = list(itertools.product(range(k), repeat=n))
            if ind != len(labelled) or non != len({tuple(sorted(x)) for x in labelled}):
                bad.append((n, k))
            rows.append((n, k, ind, non))
    checks = [Check("occupancy-oracle", not bad, float(len(bad)), bad[:1] or None, cases=len(rows))]
    metrics = {"n_max": p.n_max, "k_max": p.k_max}
    return RunSummary("stats", checks, metrics, {"counts.csv": csv_text(("n", "k", "individuals", "non_individuals"), rows)})


def run(cfg: ScenarioConfig, seed: Optional[int] = None) -> RunSummary:
    """Dispatch a validated config; no files are touched."""
    seed = cfg.seed if seed is None else seed
    if cfg.kind in ("qset-suite", "eprb") and seed is None:
        raise ConfigError(f"kind {cfg.kind} needs a seed (config, --seed or {SEED_ENV})")
    if cfg.kind == "qset-suite":
        summary = _run_qset(cfg.params, seed)
    elif cfg.kind == "mss-sim":
        summary = _run_mss(cfg.params)
    elif cfg.kind == "quasi-mss-sim":
        summary = _run_quasi_mss(cfg.params)
    elif cfg.kind == "eprb":
        summary = _run_eprb(cfg.params, seed)
    else:
        summary = _run_stats(cfg.params)
    summary.metrics = {"seed": seed, **summary.metrics}
    summary.params = _params_record(cfg.params)
    return summary


def _params_record(params) -> dict:
    # worker count is left out so artifacts do not depend on parallelism
    out = {}
    for f in fields(params):
        if f.name == "workers":
            continue
        value = getattr(params, f.name)
        if f.name == "universes":
            value = len(value)
        elif f.name == "particles":
            value = [asdict(p) for p in value]
        out[f.name] = value
    return out


def emit(summary: RunSummary, out: Path, fmt_name: str = "jsonl") -> list[Path]:
    """Write artifacts plus ``summary.<fmt>`` and ``run.json``; returns the paths written."""
    if fmt_name not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = dict(summary.artifacts)
    records = _check_records(summary.checks)
    if fmt_name == "jsonl":
        files["summary.jsonl"] = _jsonl(records)
    else:
        header = ("check", "passed", "max_residual", "cases", "witness", "detail")
        files["summary.csv"] = csv_text(header, ([r[h] for h in header] for r in records))
    run_record = {"kind": summary.kind, "passed": summary.passed, "failed": summary.failed, "metrics": summary.metrics, "params": summary.params}
    files["run.json"] = json.dumps(_jsonable(run_record), indent=2, sort_keys=True) + "\n"
    written = []
    for name in sorted(files):
        path = out / name
        with open(path, "w", newline="") as fh:
            fh.write(files[name])
        written.append(path)
    return written
