"""Monte Carlo studies of bridge walks in growing dimension.

A study runs independent trials for every ``(d, n)`` point of a schedule.
Trial ``i`` at ``(d, n)`` draws from the substream keyed by
``(study, d, n, i)``, so records never depend on the worker count or on the
order in which trials finish; aggregation sorts by task before reducing.

Studies
-------
lemma1      | n^-1 ||B_floor(nt)||^2 - t(1 - t) | at each t in ``t_list``
theorem1    sup over grid pairs of | scaled bridge distance - sqrt(u(1-u)) |,
            plus the index-correspondence GH upper bound
theorem2    scalar functionals of the scaled grid matrix against the same
            functionals of the subordinator-stmt and subordinator-emb limits
truncation  a(n)^-1/2 * Hausdorff distance between the truncated and the full
            bridge clouds, for each s in ``s_list``
angular     |<Theta_1, Theta_2>| for independent increments
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from threadpoolctl import threadpool_limits

from . import gh, increments, limits, walks
from .walks import format_float

STUDIES = ("lemma1", "theorem1", "theorem2", "truncation", "angular")
L2_STUDIES = ("lemma1", "theorem1")
HEAVY_STUDIES = ("theorem2", "truncation", "angular")
GRID_STUDIES = ("theorem1", "theorem2")
DEFAULT_FUNCTIONALS = ("diameter", "entry:0:0.5", "entry:0.25:0.75")
CHUNK_ROWS = 256
REPORT_HEADER = "study,family,alpha,d,n,m,trial,statistic,value"
SUMMARY_HEADER = "study,family,alpha,d,n,m,statistic,aggregate,value"

ANGULAR_NOTE = ("angular: increments are sampled unconditionally; for the pareto-sphere "
                "model Theta is independent of ||X||, so conditioning on "
                "||X_i||^2 >= s a(n) leaves the law of <Theta_1, Theta_2> unchanged")
FUNCTIONAL_NOTE = ("theorem2: the functionals compared by KS are a chosen finite summary "
                   "of the random metric space, not a characterization of its law")


class ConfigError(ValueError):
    pass


@dataclass
class StudyConfig:
    study: str
    family: str
    schedule: List[Tuple[int, int]]
    alpha: Optional[float] = None
    m: int = 20
    trials: int = 100
    t_list: List[float] = field(default_factory=lambda: [0.5])
    epsilon_list: List[float] = field(default_factory=lambda: [0.1])
    s_list: List[float] = field(default_factory=lambda: [0.1, 0.01, 0.001])
    eps_subordinator: float = limits.DEFAULT_EPS
    seed: int = 0
    functionals: List[str] = field(default_factory=lambda: list(DEFAULT_FUNCTIONALS))

    @classmethod
    def from_dict(cls, data: dict) -> "StudyConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        missing = [k for k in ("study", "family", "schedule") if k not in data]
        if missing:
            raise ConfigError(f"missing config key(s): {', '.join(missing)}")
        data = dict(data)
        try:
            data["schedule"] = [tuple(_as_int(v, "schedule entry") for v in pair) for pair in data["schedule"]]
        except TypeError:
            raise ConfigError("schedule must be a list of [d, n] pairs") from None
        config = cls(**data)
        try:
            config.validate()
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed config value: {exc}") from None
        return config

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schedule"] = [list(p) for p in self.schedule]
        return out

    def validate(self) -> None:
        if self.study not in STUDIES:
            raise ConfigError(f"unknown study {self.study!r}; expected one of {', '.join(STUDIES)}")
        if self.family not in increments.FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.study in L2_STUDIES and self.family not in increments.L2_FAMILIES:
            raise ConfigError(f"{self.study} needs a square-integrable family, got {self.family}")
        if self.study in HEAVY_STUDIES and self.family != increments.PARETO:
            raise ConfigError(f"{self.study} needs the {increments.PARETO} family")
        if self.family == increments.PARETO:
            if self.alpha is None or not (0.0 < float(self.alpha) < 1.0):
                raise ConfigError("alpha out of range: must lie in (0, 1)")
            self.alpha = float(self.alpha)
        elif self.alpha is not None:
            raise ConfigError(f"alpha is not used by {self.family}")
        if not self.schedule:
            raise ConfigError("schedule is empty")
        for pair in self.schedule:
            if len(pair) != 2 or min(pair) < 1:
                raise ConfigError(f"schedule entries must be positive [d, n] pairs, got {list(pair)}")
        self.trials = _as_int(self.trials, "trials")
        self.m = _as_int(self.m, "m")
        self.seed = _as_int(self.seed, "seed")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.study in GRID_STUDIES and self.m > min(n for _, n in self.schedule):
            raise ConfigError(f"m={self.m} exceeds the smallest n in the schedule")
        if not all(0.0 <= t <= 1.0 for t in self.t_list) or not self.t_list:
            raise ConfigError("t_list must be a nonempty list of times in [0, 1]")
        if not all(e > 0 for e in self.epsilon_list):
            raise ConfigError("epsilon_list entries must be positive")
        if not self.s_list or any(s < 0 for s in self.s_list):
            raise ConfigError("s_list must be a nonempty list of nonnegative levels")
        if any(a < b for a, b in zip(self.s_list, self.s_list[1:])):
            raise ConfigError("s_list must be in descending order")
        if not self.eps_subordinator > 0:
            raise ConfigError("eps_subordinator must be positive")
        if not self.functionals:
            raise ConfigError("functionals must be nonempty")
        for name in self.functionals:
            _parse_functional(name)


def _as_int(value, what: str) -> int:
    try:
        ok = not isinstance(value, bool) and float(value).is_integer()
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise ConfigError(f"{what} must be an integer, got {value!r}")
    return int(value)


def level_label(x: float) -> str:
    """Shortest round-trip text for a level, used inside statistic names (0.1 -> '0.1', 0.0 -> '0')."""
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def _parse_functional(name: str) -> Tuple[str, float, float]:
    if name == "diameter":
        return ("diameter", 0.0, 0.0)
    parts = name.split(":")
    if len(parts) == 3 and parts[0] == "entry":
        try:
            a, b = float(parts[1]), float(parts[2])
        except ValueError:
            a = b = -1.0
        if 0.0 <= a <= 1.0 and 0.0 <= b <= 1.0:
            return ("entry", a, b)
    raise ConfigError(f"bad functional {name!r}; use 'diameter' or 'entry:<a>:<b>' with a, b in [0, 1]")


def evaluate_functional(name: str, D: np.ndarray) -> float:
    """'diameter' or 'entry:a:b' (grid fractions, rounded to indices of the (m+1)-point grid)."""
    kind, a, b = _parse_functional(name)
    if kind == "diameter":
        return float(D.max())
    m = D.shape[0] - 1
    return float(D[int(round(a * m)), int(round(b * m))])


class TrialRecord(NamedTuple):
    d: int
    n: int
    trial: int
    statistic: str
    value: float


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n1: int
    n2: int


@dataclass
class ConvergenceReport:
    config: StudyConfig
    records: List[TrialRecord]
    summary: List[Tuple[int, int, str, str, float]] = field(default_factory=list)
    ks: Dict[Tuple[int, int, str, str], KsResult] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def values(self, d: int, n: int, statistic: str) -> np.ndarray:
        return np.array([r.value for r in self.records
                         if r.d == d and r.n == n and r.statistic == statistic])

    def median(self, d: int, n: int, statistic: str) -> float:
        return float(np.median(self.values(d, n, statistic)))

    def exceedance(self, d: int, n: int, statistic: str, eps: float) -> float:
        return float(np.mean(self.values(d, n, statistic) > eps))

    def statistics(self) -> List[str]:
        seen: Dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.statistic, None)
        return list(seen)

    def _prefix(self) -> str:
        c = self.config
        alpha = "" if c.alpha is None else format_float(c.alpha)
        return f"{c.study},{c.family},{alpha}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(REPORT_HEADER + "\n")
        prefix, m = self._prefix(), self.config.m
        for r in self.records:
            buf.write(f"{prefix},{r.d},{r.n},{m},{r.trial},{r.statistic},{format_float(r.value)}\n")
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        buf.write(SUMMARY_HEADER + "\n")
        prefix, m = self._prefix(), self.config.m
        for d, n, stat, agg, value in self.summary:
            buf.write(f"{prefix},{d},{n},{m},{stat},{agg},{format_float(value)}\n")
        return buf.getvalue()


def ks_two_sample(xs: Sequence[float], ys: Sequence[float]) -> KsResult:
    """Sup distance between two empirical CDFs by a merge scan over sorted samples.

    The running gap is tracked as the integer |i n2 - j n1| and divided once
    at the end, so the statistic is exact.
    """
    a = np.sort(np.asarray(xs, dtype=float))
    b = np.sort(np.asarray(ys, dtype=float))
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise ValueError("KS statistic needs two nonempty samples")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("KS samples must be finite")
    i = j = 0
    worst = 0
    while i < n1 and j < n2:
        v = min(a[i], b[j])
        while i < n1 and a[i] == v:
            i += 1
        while j < n2 and b[j] == v:
            j += 1
        worst = max(worst, abs(i * n2 - j * n1))
    return KsResult(worst / (n1 * n2), n1, n2)


# ---------------------------------------------------------------- trials

def _model(config: StudyConfig, d: int) -> increments.IncrementModel:
    return increments.build_model(config.family, d, config.alpha, config.seed)


def _stream(model, n, key):
    return increments.iter_increments(model, n, key, chunk_rows=CHUNK_ROWS)


def _lemma1_trial(config, d, n, i):
    model = _model(config, d)
    ks = [math.floor(n * t) for t in config.t_list]
    rows = walks.bridge_rows(_stream(model, n, ("lemma1", d, n, i)), n, ks)
    sq = np.einsum("ij,ij->i", rows, rows)
    return [(f"dev[t={level_label(t)}]", abs(sq[j] / n - (1.0 - t) * t))
            for j, t in enumerate(config.t_list)]


def scaled_grid_matrix(config: StudyConfig, d: int, n: int, key) -> np.ndarray:
    model = _model(config, d)
    grid = walks.grid_bridge(_stream(model, n, key), n, config.m)
    return walks.distance_matrix(grid, increments.distance_scale(model, n)).entries


def _theorem1_trial(config, d, n, i):
    D = scaled_grid_matrix(config, d, n, ("theorem1", d, n, i))
    L = limits.limit_distance_matrix(limits.WIENER_BRIDGE, config.m).entries
    sup_dev = float(np.max(np.abs(D - L)))
    return [("sup_deviation", sup_dev), ("gh_upper", gh.correspondence_upper(D, L))]


def _theorem2_trial(config, d, n, i):
    D = scaled_grid_matrix(config, d, n, ("theorem2", d, n, i))
    return [(f"empirical:{name}", evaluate_functional(name, D)) for name in config.functionals]


def _theorem2_limit(config, d, n, j):
    sample = limits.sample_subordinator(config.alpha, config.eps_subordinator,
                                        ("theorem2", d, n, "limit", j), config.seed)
    out = []
    for kind in (limits.SUB_STMT, limits.SUB_EMB):
        L = limits.limit_distance_matrix(kind, config.m, sample).entries
        out.extend((f"{kind}:{name}", evaluate_functional(name, L)) for name in config.functionals)
    return out


def _truncation_trial(config, d, n, i):
    model = _model(config, d)
    X = increments.sample_increments(model, n, ("truncation", d, n, i))
    full = walks.bridge_of(walks.cumulate(X))
    a_n = model.scaling(n)
    scale = increments.distance_scale(model, n)
    out = []
    for s in config.s_list:
        cut = walks.bridge_of(walks.cumulate(walks.truncated_batch(X, s * a_n)))
        out.append((f"scaled_dH[s={level_label(s)}]", scale * gh.hausdorff_between_clouds(cut, full)))
    return out


def _angular_trial(config, d, n, i):
    model = _model(config, d)
    X = increments.sample_increments(model, 2, ("angular", d, n, i))
    theta = X / np.linalg.norm(X, axis=1)[:, None]
    return [("abs_inner_angular", abs(float(theta[0] @ theta[1])))]


_TRIALS = {
    "lemma1": _lemma1_trial,
    "theorem1": _theorem1_trial,
    "theorem2": _theorem2_trial,
    "truncation": _truncation_trial,
    "angular": _angular_trial,
}


def _run_task(task):
    config, kind, d, n, i = task
    fn = _theorem2_limit if kind == "limit" else _TRIALS[config.study]
    # single-threaded BLAS keeps every floating-point result independent of the pool size
    with threadpool_limits(limits=1):
        return fn(config, d, n, i)


def _tasks(config: StudyConfig):
    tasks = []
    for d, n in config.schedule:
        tasks.extend((config, "trial", d, n, i) for i in range(config.trials))
        if config.study == "theorem2":
            tasks.extend((config, "limit", d, n, j) for j in range(config.trials))
    return tasks


def collect_records(config: StudyConfig, workers: int = 1) -> List[TrialRecord]:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    tasks = _tasks(config)
    if workers == 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    records = []
    for (_, _, d, n, i), stats in zip(tasks, results):
        records.extend(TrialRecord(d, n, i, name, float(value)) for name, value in stats)
    return records


def _summarize(report: ConvergenceReport) -> None:
    config = report.config
    stats = report.statistics()
    for d, n in config.schedule:
        for stat in stats:
            vals = report.values(d, n, stat)
            report.summary.append((d, n, stat, "median", float(np.median(vals))))
            report.summary.append((d, n, stat, "p90", float(np.quantile(vals, 0.9))))
            for eps in config.epsilon_list:
                report.summary.append((d, n, stat, f"exceed[{level_label(eps)}]", float(np.mean(vals > eps))))
        if config.study == "theorem2":
            for name in config.functionals:
                emp = report.values(d, n, f"empirical:{name}")
                for kind in (limits.SUB_STMT, limits.SUB_EMB):
                    res = ks_two_sample(emp, report.values(d, n, f"{kind}:{name}"))
                    report.ks[(d, n, name, kind)] = res
                    report.summary.append((d, n, name, f"ks[{kind}]", res.statistic))


def run_study(config: StudyConfig, workers: int = 1) -> ConvergenceReport:
    config.validate()
    report = ConvergenceReport(config, collect_records(config, workers))
    if config.study == "angular":
        report.notes.append(ANGULAR_NOTE)
    if config.study == "theorem2":
        report.notes.append(FUNCTIONAL_NOTE)
    _summarize(report)
    return report


def _require(config: StudyConfig, study: str) -> StudyConfig:
    if config.study != study:
        config = StudyConfig(**{**config.to_dict(), "study": study, "schedule": config.schedule})
    config.validate()
    return config


def run_lemma1_check(config: StudyConfig, workers: int = 1) -> ConvergenceReport:
    return run_study(_require(config, "lemma1"), workers)


def run_theorem1_study(config: StudyConfig, workers: int = 1) -> ConvergenceReport:
    return run_study(_require(config, "theorem1"), workers)


def run_theorem2_study(config: StudyConfig, workers: int = 1) -> ConvergenceReport:
    return run_study(_require(config, "theorem2"), workers)


def run_truncation_study(config: StudyConfig, workers: int = 1) -> ConvergenceReport:
    return run_study(_require(config, "truncation"), workers)


def run_angular_check(config: StudyConfig, workers: int = 1) -> ConvergenceReport:
    return run_study(_require(config, "angular"), workers)
