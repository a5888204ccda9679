"""Seeded Monte Carlo experiments: test errors, LLR distributions, count moments.

Every trial draws from its own generator seeded by a hash of
``(master_seed, trial_index, arm)``, so results do not depend on how trials
are split across worker processes.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm

from .graph import n_pairs, signed_wedge_from_degrees
from .inference import (
    Hypothesis,
    TestKind,
    approx_rhs_from_counts,
    ce_llr,
    edge_statistic,
    edge_threshold,
    exact_llr,
    leading_planted_wedge_mean,
    llr_gaussian_prediction,
    signed_count_moments,
    theoretical_error,
    wedge_statistic,
    wedge_threshold,
)
from .models import ModelParams, Regime, draw_null, draw_planted

ARMS = {"null": 0, "planted": 1}


class Statistic(enum.Enum):
    EDGE_TEST = "edge-test"
    WEDGE_TEST = "wedge-test"
    EXACT_LLR = "exact-llr"
    CE_LLR = "ce-llr"
    APPROX_RHS = "approx-rhs"

    @classmethod
    def parse(cls, s: "str | Statistic") -> "Statistic":
        if isinstance(s, Statistic):
            return s
        key = s.strip().lower().replace("_", "-")
        aliases = {"edgetest": "edge-test", "edge": "edge-test", "wedgetest": "wedge-test",
                   "wedge": "wedge-test", "exactllr": "exact-llr", "cellr": "ce-llr",
                   "approxrhs": "approx-rhs"}
        return cls(aliases.get(key, key))

    @property
    def is_test(self) -> bool:
        return self in (Statistic.EDGE_TEST, Statistic.WEDGE_TEST)


def child_seed(master_seed: int, index: int, arm: str) -> int:
    """64-bit seed for one trial, independent of scheduling."""
    data = struct.pack("<QQB", master_seed & (2 ** 64 - 1), index, ARMS[arm])
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def trial_rng(master_seed: int, index: int, arm: str) -> np.random.Generator:
    return np.random.default_rng(child_seed(master_seed, index, arm))


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    trials: int
    seed: int
    statistic: Statistic = Statistic.EDGE_TEST
    workers: int = 1
    M_max: int = 4

    def __post_init__(self):
        object.__setattr__(self, "statistic", Statistic.parse(self.statistic))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def to_dict(self) -> dict:
        """Resolved configuration; the worker count is excluded since it never affects results."""
        d = self.params.to_dict()
        d.update(statistic=self.statistic.value, trials=self.trials, seed=self.seed)
        if self.statistic is Statistic.CE_LLR:
            d["M_max"] = self.M_max
        return d

    def key(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=8).hexdigest()


# ------------------------------------------------------------- trial core


def _graph_value(statistic: Statistic, params: ModelParams, G, M_max: int) -> float:
    if statistic is Statistic.EDGE_TEST:
        return float(edge_statistic(G.edge_count, G.n, params) >= edge_threshold(params))
    if statistic is Statistic.WEDGE_TEST:
        return float(wedge_statistic(G.degrees, G.n, params) <= wedge_threshold(params))
    if statistic is Statistic.EXACT_LLR:
        return exact_llr(G, params)
    if statistic is Statistic.CE_LLR:
        return ce_llr(G, params, M_max).total
    return approx_rhs_from_counts(G.edge_count, G.degrees, G.n, params)


def _run_chunk(args) -> np.ndarray:
    params, statistic, seed, arm, start, stop, M_max = args
    out = np.empty(stop - start, dtype=np.float64)
    for t in range(start, stop):
        rng = trial_rng(seed, t, arm)
        G = draw_planted(rng, params).graph if arm == "planted" else draw_null(rng, params)
        out[t - start] = _graph_value(statistic, params, G, M_max)
    return out


def _count_chunk(args) -> np.ndarray:
    params, seed, arm, start, stop = args
    out = np.empty((stop - start, 2), dtype=np.float64)
    for t in range(start, stop):
        rng = trial_rng(seed, t, arm)
        G = draw_planted(rng, params).graph if arm == "planted" else draw_null(rng, params)
        out[t - start, 0] = G.edge_count - n_pairs(G.n) * params.q
        out[t - start, 1] = signed_wedge_from_degrees(G.degrees, G.n, params.q)
    return out


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(s, min(trials, s + size)) for s in range(0, trials, size)]


def _map(fn, jobs: list, workers: int) -> list:
    if workers == 1 or len(jobs) == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def run_trials(cfg: ExperimentConfig, arm: str) -> np.ndarray:
    """Per-trial values for one arm, in trial order."""
    if arm not in ARMS:
        raise ValueError("arm must be 'null' or 'planted'")
    jobs = [(cfg.params, cfg.statistic, cfg.seed, arm, a, b, cfg.M_max)
            for a, b in _chunks(cfg.trials, cfg.workers)]
    return np.concatenate(_map(_run_chunk, jobs, cfg.workers))


def signed_count_samples(params: ModelParams, trials: int, seed: int, arm: str,
                         workers: int = 1) -> np.ndarray:
    """(trials, 2) array of signed edge and wedge counts centered at q."""
    jobs = [(params, seed, arm, a, b) for a, b in _chunks(trials, workers)]
    return np.concatenate(_map(_count_chunk, jobs, workers))


# ------------------------------------------------------------- error rates


@dataclass(frozen=True)
class ErrorEstimate:
    type1: float
    type2: float
    total: float
    se_total: float
    theoretical: float
    trials: int

    @property
    def z(self) -> float:
        return (self.total - self.theoretical) / self.se_total if self.se_total > 0 else math.nan


def _check_test(cfg: ExperimentConfig) -> TestKind:
    if not cfg.statistic.is_test:
        raise ValueError("error experiments need the edge or wedge test")
    kind = TestKind.EDGE if cfg.statistic is Statistic.EDGE_TEST else TestKind.WEDGE
    want = Regime.EQUAL_AMBIENT if kind is TestKind.EDGE else Regime.EQUAL_AVERAGE
    if cfg.params.regime is not want:
        raise ValueError(f"the {kind.value} test needs the {want.value} regime")
    if not (0 < cfg.params.p < 1):
        raise ValueError("tests need p in (0, 1)")
    return kind


def run_error_experiment(cfg: ExperimentConfig) -> ErrorEstimate:
    """Estimate type I and type II errors of a threshold test."""
    kind = _check_test(cfg)
    null = run_trials(cfg, "null")
    planted = run_trials(cfg, "planted")
    t1 = float(null.mean())
    t2 = float(1.0 - planted.mean())
    se = math.sqrt(t1 * (1 - t1) / cfg.trials + t2 * (1 - t2) / cfg.trials)
    return ErrorEstimate(t1, t2, t1 + t2, se, theoretical_error(cfg.params, kind), cfg.trials)


# -------------------------------------------------------- LLR distributions


@dataclass(frozen=True)
class DistributionSummary:
    values: np.ndarray = field(repr=False)
    mean: float
    var: float | None
    se_mean: float | None
    contiguity_gap: float | None
    contiguity_se: float | None
    predicted_mean: float
    predicted_var: float
    under: Hypothesis

    @property
    def var_defined(self) -> bool:
        return self.var is not None

    @property
    def contiguity_z(self) -> float | None:
        if self.contiguity_gap is None or not self.contiguity_se:
            return None
        return self.contiguity_gap / self.contiguity_se


def summarize(values: np.ndarray, params: ModelParams, under: Hypothesis) -> DistributionSummary:
    values = np.asarray(values, dtype=np.float64)
    pred = llr_gaussian_prediction(params, under)
    T = values.size
    mean = float(values.mean())
    if T < 2:
        return DistributionSummary(values, mean, None, None, None, None, pred.mean, pred.var, under)
    var = float(values.var(ddof=1))
    sign = 1.0 if under is Hypothesis.NULL else -1.0
    # influence values of mean + sign * var / 2 for a delta-method standard error
    infl = values + sign * (values - mean) ** 2 / 2
    gap = mean + sign * var / 2
    se_gap = float(infl.std(ddof=1) / math.sqrt(T))
    return DistributionSummary(values, mean, var, float(math.sqrt(var / T)), gap, se_gap,
                               pred.mean, pred.var, under)


def run_llr_distribution(cfg: ExperimentConfig, under: Hypothesis | str = Hypothesis.NULL
                         ) -> DistributionSummary:
    """Sample the LLR (or a proxy) under one hypothesis and compare with its Gaussian limit."""
    under = Hypothesis.parse(under)
    if cfg.statistic.is_test:
        raise ValueError("distribution studies need an LLR statistic")
    if cfg.statistic is Statistic.EXACT_LLR:
        from .matching import MATCHING_DP_LIMIT, PERFECT_MATCHING_LIMIT
        limit = PERFECT_MATCHING_LIMIT if cfg.params.is_perfect else MATCHING_DP_LIMIT
        if cfg.params.n > limit:
            raise ValueError(f"exact LLR needs n <= {limit}")
    values = run_trials(cfg, "null" if under is Hypothesis.NULL else "planted")
    return summarize(values, cfg.params, under)


def qq_points(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(normal quantiles, sorted standardized values) for a QQ plot."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    z = (x - x.mean()) / x.std(ddof=1)
    probs = (np.arange(1, x.size + 1) - 0.5) / x.size
    return norm.ppf(probs), z


# ---------------------------------------------------------------- moments


@dataclass(frozen=True)
class MomentRow:
    quantity: str
    arm: str
    empirical: float
    se: float
    exact: float
    leading: float

    @property
    def z(self) -> float:
        return (self.empirical - self.exact) / self.se if self.se > 0 else math.nan

    @property
    def z_leading(self) -> float:
        return (self.empirical - self.leading) / self.se if self.se > 0 else math.nan


def _mean_var(x: np.ndarray) -> tuple[float, float, float, float]:
    T = x.size
    m = float(x.mean())
    d = x - m
    v = float(np.dot(d, d) / (T - 1))
    m4 = float(np.mean(d ** 4))
    se_var = math.sqrt(max(m4 - v * v, 0.0) / T)
    return m, math.sqrt(v / T), v, se_var


def moment_check(params: ModelParams, trials: int, seed: int, workers: int = 1) -> list[MomentRow]:
    """Empirical means and variances of the signed counts against exact and leading forms."""
    if trials < 100:
        raise ValueError("moment checks need at least 100 trials")
    rows: list[MomentRow] = []
    n, p, q = params.n, params.p, params.q
    N = n_pairs(n)
    W = 3 * math.comb(n, 3)
    for arm in ("null", "planted"):
        data = signed_count_samples(params, trials, seed, arm, workers)
        exact = signed_count_moments(params, arm)
        if arm == "null":
            lead = {"mean_edge": 0.0, "var_edge": N * q * (1 - q), "mean_wedge": 0.0,
                    "var_wedge": W * q * q * (1 - q) ** 2}
        else:
            ambient = params.regime is Regime.EQUAL_AMBIENT
            lead = {"mean_edge": params.E_M * (1 - p) if ambient else exact.mean_edge,
                    "var_edge": exact.var_edge, "mean_wedge": exact.mean_wedge if ambient
                    else leading_planted_wedge_mean(params),
                    "var_wedge": exact.var_wedge}
        for col, name in ((0, "edge"), (1, "wedge")):
            m, se_m, v, se_v = _mean_var(data[:, col])
            rows.append(MomentRow(f"mean_{name}", arm, m, se_m, getattr(exact, f"mean_{name}"),
                                  lead[f"mean_{name}"]))
            rows.append(MomentRow(f"var_{name}", arm, v, se_v, getattr(exact, f"var_{name}"),
                                  lead[f"var_{name}"]))
    return rows


# ----------------------------------------------------------------- output

EXPERIMENT_HEADER = ["key", "n", "p", "q", "lambda", "zeta", "regime", "statistic", "trials", "seed",
                     "type1", "type2", "total", "se_total", "theoretical", "z_total", "error"]

MOMENT_HEADER = ["key", "n", "p", "q", "lambda", "zeta", "regime", "trials", "seed",
                 "quantity", "arm", "empirical", "se", "exact", "leading", "z", "z_leading"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return "" if x is None else str(x)


def experiment_row(cfg: ExperimentConfig, est: ErrorEstimate | None, error: str = "") -> dict:
    row = {"key": cfg.key(), **cfg.to_dict()}
    if est is not None:
        row.update(type1=est.type1, type2=est.type2, total=est.total, se_total=est.se_total,
                   theoretical=est.theoretical, z_total=est.z)
    row["error"] = error
    return row


def moment_rows(params: ModelParams, trials: int, seed: int, rows: list[MomentRow]) -> list[dict]:
    base = params.to_dict()
    cfg_key = hashlib.blake2b(json.dumps({**base, "trials": trials, "seed": seed, "kind": "moments"},
                                         sort_keys=True).encode(), digest_size=8).hexdigest()
    out = []
    for r in rows:
        d = {"key": cfg_key, **base, "trials": trials, "seed": seed}
        d.update(asdict(r))
        d.update(z=r.z, z_leading=r.z_leading)
        out.append(d)
    return out


def rows_to_csv(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h)) for h in header])
    return buf.getvalue()


def write_results(rows: list[dict], header: list[str], out: str | Path) -> tuple[Path, Path]:
    """Write CSV and a JSON mirror. A directory ``out`` gets a content-hash file name."""
    out = Path(out)
    if out.suffix.lower() in (".csv", ".json"):
        csv_path = out.with_suffix(".csv")
    else:
        out.mkdir(parents=True, exist_ok=True)
        digest = hashlib.blake2b("|".join(r["key"] for r in rows).encode(), digest_size=8).hexdigest()
        csv_path = out / f"results-{digest}.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(rows_to_csv(rows, header))
    json_path = csv_path.with_suffix(".json")
    clean = [{h: (None if isinstance(r.get(h), float) and not math.isfinite(r[h]) else r.get(h))
              for h in header} for r in rows]
    json_path.write_text(json.dumps({"header": header, "rows": clean}, indent=1) + "\n")
    return csv_path, json_path


# ------------------------------------------------------------------ sweep


def sweep(grid: list[ExperimentConfig], out: str | Path | None = None) -> list[dict]:
    """Run each cell; failures become rows with an error message.

    If ``out`` names an existing CSV, cells whose key already has a row are
    reused instead of recomputed.
    """
    if not grid:
        raise ValueError("empty grid")
    done: dict[str, dict] = {}
    if out is not None and Path(out).suffix == ".csv" and Path(out).exists():
        with open(out, newline="") as fh:
            for r in csv.DictReader(fh):
                if not r.get("error"):
                    done[r["key"]] = r
    rows = []
    for cfg in grid:
        key = cfg.key()
        if key in done:
            rows.append(done[key])
            continue
        try:
            rows.append(experiment_row(cfg, run_error_experiment(cfg)))
        except Exception as exc:  # noqa: BLE001 - recorded per row
            rows.append(experiment_row(cfg, None, f"{type(exc).__name__}: {exc}"))
    if out is not None:
        write_results(rows, EXPERIMENT_HEADER, out)
    return rows
