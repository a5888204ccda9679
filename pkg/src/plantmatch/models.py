"""Null and planted random-graph models and their exact samplers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .graph import Graph, bernoulli_pairs, n_pairs, pair_index
from .matching import c_of_zeta, expected_matching_size, size_cdf

INF = math.inf


class Regime(enum.Enum):
    EQUAL_AMBIENT = "equal-ambient"
    EQUAL_AVERAGE = "equal-average"

    @classmethod
    def parse(cls, s: "str | Regime") -> "Regime":
        if isinstance(s, Regime):
            return s
        key = s.strip().lower().replace("_", "-")
        aliases = {"equalambient": "equal-ambient", "equalaverage": "equal-average"}
        return cls(aliases.get(key, key))


class ParameterError(ValueError):
    pass


def q_from_p(n: int, p: float, lam: float) -> float:
    """Null density that matches the planted model's average edge density."""
    if not 0.0 <= p < 1.0:
        raise ParameterError("p must lie in [0, 1)")
    em = expected_matching_size(n, lam)
    q = p + em * (1.0 - p) / n_pairs(n)
    if q >= 1.0:
        raise ParameterError(f"matched null density q={q} is not below 1")
    return q


@dataclass(frozen=True)
class ModelParams:
    """Parameters (n, p, q, lambda) of the planted and null models.

    ``lam`` may be ``math.inf`` for a uniformly random perfect matching.
    Build instances with :meth:`create`, which fills ``q`` from the regime.
    """

    n: int
    p: float
    q: float
    lam: float
    regime: Regime = Regime.EQUAL_AMBIENT

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime.parse(self.regime))
        if self.n < 2:
            raise ParameterError("n must be at least 2")
        if not 0.0 <= self.p < 1.0 or not 0.0 <= self.q < 1.0:
            raise ParameterError("p and q must lie in [0, 1)")
        if not self.lam > 0:
            raise ParameterError("lambda must be positive or inf")
        if self.is_perfect and self.n % 2:
            raise ParameterError("infinite lambda requires even n")
        if self.regime is Regime.EQUAL_AMBIENT and self.p != self.q:
            raise ParameterError("equal-ambient regime requires p == q")
        if self.regime is Regime.EQUAL_AVERAGE:
            expect = q_from_p(self.n, self.p, self.lam)
            if not math.isclose(self.q, expect, rel_tol=1e-12, abs_tol=1e-15):
                raise ParameterError(f"equal-average regime requires q = {expect}")

    @classmethod
    def create(cls, n: int, p: float, *, lam: float | None = None, zeta: float | None = None,
               regime: "Regime | str" = Regime.EQUAL_AMBIENT) -> "ModelParams":
        if (lam is None) == (zeta is None):
            raise ParameterError("give exactly one of lam or zeta")
        if zeta is not None:
            if not zeta > 0:
                raise ParameterError("zeta must be positive")
            lam = 1.0 / (zeta * n)
        regime = Regime.parse(regime)
        q = p if regime is Regime.EQUAL_AMBIENT else q_from_p(n, p, lam)
        return cls(n=n, p=p, q=q, lam=float(lam), regime=regime)

    @property
    def is_perfect(self) -> bool:
        return math.isinf(self.lam)

    @property
    def zeta(self) -> float:
        return INF if self.is_perfect else 1.0 / (self.lam * self.n)

    @property
    def theta(self) -> float:
        return self.p * math.sqrt(self.n)

    @property
    def c(self) -> float:
        """Limiting matching fraction: c(zeta), or 1 for a perfect matching."""
        return 1.0 if self.is_perfect else c_of_zeta(self.zeta)

    @cached_property
    def E_M(self) -> float:
        return expected_matching_size(self.n, self.lam)

    @property
    def c_n(self) -> float:
        """Finite-n matching fraction 2 E|M| / (n - 1)."""
        return 2.0 * self.E_M / (self.n - 1)

    def to_config(self) -> str:
        lines = [f"n = {self.n}", f"p = {self.p!r}", f"regime = \"{self.regime.value}\""]
        if self.is_perfect:
            lines.append("lambda = inf")
        else:
            lines.append(f"zeta = {self.zeta!r}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "q": self.q,
                "lambda": "inf" if self.is_perfect else self.lam,
                "zeta": "inf" if self.is_perfect else self.zeta,
                "regime": self.regime.value}

    @classmethod
    def from_config(cls, text: str) -> "ModelParams":
        kv = parse_flat_config(text)
        unknown = set(kv) - {"n", "p", "regime", "zeta", "lambda", "lambda_inv_n", "q"}
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        n = int(kv["n"])
        p = float(kv["p"])
        regime = Regime.parse(str(kv.get("regime", "equal-ambient")))
        zeta = kv.get("zeta", kv.get("lambda_inv_n"))
        if zeta is not None and str(zeta) != "inf":
            out = cls.create(n, p, zeta=float(zeta), regime=regime)
        elif "lambda" in kv or str(zeta) == "inf":
            out = cls.create(n, p, lam=float(kv.get("lambda", "inf")), regime=regime)
        else:
            raise ParameterError("config needs zeta or lambda")
        if "q" in kv and not math.isclose(float(kv["q"]), out.q, rel_tol=1e-12):
            raise ParameterError("config q disagrees with the regime")
        return out


def parse_flat_config(text: str) -> dict[str, object]:
    """Parse ``key = value`` lines; values are ints, floats, inf or quoted strings."""
    out: dict[str, object] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"bad config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if len(val) >= 2 and val[0] == val[-1] and val[0] in "\"'":
            out[key] = val[1:-1]
            continue
        try:
            out[key] = int(val)
        except ValueError:
            try:
                out[key] = float(val)
            except ValueError:
                out[key] = val
    return out


@dataclass(frozen=True)
class Matching:
    """Vertex-disjoint edges on ``n`` vertices, stored as an (k, 2) array with u < v."""

    n: int
    edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        e = np.sort(e, axis=1)
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
        if np.unique(e).size != e.size:
            raise ValueError("matching edges must be vertex-disjoint")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @property
    def size(self) -> int:
        return int(self.edges.shape[0])

    @property
    def pairs(self) -> np.ndarray:
        return np.sort(pair_index(self.edges[:, 0], self.edges[:, 1], self.n)).astype(np.int64)

    def as_tuples(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in self.edges]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matching) and self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.edges.tobytes()))


@dataclass(frozen=True)
class PlantedSample:
    graph: Graph
    hidden: Matching


def _pair_prefix(rng: np.random.Generator, n: int, k: int) -> Matching:
    perm = rng.permutation(n)[: 2 * k]
    return Matching(n, perm.reshape(-1, 2))


def draw_matching(rng: np.random.Generator, n: int, lam: float) -> Matching:
    """Monomer-dimer matching of K_n (uniform perfect matching if lam is inf)."""
    if math.isinf(lam):
        if n % 2:
            raise ValueError("perfect matching needs even n")
        return _pair_prefix(rng, n, n // 2)
    cdf = size_cdf(int(n), float(lam))
    k = min(int(np.searchsorted(cdf, rng.random(), side="right")), cdf.size - 1)
    return _pair_prefix(rng, n, k)


def sample_matching_gibbs(n: int, lam: float, seed: int) -> Matching:
    """Exact draw: size k with probability proportional to m_k lam^k, then a uniform k-matching."""
    if not 0 < lam < INF:
        raise ValueError("lambda must be finite and positive")
    return draw_matching(np.random.default_rng(seed), n, lam)


def sample_uniform_perfect_matching(n: int, seed: int) -> Matching:
    if n % 2:
        raise ValueError("n must be even")
    return draw_matching(np.random.default_rng(seed), n, INF)


def draw_planted(rng: np.random.Generator, params: ModelParams) -> PlantedSample:
    M = draw_matching(rng, params.n, params.lam)
    noise = bernoulli_pairs(rng, n_pairs(params.n), params.p)
    pairs = np.union1d(noise, M.pairs).astype(np.int64)
    return PlantedSample(Graph(params.n, pairs, _trusted=True), M)


def draw_null(rng: np.random.Generator, params: ModelParams) -> Graph:
    return Graph(params.n, bernoulli_pairs(rng, n_pairs(params.n), params.q), _trusted=True)


def sample_planted(params: ModelParams, seed: int) -> PlantedSample:
    return draw_planted(np.random.default_rng(seed), params)


def sample_null(params: ModelParams, seed: int) -> Graph:
    return draw_null(np.random.default_rng(seed), params)
