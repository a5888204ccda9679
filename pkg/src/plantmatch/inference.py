"""Likelihood ratios, threshold tests and their Gaussian limits."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .expansion import ce_log_Z_Kn, ce_series_parts
from .graph import Graph, n_pairs, signed_wedge_from_degrees
from .matching import (
    PERFECT_MATCHING_LIMIT,
    count_perfect_matchings,
    log_Z,
    matching_polynomial,
    matching_polynomial_Kn,
    matching_size_distribution,
)
from .models import ModelParams, Regime
from .templates import ClusterTemplate


class Hypothesis(enum.Enum):
    NULL = "null"
    PLANTED = "planted"

    @classmethod
    def parse(cls, s: "str | Hypothesis") -> "Hypothesis":
        if isinstance(s, Hypothesis):
            return s
        key = s.strip().lower().replace("_", "-")
        return cls({"undernull": "null", "under-null": "null", "q": "null",
                    "underplanted": "planted", "under-planted": "planted", "p": "planted"}.get(key, key))


class TestKind(enum.Enum):
    EDGE = "edge"
    WEDGE = "wedge"


class RegimeMismatch(ValueError):
    pass


def _need_positive(p: float, q: float) -> None:
    if not (0 < p < 1 and 0 < q < 1):
        raise ValueError("p and q must lie in (0, 1)")


# --------------------------------------------------------------- prefactor


def prefactor_F(G: Graph | int, n: int | None = None, *, p: float, q: float) -> float:
    """|A| log(p(1-q)/(q(1-p))) + C(n,2) log((1-p)/(1-q)); exactly 0 when p == q.

    ``G`` may be a Graph, or an edge count together with ``n``.
    """
    _need_positive(p, q)
    if isinstance(G, Graph):
        edges, n = G.edge_count, G.n
    else:
        if n is None:
            raise ValueError("n is required with a bare edge count")
        edges = int(G)
    if p == q:
        return 0.0
    r = math.log(p) + math.log1p(-q) - math.log(q) - math.log1p(-p)
    return edges * r + n_pairs(n) * (math.log1p(-p) - math.log1p(-q))


# ------------------------------------------------------------- exact LLR


@dataclass(frozen=True)
class LlrBreakdown:
    """Log-likelihood ratio log dP/dQ(A) = F + logZ_A - logZ_Kn.

    For finite lambda, ``logZ_A = log Z_A(lam/p)`` and ``logZ_Kn = log Z_{K_n}(lam)``.
    For a perfect planted matching, ``logZ_A = log M(A) - (n/2) log p`` and
    ``logZ_Kn = log M(K_n)``, with M counting perfect matchings. ``impossible``
    marks graphs that have probability zero under the planted model.
    """

    F: float
    logZ_A: float
    logZ_Kn: float
    total: float
    ce_parts: dict | None = None
    impossible: bool = False


def log_double_factorial_odd(n: int) -> float:
    """log (n-1)!! for even n: the number of perfect matchings of K_n."""
    k = n // 2
    return math.lgamma(n + 1) - math.lgamma(k + 1) - k * math.log(2.0)


def exact_llr_breakdown(G: Graph, params: ModelParams) -> LlrBreakdown:
    if G.n != params.n:
        raise ValueError("graph size does not match params.n")
    _need_positive(params.p, params.q)
    F = prefactor_F(G, p=params.p, q=params.q)
    if params.is_perfect:
        if G.n > PERFECT_MATCHING_LIMIT:
            from .matching import SizeLimitError
            raise SizeLimitError(f"n={G.n} exceeds the perfect-matching limit")
        count = count_perfect_matchings(G)
        logZ_Kn = log_double_factorial_odd(G.n)
        if count == 0:
            return LlrBreakdown(F, -math.inf, logZ_Kn, -math.inf, impossible=True)
        logZ_A = math.log(count) - (G.n / 2) * math.log(params.p)
    else:
        logZ_A = log_Z(matching_polynomial(G), params.lam / params.p)
        logZ_Kn = log_Z(matching_polynomial_Kn(G.n), params.lam)
    return LlrBreakdown(F, logZ_A, logZ_Kn, F + logZ_A - logZ_Kn)


def exact_llr(G: Graph, params: ModelParams) -> float:
    """Exact log dP/dQ(G); -inf when G cannot occur under the planted model."""
    return exact_llr_breakdown(G, params).total


def ce_llr(G: Graph, params: ModelParams, M_max: int) -> LlrBreakdown:
    """Cluster-expansion LLR truncated at M_max edges, split by template class."""
    if params.is_perfect:
        raise ValueError("the cluster expansion needs finite lambda")
    _need_positive(params.p, params.q)
    F = prefactor_F(G, p=params.p, q=params.q)
    parts = ce_series_parts(G, params.lam, params.p, M_max, centered=True)
    logZ_Kn = ce_log_Z_Kn(G.n, params.lam, M_max)
    series = sum(parts.values())
    return LlrBreakdown(F, series + logZ_Kn, logZ_Kn, F + series, ce_parts=parts)


# ------------------------------------------------------------ test stats


def var_signed_edge(n: int, q: float) -> float:
    """Variance of the signed edge count under G(n, q)."""
    return n_pairs(n) * q * (1.0 - q)


def var_signed_wedge(n: int, q: float) -> float:
    """Exact variance of the signed wedge count under G(n, q)."""
    return 3 * math.comb(n, 3) * q * q * (1.0 - q) ** 2


def wedge_test_scale(n: int, q: float) -> float:
    """Standardization used by the wedge threshold test: 3 C(n,3) q^2 (1 - q^2)."""
    return 3 * math.comb(n, 3) * q * q * (1.0 - q * q)


def edge_statistic(edge_count: int, n: int, params: ModelParams) -> float:
    return (edge_count - n_pairs(n) * params.q) / math.sqrt(var_signed_edge(n, params.p))


def wedge_statistic(degrees: np.ndarray, n: int, params: ModelParams) -> float:
    return signed_wedge_from_degrees(degrees, n, params.q) / math.sqrt(wedge_test_scale(n, params.q))


def edge_threshold(params: ModelParams) -> float:
    return params.c / (2 * math.sqrt(2)) * math.sqrt((1 - params.p) / params.p)


def wedge_threshold(params: ModelParams) -> float:
    return -params.c ** 2 / (2 * math.sqrt(2) * params.theta)


def _require(params: ModelParams, regime: Regime, what: str) -> None:
    if params.regime is not regime:
        raise RegimeMismatch(f"{what} requires the {regime.value} regime")
    _need_positive(params.p, params.q)


def edge_test(G: Graph, params: ModelParams) -> int:
    """1 (planted) iff the standardized signed edge count reaches the threshold."""
    _require(params, Regime.EQUAL_AMBIENT, "the edge test")
    return int(edge_statistic(G.edge_count, G.n, params) >= edge_threshold(params))


def wedge_test(G: Graph, params: ModelParams) -> int:
    """1 (planted) iff the standardized signed wedge count is at most the threshold."""
    _require(params, Regime.EQUAL_AVERAGE, "the wedge test")
    if params.theta <= 0:
        raise ValueError("the wedge test needs theta > 0")
    return int(wedge_statistic(G.degrees, G.n, params) <= wedge_threshold(params))


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def theoretical_error(params: ModelParams, test: TestKind | str) -> float:
    """Limiting total error (type I + type II) of the threshold test."""
    test = TestKind(test) if isinstance(test, str) else test
    if test is TestKind.EDGE:
        return 2 * normal_cdf(-edge_threshold(params))
    return 2 * normal_cdf(wedge_threshold(params))


@dataclass(frozen=True)
class GaussianPrediction:
    mean: float
    var: float
    sign_convention: Hypothesis


def llr_gaussian_prediction(params: ModelParams, under: Hypothesis | str) -> GaussianPrediction:
    """Limiting normal law of the LLR: mean -var/2 under the null, +var/2 when planted."""
    under = Hypothesis.parse(under)
    c = params.c
    if params.regime is Regime.EQUAL_AMBIENT:
        var = c * c * (1 - params.p) / (2 * params.p)
    else:
        var = c ** 4 / (2 * params.theta ** 2)
    sign = -1.0 if under is Hypothesis.NULL else 1.0
    return GaussianPrediction(sign * var / 2, var, under)


def llr_approx_rhs(G: Graph, params: ModelParams) -> float:
    """Main terms of the LLR expansion driven by the signed edge or wedge count."""
    return approx_rhs_from_counts(G.edge_count, G.degrees, G.n, params)


def approx_rhs_from_counts(edge_count: int, degrees: np.ndarray | None, n: int,
                           params: ModelParams) -> float:
    _need_positive(params.p, params.q)
    p, q = params.p, params.q
    x = params.E_M / n
    if params.regime is Regime.EQUAL_AMBIENT:
        z = (edge_count - n_pairs(n) * q) / math.sqrt(var_signed_edge(n, p))
        return -((1 - p) / p) * x * x + math.sqrt(2 * (1 - p) / p) * x * z
    # The statistic enters with a negative sign: planted graphs have fewer
    # wedges than the null at matched edge density.
    z = signed_wedge_from_degrees(degrees, n, q) / math.sqrt(var_signed_wedge(n, q))
    y = (2 * x) ** 2
    return -y * y / (4 * n * q * q) - y / (math.sqrt(2 * n) * q) * z


# -------------------------------------------------- projection diagnostics


def _falling(n: int, k: int) -> int:
    return math.perm(n, k) if 0 <= k <= n else 0


def _require_tree(t: ClusterTemplate) -> None:
    if not t.is_tree:
        raise ValueError("template must be a simple tree")


def gamma_of_tree(t: ClusterTemplate) -> int:
    """Number of wedges inside the tree: sum of C(deg v, 2)."""
    _require_tree(t)
    return sum(math.comb(d, 2) for d in t.degrees())


def projection_coeffs(t: ClusterTemplate, params: ModelParams) -> tuple[float, float]:
    """Regression coefficients of the tree count on the signed edge and wedge counts under G(n,q)."""
    _require_tree(t)
    n, q, m = params.n, params.q, t.m
    copies = _falling(n, t.v) / t.aut
    alpha = copies * m * q ** m * (1 - q) / var_signed_edge(n, q)
    beta = copies * gamma_of_tree(t) * q ** m * (1 - q) ** 2 / var_signed_wedge(n, q)
    return alpha, beta


def tree_count_variance(t: ClusterTemplate, n: int, q: float) -> float:
    """Leading plus subleading variance of the tree count under G(n, q)."""
    _require_tree(t)
    m, aut = t.m, t.aut
    lead = 2 * m * m * (1 - q) * q ** (2 * m - 1) * _falling(n, m + 1) * _falling(n, m - 1) / aut ** 2
    g = gamma_of_tree(t)
    if g == 0:
        return lead
    sub = 2 * g * g * (1 - q * q) * q ** (2 * m - 2) * _falling(n, m + 1) * _falling(n, m - 2) / aut ** 2
    return lead + sub


def F_decomposition(G: Graph | int, params: ModelParams, n: int | None = None) -> tuple[float, float, float]:
    """Split of the prefactor F into a linear edge term and two constants."""
    if params.regime is not Regime.EQUAL_AVERAGE:
        raise RegimeMismatch("the prefactor split applies to the equal-average regime")
    if isinstance(G, Graph):
        edges, n = G.edge_count, G.n
    else:
        edges = int(G)
        if n is None:
            n = params.n
    q, cn = params.q, params.c_n
    k2 = edges - n_pairs(n) * q
    F1 = -(cn / (n * q)) * k2
    F2 = -(cn ** 2 / 4) * (1 - q) / q
    F3 = -(cn ** 3 / (6 * n)) * (1 - q * q) / q ** 2
    return F1, F2, F3


# ------------------------------------------------- exact count moments


@dataclass(frozen=True)
class CountMoments:
    """Exact mean and variance of the signed counts (centered at q)."""

    mean_edge: float
    var_edge: float
    mean_wedge: float
    var_wedge: float


def signed_count_moments(params: ModelParams, under: Hypothesis | str) -> CountMoments:
    """Exact finite-n moments of the signed edge and wedge counts.

    Under the planted model the moments are computed conditionally on the
    matching size and mixed over its exact distribution.
    """
    under = Hypothesis.parse(under)
    n, p, q = params.n, params.p, params.q
    N = n_pairs(n)
    W = 3 * math.comb(n, 3)
    if under is Hypothesis.NULL:
        return CountMoments(0.0, N * q * (1 - q), 0.0, W * q * q * (1 - q) ** 2)
    pi = matching_size_distribution(n, params.lam)
    k = np.arange(pi.size, dtype=np.float64)
    mean_e_k = k * (1 - q) + (N - k) * (p - q)
    var_e_k = (N - k) * p * (1 - p)
    u = (1 - q) + (n - 3) * (p - q)
    w = (n - 2) * (p - q)
    touch = 2 * k * (n - 2)
    mean_w_k = touch * (1 - q) * (p - q) + (W - touch) * (p - q) ** 2
    lin = ((2 * k * (2 * k - 1) / 2 - k) * (2 * u) ** 2
           + 2 * k * (n - 2 * k) * (u + w) ** 2
           + (n - 2 * k) * (n - 2 * k - 1) / 2 * (2 * w) ** 2)
    var_w_k = lin * p * (1 - p) + (W - touch) * (p * (1 - p)) ** 2

    def mix(mean_k, var_k):
        m = float(np.dot(pi, mean_k))
        return m, float(np.dot(pi, var_k) + np.dot(pi, (mean_k - m) ** 2))

    me, ve = mix(mean_e_k, var_e_k)
    mw, vw = mix(mean_w_k, var_w_k)
    return CountMoments(me, ve, mw, vw)


def leading_planted_wedge_mean(params: ModelParams) -> float:
    """Large-n form -2 (E|M|)^2 / n of the planted mean of the signed wedge count."""
    return -2 * params.E_M ** 2 / params.n
