"""Truncated cluster-expansion series for monomer-dimer partition functions.

Each template ``t`` with ``m`` edges contributes
``lam^m * psi * ordering * ursell * G0(.)`` where ``G0`` is its simple
support. The coefficients for K_n are also available from the exact power
series of ``log Z_{K_n}``, which gives an independent check of the template
sums and a way to evaluate beyond the template cap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .graph import Graph, count_simple_template, count_template_in_Kn
from .matching import matching_polynomial_Kn
from .templates import (
    TEMPLATE_CAP,
    ClusterTemplate,
    TemplateFilter,
    TemplateTerm,
    enumerate_templates,
    parse_dump_line,
    template_weights,
)


def default_truncation(n: int) -> int:
    """ceil(2 ln n), the default number of series terms."""
    return max(1, math.ceil(2.0 * math.log(n)))


def _check_cap(M_max: int, cap: int) -> None:
    if M_max < 1:
        raise ValueError("M_max must be at least 1")
    if M_max > cap:
        raise ValueError(f"M_max={M_max} exceeds the template cap {cap}")


class TemplateClass(enum.Enum):
    SIMPLE_TREES = "simpleTrees"
    ONE_REP_TREES = "oneRepTrees"
    TWO_REP_TREES = "twoRepTrees"
    REMAINDER = "remainder"


def template_class(t: ClusterTemplate) -> TemplateClass:
    if t.support_is_tree and t.excess <= 2:
        return (TemplateClass.SIMPLE_TREES, TemplateClass.ONE_REP_TREES,
                TemplateClass.TWO_REP_TREES)[t.excess]
    return TemplateClass.REMAINDER


def golden_table() -> list[TemplateTerm]:
    """Shipped reference rows: every template with m <= 3 and the tree-support ones with m = 4."""
    text = resources.files("plantmatch").joinpath("data/templates_m4.txt").read_text()
    return [parse_dump_line(line) for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")]


# ------------------------------------------------------------ K_n series


def kn_coefficient(n: int, m: int, filter: TemplateFilter | str = TemplateFilter.ALL) -> Fraction:
    """Coefficient of lam^m in the template series for log Z_{K_n}(lam)."""
    total = Fraction(0)
    for t in enumerate_templates(m, filter):
        if t.v > n:
            continue
        total += template_weights(t).weight * count_template_in_Kn(n, t.support)
    return total


@lru_cache(maxsize=256)
def log_Kn_taylor(n: int, M_max: int) -> tuple[Fraction, ...]:
    """Exact Taylor coefficients l_1..l_M of log Z_{K_n}(lam) around lam = 0."""
    coeffs = matching_polynomial_Kn(n).coeffs
    P = [Fraction(coeffs[k]) if k < len(coeffs) else Fraction(0) for k in range(M_max + 1)]
    ell = [Fraction(0)] * (M_max + 1)
    for k in range(1, M_max + 1):
        acc = k * P[k]
        for j in range(1, k):
            acc -= j * ell[j] * P[k - j]
        ell[k] = acc / k
    return tuple(ell[1:])


def _poly_eval(coeffs, lam: float, weight_by_power: bool = False) -> float:
    total = 0.0
    for m, a in enumerate(coeffs, start=1):
        w = m if weight_by_power else 1
        total += w * float(a) * lam ** m
    return total


def ce_log_Z_Kn(n: int, lam: float, M_max: int, *, cap: int = TEMPLATE_CAP) -> float:
    """Template-series value of log Z_{K_n}(lam) truncated at M_max edges."""
    _check_cap(M_max, cap)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return _poly_eval([kn_coefficient(n, m) for m in range(1, M_max + 1)], lam)


def ce_log_Z_Kn_formal(n: int, lam: float, M_max: int) -> float:
    """Same truncated series from the exact power series (no template cap)."""
    return _poly_eval(log_Kn_taylor(n, M_max), lam)


def ce_expected_M(n: int, lam: float, M_max: int, trees_only: bool = False, *,
                  cap: int = TEMPLATE_CAP) -> float:
    """Truncated series for E|M| = lam d/dlam log Z_{K_n}."""
    _check_cap(M_max, cap)
    f = TemplateFilter.SIMPLE_TREES if trees_only else TemplateFilter.ALL
    return _poly_eval([kn_coefficient(n, m, f) for m in range(1, M_max + 1)], lam,
                      weight_by_power=True)


def expected_M_coefficients(n: int, M_max: int) -> list[Fraction]:
    """Exact coefficients of lam^m in the E|M| series (m = 1..M_max)."""
    return [m * kn_coefficient(n, m) for m in range(1, M_max + 1)]


# ------------------------------------------------------------- A series


def ce_series_parts(G: Graph, lam: float, p: float, M_max: int, *, centered: bool,
                    cap: int = TEMPLATE_CAP) -> dict[str, float]:
    """Per-class sums of ``lam^m w(t) [G0(A)/p^m - centered * G0(K_n)]``."""
    _check_cap(M_max, cap)
    parts = {c.value: 0.0 for c in TemplateClass}
    counts: dict[ClusterTemplate, int] = {}
    for t in enumerate_templates(M_max, cumulative=True):
        if t.v > G.n:
            continue
        s = t.support
        if s not in counts:
            counts[s] = count_simple_template(G, s)
        value = counts[s] / p ** t.m
        if centered:
            value -= count_template_in_Kn(G.n, s)
        parts[template_class(t).value] += float(template_weights(t).weight) * lam ** t.m * value
    return parts


def ce_log_Z_A(G: Graph, lam: float, p: float, M_max: int, *, cap: int = TEMPLATE_CAP) -> float:
    """Template-series value of log Z_A(lam / p)."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return float(sum(ce_series_parts(G, lam, p, M_max, centered=False, cap=cap).values()))


# --------------------------------------------------------- Penrose tails


def penrose_term_Kn(n: int, lam: float, m: int) -> float:
    """Bound on sum over m-clusters of K_n edges of |ursell| lam^m."""
    delta = 2 * n - 3
    return m ** (m - 2) / math.factorial(m) * (n * (n - 1) / 2) * delta ** (m - 1) * lam ** m


def penrose_tail_Kn(n: int, lam: float, start: int, stop: int) -> float:
    """Sum of :func:`penrose_term_Kn` for start <= m <= stop."""
    return float(sum(penrose_term_Kn(n, lam, m) for m in range(start, stop + 1)))


def penrose_tail_A(G: Graph, lam: float, p: float, start: int, stop: int) -> float:
    """Same bound for the series of log Z_A(lam/p), using the maximum degree of A."""
    if G.edge_count == 0:
        return 0.0
    delta = 2 * int(G.degrees.max()) - 1
    a = lam / p
    total = 0.0
    for m in range(start, stop + 1):
        total += m ** (m - 2) / math.factorial(m) * a ** m * G.edge_count * delta ** (m - 1)
    return total


@dataclass(frozen=True)
class TruncationReport:
    n: int
    lam: float
    M_target: int
    M_used: int
    series: float
    exact: float
    error: float
    tail_bound: float
    formal_series: float

    @property
    def bound(self) -> float:
        return self.error + self.tail_bound

    @property
    def ok(self) -> bool:
        return self.bound <= 1.0 / self.n


def truncation_check(n: int, lam: float, M_max: int | None = None, *,
                     cap: int = TEMPLATE_CAP) -> TruncationReport:
    """Compare the truncated template series of log Z_{K_n} with the exact value.

    If ``M_max`` exceeds the template cap, the series is evaluated at the cap and
    the Penrose bound on the omitted orders ``cap+1..M_max`` is reported.
    """
    from .matching import log_Z

    M_target = default_truncation(n) if M_max is None else M_max
    used = min(M_target, cap)
    series = ce_log_Z_Kn(n, lam, used, cap=cap)
    exact = log_Z(matching_polynomial_Kn(n), lam)
    tail = penrose_tail_Kn(n, lam, used + 1, M_target) if M_target > used else 0.0
    return TruncationReport(n, lam, M_target, used, series, exact, abs(series - exact), tail,
                            ce_log_Z_Kn_formal(n, lam, M_target))


# ---------------------------------------------------------- Ursell identities


class Identity(enum.Enum):
    ONE_REP_CONVOLUTION = "one-rep-convolution"
    WEDGE_MARKED = "wedge-marked"
    TRIPLE_EDGE = "triple-edge"

    @classmethod
    def parse(cls, s: "str | Identity") -> "Identity":
        if isinstance(s, Identity):
            return s
        key = s.strip().lower().replace("_", "-")
        aliases = {"onerepconvolution": "one-rep-convolution", "wedgemarked": "wedge-marked",
                   "tripleedge": "triple-edge"}
        return cls(aliases.get(key, key))


IDENTITY_CAP = 5


@dataclass(frozen=True)
class IdentityReport:
    which: Identity
    m: int
    lhs: Fraction
    rhs: Fraction

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def __bool__(self) -> bool:
        return self.equal


def gamma(t: ClusterTemplate) -> int:
    """Number of wedges: sum over vertices of C(deg, 2)."""
    return sum(math.comb(d, 2) for d in t.degrees())


def _trees(m: int) -> list[tuple[Fraction, int, ClusterTemplate]]:
    """(phi_tilde, aut, template) for unlabeled trees with m edges."""
    return [(template_weights(t).phi_tilde, t.aut, t)
            for t in enumerate_templates(m, TemplateFilter.SIMPLE_TREES)]


def _rep_trees(m: int, mult: int) -> list[tuple[Fraction, int, ClusterTemplate]]:
    """Trees with m support edges where exactly one edge has the given multiplicity."""
    out = []
    for t in enumerate_templates(m + mult - 1, TemplateFilter.ALL):
        if t.support_is_tree and t.v == m + 1 and sorted(t.multiplicities)[-1] == mult \
                and sum(1 for k in t.multiplicities if k > 1) == 1:
            out.append((template_weights(t).phi_tilde, t.aut, t))
    return out


def verify_ursell_identity(which: "Identity | str", m: int, *, cap: int = IDENTITY_CAP) -> IdentityReport:
    """Evaluate both sides of a tree convolution identity for Ursell values exactly."""
    which = Identity.parse(which)
    if m < 1 or m > cap:
        raise ValueError(f"m must lie in 1..{cap}")
    if which is Identity.ONE_REP_CONVOLUTION:
        lhs = sum((ph / (2 * a) for ph, a, _ in _rep_trees(m, 2)), Fraction(0))
        rhs = Fraction(0)
        for ell in range(1, m + 1):
            left = sum((ell * ph / a for ph, a, _ in _trees(ell)), Fraction(0))
            right = sum(((m + 1 - ell) * ph / a for ph, a, _ in _trees(m + 1 - ell)), Fraction(0))
            rhs -= left * right
    elif which is Identity.WEDGE_MARKED:
        lhs = sum((ph * gamma(t) / a for ph, a, t in _trees(m)), Fraction(0))
        rhs = Fraction(0)
        for ell in range(1, m):
            left = sum((ph / a for ph, a, _ in _trees(ell)), Fraction(0))
            right = sum((ph / a for ph, a, _ in _trees(m - ell)), Fraction(0))
            rhs -= 2 * ell * (m - ell) * left * right
    else:
        lhs = sum((ph / a for ph, a, _ in _rep_trees(m, 3)), Fraction(0)) / 6
        rhs = Fraction(0)
        for ell in range(1, m + 1):
            left = sum((ph / a for ph, a, _ in _rep_trees(ell, 2)), Fraction(0))
            right = sum(((m + 1 - ell) * ph / a for ph, a, _ in _trees(m + 1 - ell)), Fraction(0))
            rhs -= Fraction(2, 3) * left * right
    return IdentityReport(which, m, lhs, rhs)


# ------------------------------------------------------- planted clique demo


@lru_cache(maxsize=None)
def connected_labeled_graphs(s: int) -> int:
    """Number of connected labeled simple graphs on s vertices."""
    if s == 1:
        return 1
    total = 2 ** math.comb(s, 2)
    for j in range(1, s):
        total -= math.comb(s - 1, j - 1) * connected_labeled_graphs(j) * 2 ** math.comb(s - j, 2)
    return total


def planted_clique_partial_kl(n: int, k: float, v_max: int) -> float:
    """Sum over connected subgraphs a of K_n with at most v_max vertices of (k/n)^(2|V(a)|)."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 <= k <= n:
        raise ValueError("k must lie in [0, n]")
    if v_max < 2:
        return 0.0
    r = (k / n) ** 2
    v_max = min(v_max, n)
    return float(sum(math.comb(n, s) * connected_labeled_graphs(s) * r ** s
                     for s in range(2, v_max + 1)))


def kn_series_by_tuples(n: int, m: int) -> Fraction:
    """Coefficient of lam^m summing ursell over all ordered m-tuples of K_n edges.

    Brute force over C(n,2)^m tuples; used to validate the template grouping.
    """
    from .templates import IncompatibilityGraph, ursell
    from itertools import product

    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = Fraction(0)
    for tup in product(range(len(edges)), repeat=m):
        slots = [edges[i] for i in tup]
        total += ursell(IncompatibilityGraph.of_slots(slots))
    return total

