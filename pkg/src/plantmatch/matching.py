"""Matching polynomials, monomer-dimer partition functions and their limits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from . import kernels
from .graph import Graph

#: Largest n for the exact matching-polynomial subset DP on a general graph.
MATCHING_DP_LIMIT = 26
#: Largest n for the perfect-matching bitmask DP.
PERFECT_MATCHING_LIMIT = 24
# The compiled DP accumulates in int64, which is exact up to about n = 30.
_INT64_SAFE_N = 30


class SizeLimitError(ValueError):
    """Raised when an exact computation is requested above its size limit."""


class MatchingPolynomial:
    """Coefficients m_k = number of k-edge matchings.

    Either holds exact integer coefficients, or (for the complete graph) only
    the vertex count, in which case the coefficients are produced on demand
    and the log-coefficients come from log-factorials.
    """

    def __init__(self, coeffs=None, *, complete_n: int | None = None):
        if (coeffs is None) == (complete_n is None):
            raise ValueError("give exactly one of coeffs or complete_n")
        self._complete_n = complete_n
        if coeffs is not None:
            c = tuple(int(x) for x in coeffs)
            if not c or c[0] != 1:
                raise ValueError("coeffs[0] must be 1")
            if any(x < 0 for x in c):
                raise ValueError("coefficients must be nonnegative")
            while len(c) > 1 and c[-1] == 0:
                c = c[:-1]
            self._coeffs = c

    @property
    def degree(self) -> int:
        if self._complete_n is not None:
            return self._complete_n // 2
        return len(self._coeffs) - 1

    @cached_property
    def coeffs(self) -> tuple[int, ...]:
        if self._complete_n is None:
            return self._coeffs
        n = self._complete_n
        out = [1]
        for k in range(1, n // 2 + 1):
            # m_k / m_{k-1} = (n-2k+2)(n-2k+1) / (2k)
            out.append(out[-1] * (n - 2 * k + 2) * (n - 2 * k + 1) // (2 * k))
        return tuple(out)

    @cached_property
    def log_coeffs(self) -> np.ndarray:
        if self._complete_n is not None:
            n = self._complete_n
            k = np.arange(n // 2 + 1, dtype=np.float64)
            return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - 2 * k + 1) - k * math.log(2.0)
        with np.errstate(divide="ignore"):
            return np.array([math.log(c) if c > 0 else -np.inf for c in self._coeffs])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MatchingPolynomial) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        if self._complete_n is not None and self._complete_n > 12:
            return f"MatchingPolynomial(complete_n={self._complete_n})"
        return f"MatchingPolynomial({list(self.coeffs)})"


@dataclass(frozen=True)
class ZetaParams:
    """Dimer activity written as lambda = 1 / (zeta n)."""

    zeta: float
    n: int

    def __post_init__(self):
        if not self.zeta > 0:
            raise ValueError("zeta must be positive")

    @property
    def lam(self) -> float:
        return 1.0 / (self.zeta * self.n)


def _adj_words(G: Graph) -> np.ndarray:
    if G.n > 64:
        raise SizeLimitError("bitmask DP supports at most 64 vertices")
    return np.ascontiguousarray(G.rows[:, 0]) if G.n else np.zeros(0, dtype=np.uint64)


def matching_polynomial(G: Graph, limit: int = MATCHING_DP_LIMIT) -> MatchingPolynomial:
    """Exact matching polynomial of G by a profile DP over vertex subsets."""
    if G.n > limit:
        raise SizeLimitError(f"n={G.n} exceeds the matching DP limit {limit}")
    if G.n == 0:
        return MatchingPolynomial([1])
    adj = _adj_words(G)
    impl = kernels if G.n <= _INT64_SAFE_N else kernels.backends()["python"]
    return MatchingPolynomial(impl.matching_poly(adj, G.n))


def matching_polynomial_Kn(n: int) -> MatchingPolynomial:
    """Closed form m_k = n! / (k! (n-2k)! 2^k)."""
    if n < 1:
        raise ValueError("n must be positive")
    return MatchingPolynomial(complete_n=n)


def count_perfect_matchings(G: Graph, limit: int = PERFECT_MATCHING_LIMIT) -> int:
    if G.n % 2:
        return 0
    if G.n > limit:
        raise SizeLimitError(f"n={G.n} exceeds the perfect-matching limit {limit}")
    if G.n == 0:
        return 1
    if np.any(G.degrees == 0):
        return 0
    adj = _adj_words(G)
    impl = kernels if G.n <= _INT64_SAFE_N else kernels.backends()["python"]
    return int(impl.perfect_matchings(adj, G.n))


def _log_weights(poly: MatchingPolynomial, lam: float) -> np.ndarray:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    k = np.arange(poly.degree + 1, dtype=np.float64)
    return poly.log_coeffs + k * math.log(lam)


def log_Z(poly: MatchingPolynomial, lam: float) -> float:
    """log sum_k m_k lam^k, evaluated in log space."""
    if poly.degree == 0:
        return 0.0
    return float(logsumexp(_log_weights(poly, lam)))


def _size_distribution(poly: MatchingPolynomial, lam: float) -> np.ndarray:
    w = _log_weights(poly, lam)
    return np.exp(w - logsumexp(w))


@lru_cache(maxsize=64)
def _kn_size_distribution(n: int, lam: float) -> np.ndarray:
    if math.isinf(lam):
        out = np.zeros(n // 2 + 1)
        out[-1] = 1.0
    else:
        out = _size_distribution(matching_polynomial_Kn(n), lam)
    out.setflags(write=False)
    return out


def matching_size_distribution(n: int, lam: float) -> np.ndarray:
    """P(|M| = k) under the monomer-dimer measure on K_n (k = 0..n//2); read-only, cached."""
    return _kn_size_distribution(int(n), float(lam))


@lru_cache(maxsize=64)
def size_cdf(n: int, lam: float) -> np.ndarray:
    """Cumulative form of :func:`matching_size_distribution`, for inverse-CDF draws."""
    cdf = np.cumsum(matching_size_distribution(n, lam))
    cdf.setflags(write=False)
    return cdf


def expected_matching_size(n: int, lam: float) -> float:
    """E|M| under the monomer-dimer measure on K_n; n/2 (n even) when lam is infinite."""
    if math.isinf(lam):
        if n % 2:
            raise ValueError("infinite activity requires even n")
        return n / 2
    pi = matching_size_distribution(n, lam)
    return float(np.dot(np.arange(pi.size), pi))


def variance_matching_size(n: int, lam: float) -> float:
    if math.isinf(lam):
        return 0.0
    pi = matching_size_distribution(n, lam)
    k = np.arange(pi.size, dtype=np.float64)
    mean = float(np.dot(k, pi))
    return float(np.dot((k - mean) ** 2, pi))


def expected_size(poly: MatchingPolynomial, lam: float) -> float:
    """E|M| for the monomer-dimer measure with the given polynomial."""
    pi = _size_distribution(poly, lam)
    return float(np.dot(np.arange(pi.size), pi))


def c_of_zeta(zeta: float) -> float:
    """Limiting value of 2 E|M| / n when lambda = 1/(zeta n)."""
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    # 1 - (sqrt(z^2+4z) - z)/2 written without cancellation for large zeta
    root = math.sqrt(zeta * zeta + 4.0 * zeta)
    return 1.0 - 2.0 * zeta / (root + zeta)


def free_energy_limit(zeta: float) -> float:
    """Limit of (1/n) log Z_{K_n}(1/(zeta n))."""
    c = c_of_zeta(zeta)
    return -c / 2.0 - math.log1p(-c)
