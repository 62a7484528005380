"""Statistical primitives: seeded sampling, chi-squared / Student-t helpers,
and the one-sample Kolmogorov-Smirnov test.

Random streams are counter-based (Philox keyed by ``(seed, stream)``), so a
draw is a pure function of its seed, its domain tag, and its index --
parallel consumers get bit-identical results regardless of scheduling.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

# Domain tags keep independent stream families from colliding on one seed.
DOMAIN_SIM = 1
DOMAIN_FDR_DATASET = 2
DOMAIN_MANDEL = 3
DOMAIN_GENERATE = 4

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SeededGenerator:
    """Value-like handle for one reproducible random stream."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = [self.seed & _MASK64, self.stream_id & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, stream_id: int) -> "SeededGenerator":
        return SeededGenerator(self.seed, stream_id)


def stream(seed: int, domain: int, index: int = 0) -> np.random.Generator:
    """Generator for stream ``index`` of a domain family under ``seed``."""
    sid = ((domain & _MASK32) << 32) | (index & _MASK32)
    return SeededGenerator(seed, sid).generator()


def sample_standard_normal(gen: SeededGenerator, count: int) -> np.ndarray:
    """``count`` i.i.d. N(0,1) draws from the stream ``gen`` identifies."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return gen.generator().standard_normal(count)


def chi2_cdf(x, df: float):
    if df <= 0:
        raise ValueError("df must be positive")
    return stats.chi2.cdf(x, df)


def chi2_quantile(df: float, p: float) -> float:
    """Inverse chi-squared CDF; fractional df supported."""
    if df <= 0:
        raise ValueError("df must be positive")
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return float(stats.chi2.ppf(p, df))


def t_cdf(x, df: float):
    """Student-t CDF with (possibly fractional) df."""
    if df <= 0:
        raise ValueError("df must be positive")
    return stats.t.cdf(x, df)


def t_sf(x, df: float):
    """Student-t survival function 1 - F(x); used for two-sided p-values."""
    if np.any(np.asarray(df) <= 0):
        raise ValueError("df must be positive")
    return stats.t.sf(x, df)


def kolmogorov_sf(y: float, terms: int = 25) -> float:
    """Asymptotic Kolmogorov tail P(sup|B| > y) = 2 sum_k (-1)^(k-1) exp(-2 k^2 y^2)."""
    if y <= 0:
        return 1.0
    k = np.arange(1, terms + 1)
    total = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * (k * y) ** 2))
    return float(min(max(total, 0.0), 1.0))


@dataclass(frozen=True)
class KsResult:
    statistic: float   # sup-norm D
    p_value: float
    n_sample: int


def ks_test(sample, cdf: Callable) -> KsResult:
    """One-sample two-sided KS test with the asymptotic p-value.

    ``cdf`` must map sample values into [0, 1].
    """
    x = np.asarray(sample, dtype=np.float64)
    if x.size == 0:
        raise ValueError("sample is empty")
    if x.size < 10:
        raise ValueError("sample size must be >= 10")
    xs = np.sort(x)
    F = np.asarray(cdf(xs), dtype=np.float64)
    if np.any(F < -1e-12) or np.any(F > 1 + 1e-12):
        raise ValueError("cdf returned values outside [0, 1]")
    n = x.size
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - F)
    d_minus = np.max(F - (i - 1) / n)
    D = float(max(d_plus, d_minus))
    return KsResult(D, kolmogorov_sf(np.sqrt(n) * D), n)
