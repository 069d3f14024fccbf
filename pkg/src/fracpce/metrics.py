"""Reference CDFs and the generalized Kullback-Leibler CDF error.

Every method is scored by integrating the pointwise divergence

    D(F, F~) = F ln(F / F~) + F~ - F

between the reference CDF F and the fitted CDF F~ over a grid spanning both
effective supports.  D is the Bregman divergence of t ln t, hence
non-negative and zero only where the CDFs agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

ANALYTIC_NORMAL = "analytic-normal"
EMPIRICAL = "empirical"

_FLOOR = 1e-300


@dataclass(frozen=True)
class ReferenceCdf:
    """Reference distribution: analytic normal or a (large) empirical sample."""

    kind: str
    mean: float = float("nan")
    std: float = float("nan")
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == ANALYTIC_NORMAL:
            if not (np.isfinite(self.mean) and self.std > 0):
                raise ValueError("analytic reference needs finite mean and std > 0")
        elif self.kind == EMPIRICAL:
            if self.samples is None or len(self.samples) < 1000:
                raise ValueError("empirical reference needs >= 1000 samples")
            if np.any(np.diff(self.samples) < 0):
                raise ValueError("empirical samples must be sorted ascending")
        else:
            raise ValueError(f"unknown reference kind {self.kind!r}")

    @staticmethod
    def normal(mean: float, std: float) -> "ReferenceCdf":
        return ReferenceCdf(kind=ANALYTIC_NORMAL, mean=mean, std=std)

    @staticmethod
    def from_samples(samples) -> "ReferenceCdf":
        s = np.sort(np.asarray(samples, dtype=float))
        return ReferenceCdf(kind=EMPIRICAL, samples=s)

    def cdf(self, x):
        if self.kind == ANALYTIC_NORMAL:
            return ndtr((np.asarray(x, dtype=float) - self.mean) / self.std)
        return empirical_cdf(self.samples, x)

    def quantile(self, q: float) -> float:
        if self.kind == ANALYTIC_NORMAL:
            return float(self.mean + self.std * ndtri(q))
        n = len(self.samples)
        k = min(max(int(np.ceil(q * n)) - 1, 0), n - 1)
        return float(self.samples[k])


def empirical_cdf(samples, x):
    """Right-continuous empirical CDF: fraction of samples <= x."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empirical CDF needs at least one sample")
    sorted_s = samples if np.all(np.diff(samples) >= 0) else np.sort(samples)
    out = np.searchsorted(sorted_s, np.asarray(x, dtype=float), side="right") / samples.size
    return float(out) if np.ndim(x) == 0 else out


def kl_pointwise(F, F_tilde):
    """Generalized KL divergence of two CDF values, elementwise.

    The F = 0 term is taken as 0 + F~, and F~ is floored at 1e-300 when
    F > 0 so the logarithm stays finite.
    """
    F = np.asarray(F, dtype=float)
    Ft = np.asarray(F_tilde, dtype=float)
    if np.any((F < -1e-12) | (F > 1 + 1e-12)) or np.any((Ft < -1e-12) | (Ft > 1 + 1e-12)):
        raise ValueError("CDF values must lie in [0, 1]")
    Fc = np.clip(F, 0.0, 1.0)
    Ftc = np.clip(Ft, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = Fc * np.log(Fc / np.maximum(Ftc, _FLOOR))
    term = np.where(Fc > 0.0, term, 0.0)
    out = np.maximum(term + Ftc - Fc, 0.0)
    return float(out) if np.ndim(F) == 0 and np.ndim(F_tilde) == 0 else out


@dataclass(frozen=True)
class GridConfig:
    """Integration grid for the total error."""

    n_points: int = 2048
    tail: float = 1e-6
    extend: float = 0.1


def total_error(ref: ReferenceCdf, approx_cdf, grid: GridConfig = GridConfig()) -> float:
    """Integrated divergence between the reference and an approximate CDF.

    The grid spans the reference's [tail, 1-tail] quantile range, extended
    by ``extend`` of the span on each side, with ``n_points`` uniform points
    integrated by the trapezoidal rule.
    """
    lo = ref.quantile(grid.tail)
    hi = ref.quantile(1.0 - grid.tail)
    span = hi - lo
    if span <= 0:
        raise ValueError("reference distribution is degenerate on the grid")
    chi = np.linspace(lo - grid.extend * span, hi + grid.extend * span, grid.n_points)
    F = np.asarray(ref.cdf(chi), dtype=float)
    Ft = np.asarray(approx_cdf(chi), dtype=float)
    if not np.all(np.isfinite(Ft)):
        raise ValueError("approximate CDF returned non-finite values")
    return float(np.trapezoid(kl_pointwise(F, Ft), chi))
