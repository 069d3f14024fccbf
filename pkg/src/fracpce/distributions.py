"""Input random-variable models and transforms to/from the germ space.

Three kinds of scalar inputs are supported: ``normal``, ``truncated-normal``
and ``uniform``.  For a truncated normal, ``mean`` and ``std`` are the
parameters of the untruncated parent; the default truncation keeps physical
positivity while leaving negligible mass outside (lower = max(0, mean-4*std),
upper = mean+4*std).

The isoprobabilistic transform maps a physical value x to the germ value
xi = G^-1(F(x)) where F is the input CDF and G the germ CDF (standard normal
for a hermite germ dimension, uniform on [-1, 1] for a legendre one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .polybasis import GermSpec, HERMITE, LEGENDRE

NORMAL = "normal"
TRUNCATED_NORMAL = "truncated-normal"
UNIFORM = "uniform"
KINDS = (NORMAL, TRUNCATED_NORMAL, UNIFORM)


@dataclass(frozen=True)
class InputVariable:
    """One scalar input variable in physical units.

    ``lower``/``upper`` bound the support; they are only meaningful for the
    uniform and truncated-normal kinds (a plain normal has infinite support).
    """

    kind: str
    mean: float
    std: float
    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown input kind {self.kind!r}; expected one of {KINDS}")
        if not self.std > 0:
            raise ValueError("std must be positive")
        if not self.lower < self.upper:
            raise ValueError("lower must be strictly below upper")
        if self.kind == NORMAL and (math.isfinite(self.lower) or math.isfinite(self.upper)):
            raise ValueError("plain normal variables have unbounded support")
        if self.kind == UNIFORM and not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("uniform variables need finite bounds")
        if self.kind == TRUNCATED_NORMAL and not (
            math.isfinite(self.lower) or math.isfinite(self.upper)
        ):
            raise ValueError("truncated normal needs at least one finite bound")

    @staticmethod
    def normal(mean: float, std: float) -> "InputVariable":
        return InputVariable(NORMAL, mean, std)

    @staticmethod
    def uniform(lower: float, upper: float) -> "InputVariable":
        mean = 0.5 * (lower + upper)
        std = (upper - lower) / math.sqrt(12.0)
        return InputVariable(UNIFORM, mean, std, lower, upper)

    @staticmethod
    def truncated_normal(
        mean: float, std: float, lower: float | None = None, upper: float | None = None
    ) -> "InputVariable":
        """Truncated normal with parent parameters (mean, std).

        Default bounds follow the positivity-preserving convention
        lower = max(0, mean - 4 std), upper = mean + 4 std.
        """
        if lower is None:
            lower = max(0.0, mean - 4.0 * std)
        if upper is None:
            upper = mean + 4.0 * std
        return InputVariable(TRUNCATED_NORMAL, mean, std, lower, upper)


@dataclass(frozen=True)
class InputVector:
    """Ordered collection of mutually independent input variables."""

    variables: tuple[InputVariable, ...]

    def __post_init__(self):
        if len(self.variables) < 1:
            raise ValueError("input vector needs at least one variable")

    def __len__(self) -> int:
        return len(self.variables)

    @property
    def dim(self) -> int:
        return len(self.variables)


def _trunc_mass(v: InputVariable) -> tuple[float, float]:
    zl = (v.lower - v.mean) / v.std if math.isfinite(v.lower) else -math.inf
    zu = (v.upper - v.mean) / v.std if math.isfinite(v.upper) else math.inf
    fl = ndtr(zl) if math.isfinite(zl) else 0.0
    fu = ndtr(zu) if math.isfinite(zu) else 1.0
    return float(fl), float(fu)


def cdf(v: InputVariable, x):
    """CDF of an input variable, clamped to [0, 1] outside the support."""
    x = np.asarray(x, dtype=float)
    if v.kind == NORMAL:
        out = ndtr((x - v.mean) / v.std)
    elif v.kind == UNIFORM:
        out = np.clip((x - v.lower) / (v.upper - v.lower), 0.0, 1.0)
    else:
        fl, fu = _trunc_mass(v)
        out = (ndtr((x - v.mean) / v.std) - fl) / (fu - fl)
        out = np.clip(out, 0.0, 1.0)
        out = np.where(x < v.lower, 0.0, np.where(x > v.upper, 1.0, out))
    return float(out) if out.ndim == 0 else out


def pdf(v: InputVariable, x):
    """Density of an input variable (zero outside the support)."""
    x = np.asarray(x, dtype=float)
    if v.kind == NORMAL:
        z = (x - v.mean) / v.std
        out = np.exp(-0.5 * z * z) / (v.std * math.sqrt(2 * math.pi))
    elif v.kind == UNIFORM:
        inside = (x >= v.lower) & (x <= v.upper)
        out = np.where(inside, 1.0 / (v.upper - v.lower), 0.0)
    else:
        fl, fu = _trunc_mass(v)
        z = (x - v.mean) / v.std
        out = np.exp(-0.5 * z * z) / (v.std * math.sqrt(2 * math.pi) * (fu - fl))
        out = np.where((x < v.lower) | (x > v.upper), 0.0, out)
    return float(out) if out.ndim == 0 else out


def inverse_cdf(v: InputVariable, u):
    """Quantile function; ``u`` must lie strictly inside (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    if v.kind == NORMAL:
        out = v.mean + v.std * ndtri(u)
    elif v.kind == UNIFORM:
        out = v.lower + u * (v.upper - v.lower)
    else:
        fl, fu = _trunc_mass(v)
        out = v.mean + v.std * ndtri(fl + u * (fu - fl))
        out = np.clip(out, v.lower, v.upper)
    return float(out) if out.ndim == 0 else out


def germ_for_inputs(inputs: InputVector) -> GermSpec:
    """Default germ: hermite for (truncated) normal inputs, legendre for uniform."""
    fams = tuple(LEGENDRE if v.kind == UNIFORM else HERMITE for v in inputs.variables)
    return GermSpec(families=fams)


def _germ_cdf(family: str, xi):
    if family == HERMITE:
        return ndtr(xi)
    return np.clip((np.asarray(xi, dtype=float) + 1.0) / 2.0, 0.0, 1.0)


def _germ_inverse_cdf(family: str, u):
    if family == HERMITE:
        return ndtri(u)
    return 2.0 * np.asarray(u, dtype=float) - 1.0


def to_germ(x_phys: np.ndarray, inputs: InputVector, germ: GermSpec) -> np.ndarray:
    """Map physical samples (n, M) to germ space via xi_i = G_i^-1(F_i(x_i)).

    (normal, hermite) and (uniform, legendre) pairs use the exact linear
    map; other pairs go through the CDF round trip.  Raises on samples
    outside the input support.
    """
    x = np.atleast_2d(np.asarray(x_phys, dtype=float))
    if x.shape[1] != inputs.dim or germ.dim != inputs.dim:
        raise ValueError("dimension mismatch between samples, inputs and germ")
    out = np.empty_like(x)
    for j, (v, fam) in enumerate(zip(inputs.variables, germ.families)):
        col = x[:, j]
        if np.any(col < v.lower) or np.any(col > v.upper):
            raise ValueError(f"sample outside support of input {j}")
        if v.kind == NORMAL and fam == HERMITE:
            out[:, j] = (col - v.mean) / v.std
        elif v.kind == UNIFORM and fam == LEGENDRE:
            out[:, j] = 2.0 * (col - v.lower) / (v.upper - v.lower) - 1.0
        else:
            u = np.asarray(cdf(v, col))
            eps = 1e-16
            out[:, j] = _germ_inverse_cdf(fam, np.clip(u, eps, 1.0 - eps))
    return out if np.ndim(x_phys) == 2 else out[0]


def from_germ(xi: np.ndarray, inputs: InputVector, germ: GermSpec) -> np.ndarray:
    """Inverse of :func:`to_germ`."""
    z = np.atleast_2d(np.asarray(xi, dtype=float))
    if z.shape[1] != inputs.dim or germ.dim != inputs.dim:
        raise ValueError("dimension mismatch between samples, inputs and germ")
    out = np.empty_like(z)
    for j, (v, fam) in enumerate(zip(inputs.variables, germ.families)):
        col = z[:, j]
        if v.kind == NORMAL and fam == HERMITE:
            out[:, j] = v.mean + v.std * col
        elif v.kind == UNIFORM and fam == LEGENDRE:
            out[:, j] = v.lower + (col + 1.0) / 2.0 * (v.upper - v.lower)
        else:
            u = np.asarray(_germ_cdf(fam, col))
            eps = 1e-16
            out[:, j] = inverse_cdf(v, np.clip(u, eps, 1.0 - eps))
    return out if np.ndim(xi) == 2 else out[0]
