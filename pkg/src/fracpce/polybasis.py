"""Orthonormal polynomial bases, Gauss rules, and truncated multi-index sets.

Two univariate families are supported, each orthonormal under a probability
weight:

* ``hermite``  -- probabilists' Hermite polynomials He_n normalized by
  1/sqrt(n!), weight = standard normal density on R.
* ``legendre`` -- Legendre polynomials P_n normalized by sqrt(2n+1),
  weight = 1/2 on [-1, 1].

Multivariate basis terms are tensor products indexed by multi-indices
(length-M tuples of non-negative per-dimension degrees).  Truncation keeps
indices inside a total-degree or hyperbolic q-quasi-norm ball of radius p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HERMITE = "hermite"
LEGENDRE = "legendre"
FAMILIES = (HERMITE, LEGENDRE)

#: Refuse to enumerate index sets larger than this.
MAX_CARDINALITY = 1_000_000


def _check_family(family: str) -> None:
    if family not in FAMILIES:
        raise ValueError(f"unknown polynomial family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class GermSpec:
    """Per-dimension polynomial families of the standardized germ vector.

    ``hermite`` dimensions carry a standard normal germ, ``legendre``
    dimensions a uniform germ on [-1, 1].
    """

    families: tuple[str, ...]

    def __post_init__(self):
        if len(self.families) < 1:
            raise ValueError("germ must have at least one dimension")
        for fam in self.families:
            _check_family(fam)

    @property
    def dim(self) -> int:
        return len(self.families)


def eval_orthonormal_1d(family: str, degree: int, xi):
    """Evaluate the orthonormal polynomial of one family and degree.

    Parameters
    ----------
    family : str
        ``"hermite"`` or ``"legendre"``.
    degree : int
        Polynomial degree, >= 0.
    xi : float or ndarray
        Evaluation points (germ space).

    Returns
    -------
    float or ndarray
        psi_degree(xi), normalized so <psi_j, psi_k> = delta_jk under the
        family's probability weight.
    """
    _check_family(family)
    if degree < 0:
        raise ValueError("degree must be non-negative")
    table = eval_orthonormal_table(family, degree, np.atleast_1d(np.asarray(xi, dtype=float)))
    out = table[:, degree]
    if np.isscalar(xi) or np.ndim(xi) == 0:
        return float(out[0])
    return out


def eval_orthonormal_table(family: str, max_degree: int, xi: np.ndarray) -> np.ndarray:
    """Evaluate all orthonormal polynomials up to ``max_degree`` at once.

    Returns an array of shape ``(len(xi), max_degree + 1)``; column n holds
    psi_n(xi).  The normalized three-term recurrences are used directly,
    which keeps the evaluation stable for the degrees used here.
    """
    _check_family(family)
    xi = np.asarray(xi, dtype=float)
    out = np.empty((xi.size, max_degree + 1))
    out[:, 0] = 1.0
    if max_degree == 0:
        return out
    if family == HERMITE:
        # psi_{n+1} = (xi psi_n - sqrt(n) psi_{n-1}) / sqrt(n+1)
        out[:, 1] = xi
        for n in range(1, max_degree):
            out[:, n + 1] = (xi * out[:, n] - math.sqrt(n) * out[:, n - 1]) / math.sqrt(n + 1)
    else:
        # Unnormalized Legendre recurrence, then scale by sqrt(2n+1).
        p_prev = np.ones_like(xi)
        p_cur = xi.copy()
        out[:, 1] = math.sqrt(3.0) * p_cur
        for n in range(1, max_degree):
            p_next = ((2 * n + 1) * xi * p_cur - n * p_prev) / (n + 1)
            out[:, n + 1] = math.sqrt(2 * (n + 1) + 1) * p_next
            p_prev, p_cur = p_cur, p_next
    return out


@lru_cache(maxsize=None)
def _gauss_rule_cached(family: str, n_points: int):
    if family == HERMITE:
        nodes, weights = np.polynomial.hermite_e.hermegauss(n_points)
        weights = weights / math.sqrt(2.0 * math.pi)
    else:
        nodes, weights = np.polynomial.legendre.leggauss(n_points)
        weights = weights / 2.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_rule(family: str, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule integrating exactly up to degree 2*n_points - 1 against
    the family's probability weight.  Weights sum to 1."""
    _check_family(family)
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    return _gauss_rule_cached(family, n_points)


@dataclass(frozen=True)
class MultiIndexSet:
    """Ordered truncated set of multi-indices defining a multivariate basis.

    The zero index comes first (graded ordering), so coefficient 0 of any
    expansion over this set is the mean term.
    """

    indices: tuple[tuple[int, ...], ...]
    p: int
    q: float = 1.0

    def __post_init__(self):
        if not self.indices:
            raise ValueError("index set is empty")
        if any(d != 0 for d in self.indices[0]):
            raise ValueError("first multi-index must be the zero index")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("duplicate multi-indices")
        for alpha in self.indices:
            if any(a < 0 for a in alpha):
                raise ValueError("multi-index entries must be non-negative")
            if _qnorm(alpha, self.q) > self.p * (1 + 1e-12) + 1e-12:
                raise ValueError(f"multi-index {alpha} violates the q-norm bound")

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def dim(self) -> int:
        return len(self.indices[0])

    def degrees(self) -> np.ndarray:
        """Index set as an integer array of shape (cardinality, M)."""
        return np.asarray(self.indices, dtype=int)


def _qnorm(alpha, q: float) -> float:
    if q == 1.0:
        return float(sum(alpha))
    return float(sum(a**q for a in alpha)) ** (1.0 / q)


def _compositions(total: int, m: int):
    """All m-tuples of non-negative integers summing to ``total``,
    first coordinate descending (graded lexicographic within a degree)."""
    if m == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, m - 1):
            yield (first,) + rest


def total_degree_set(M: int, p: int) -> MultiIndexSet:
    """All multi-indices with total degree <= p, graded lexicographic.

    Cardinality is (M+p)! / (M! p!).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if p < 0:
        raise ValueError("p must be >= 0")
    card = math.comb(M + p, p)
    if card > MAX_CARDINALITY:
        raise ValueError(f"index set cardinality {card} exceeds limit {MAX_CARDINALITY}")
    indices = tuple(alpha for deg in range(p + 1) for alpha in _compositions(deg, M))
    return MultiIndexSet(indices=indices, p=p, q=1.0)


def hyperbolic_set(M: int, p: int, q: float) -> MultiIndexSet:
    """Multi-indices with q-quasi-norm (sum alpha_i^q)^(1/q) <= p.

    ``q = 1`` reproduces :func:`total_degree_set` element for element;
    ``q < 1`` prunes high-order interaction terms.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    full = total_degree_set(M, p)
    if q == 1.0:
        return full
    tol = p * (1 + 1e-12) + 1e-12
    indices = tuple(alpha for alpha in full.indices if _qnorm(alpha, q) <= tol)
    return MultiIndexSet(indices=indices, p=p, q=q)


@lru_cache(maxsize=None)
def _product_expectation_cached(family: str, degrees: tuple[int, ...]) -> float:
    if sum(degrees) % 2 == 1:
        # Odd total degree integrates to zero against either symmetric weight.
        return 0.0
    n_points = (sum(degrees) + 2) // 2  # ceil((sum+1)/2)
    nodes, weights = gauss_rule(family, n_points)
    table = eval_orthonormal_table(family, max(degrees), nodes)
    integrand = np.ones_like(nodes)
    for d in degrees:
        integrand = integrand * table[:, d]
    return float(np.dot(weights, integrand))


def product_expectation(family: str, degrees) -> float:
    """Expectation of a product of 2..4 orthonormal polynomials of one family.

    Computed by a Gauss rule sized to integrate the product exactly; the
    pair case returns the Kronecker delta exactly, and odd-total-degree
    products return exactly 0 (symmetric weights).
    """
    _check_family(family)
    degrees = tuple(int(d) for d in degrees)
    if not 2 <= len(degrees) <= 4:
        raise ValueError("product_expectation takes 2 to 4 degrees")
    if any(d < 0 for d in degrees):
        raise ValueError("degrees must be non-negative")
    if len(degrees) == 2:
        return 1.0 if degrees[0] == degrees[1] else 0.0
    return _product_expectation_cached(family, tuple(sorted(degrees)))


@lru_cache(maxsize=None)
def expectation_tensor(family: str, max_degree: int, arity: int) -> np.ndarray:
    """Dense tensor of product expectations for one dimension.

    Entry ``[i, j, ...]`` (``arity`` axes, each of size max_degree+1) holds
    E[psi_i psi_j ...].  Used by the PCE moment post-processing.
    """
    m = max_degree + 1
    out = np.zeros((m,) * arity)
    for idx in np.ndindex(*out.shape):
        if sum(idx) % 2 == 0:
            out[idx] = _product_expectation_cached(family, tuple(sorted(idx)))
    out.setflags(write=False)
    return out
