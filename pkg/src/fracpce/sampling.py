"""Latin hypercube sampling and experimental-design construction."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .distributions import InputVector, germ_for_inputs, inverse_cdf, to_germ
from .polybasis import GermSpec, HERMITE
from scipy.special import ndtri


@dataclass(frozen=True)
class ExperimentalDesign:
    """Input samples in physical (X) and germ (Xi) space plus responses Y.

    ``germ`` records which germ families ``Xi`` refers to; ``Y`` is None
    until the model has been evaluated.
    """

    X: np.ndarray
    Xi: np.ndarray
    Y: np.ndarray | None = None
    germ: GermSpec | None = None

    def __post_init__(self):
        if self.X.shape != self.Xi.shape:
            raise ValueError("X and Xi must have matching shapes")
        if self.Y is not None:
            if len(self.Y) != self.X.shape[0]:
                raise ValueError("Y length must match the number of rows")
            if not np.all(np.isfinite(self.Y)):
                raise ValueError("responses must be finite")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def with_responses(self, Y) -> "ExperimentalDesign":
        return replace(self, Y=np.asarray(Y, dtype=float))


def lhs(n: int, M: int, rng_seed: int) -> np.ndarray:
    """Latin hypercube sample of n points in (0, 1)^M.

    Each column places exactly one point, uniformly located, in each of the
    n equal-width strata.  Deterministic given the seed.
    """
    if n < 1 or M < 1:
        raise ValueError("n and M must be >= 1")
    rng = np.random.default_rng(rng_seed)
    U = np.empty((n, M))
    for j in range(M):
        perm = rng.permutation(n)
        offs = rng.random(n)
        offs[offs == 0.0] = 0.5  # keep samples strictly inside their stratum
        U[:, j] = (perm + offs) / n
    return U


def sample_inputs(inputs: InputVector, n: int, rng_seed: int) -> ExperimentalDesign:
    """LHS design of the input vector; responses left unset."""
    U = lhs(n, inputs.dim, rng_seed)
    X = np.empty_like(U)
    for j, v in enumerate(inputs.variables):
        X[:, j] = inverse_cdf(v, U[:, j])
    germ = germ_for_inputs(inputs)
    Xi = to_germ(X, inputs, germ)
    return ExperimentalDesign(X=X, Xi=Xi, germ=germ)


def sample_germ(germ: GermSpec, n: int, rng_seed: int) -> np.ndarray:
    """LHS sample drawn directly in germ space."""
    U = lhs(n, germ.dim, rng_seed)
    Xi = np.empty_like(U)
    for j, fam in enumerate(germ.families):
        Xi[:, j] = ndtri(U[:, j]) if fam == HERMITE else 2.0 * U[:, j] - 1.0
    return Xi
