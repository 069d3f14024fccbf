"""Polynomial chaos expansion: least-squares fit, diagnostics, moments.

The surrogate is Y ~ sum_alpha beta_alpha Psi_alpha(xi) over a truncated
multi-index set.  Because the basis is orthonormal, the coefficient vector
yields the response moments analytically: the mean is beta_0, the variance
the sum of squared non-constant coefficients, and the third/fourth central
moments are triple/quadruple sums weighted by expectations of products of
basis polynomials (which factorize over dimensions by independence).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .polybasis import (
    GermSpec,
    MultiIndexSet,
    eval_orthonormal_table,
    expectation_tensor,
)
from .sampling import ExperimentalDesign, sample_germ

#: Bases larger than this fall back to sampling for moments 3 and 4.
MOMENT_SUMMATION_CAP = 80


class RankDeficientDesignError(ValueError):
    """OLS design matrix is numerically rank deficient."""

    def __init__(self, rank: int, needed: int):
        self.rank = rank
        self.needed = needed
        super().__init__(f"design matrix rank {rank} < {needed} columns")


@dataclass(frozen=True)
class PceModel:
    """Fitted expansion: germ spec, index set, coefficients, diagnostics."""

    germ: GermSpec
    basis: MultiIndexSet
    beta: np.ndarray
    r2: float = float("nan")
    q2: float = float("nan")

    def __post_init__(self):
        if len(self.beta) != len(self.basis):
            raise ValueError("coefficient count must equal basis cardinality")
        for name, val in (("r2", self.r2), ("q2", self.q2)):
            if np.isfinite(val) and val > 1.0 + 1e-12:
                raise ValueError(f"{name} cannot exceed 1")

    def to_json(self) -> dict:
        return {
            "germ_families": list(self.germ.families),
            "indices": [list(a) for a in self.basis.indices],
            "p": self.basis.p,
            "q": self.basis.q,
            "beta": [float(b) for b in self.beta],
            "r2": None if not np.isfinite(self.r2) else float(self.r2),
            "q2": None if not np.isfinite(self.q2) else float(self.q2),
        }

    @staticmethod
    def from_json(doc: dict) -> "PceModel":
        basis = MultiIndexSet(
            indices=tuple(tuple(a) for a in doc["indices"]), p=doc["p"], q=doc["q"]
        )
        return PceModel(
            germ=GermSpec(tuple(doc["germ_families"])),
            basis=basis,
            beta=np.asarray(doc["beta"], dtype=float),
            r2=float("nan") if doc.get("r2") is None else doc["r2"],
            q2=float("nan") if doc.get("q2") is None else doc["q2"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True)
class MomentSet:
    """First four moments of the response.

    ``skewness``/``kurtosis`` are the standardized central moments (kurtosis
    non-excess, 3 for a Gaussian); ``raw`` holds the raw moments m1..m4.
    ``sampled_higher_moments`` flags that moments 3 and 4 were estimated by
    sampling the surrogate instead of exhaustive summation.
    """

    mean: float
    variance: float
    skewness: float
    kurtosis: float
    raw: tuple[float, float, float, float]
    sampled_higher_moments: bool = False

    def __post_init__(self):
        if self.variance < -1e-12 * max(1.0, self.mean**2):
            raise ValueError("variance must be non-negative")
        m1, m2 = self.raw[0], self.raw[1]
        if m2 < m1 * m1 - 1e-9 * max(1.0, m1 * m1):
            raise ValueError("raw moments violate m2 >= m1^2")
        if np.isfinite(self.skewness) and np.isfinite(self.kurtosis):
            if self.kurtosis < self.skewness**2 + 1.0 - 1e-6 * max(1.0, self.kurtosis):
                raise ValueError("moments violate kurtosis >= skewness^2 + 1")


def design_matrix(basis: MultiIndexSet, germ: GermSpec, Xi: np.ndarray) -> np.ndarray:
    """Evaluate every basis term at every germ sample.

    Entry (i, j) is Psi_j(xi^(i)), the tensor product over dimensions of the
    univariate orthonormal polynomials; column 0 is all ones.
    """
    Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
    degrees = basis.degrees()
    if Xi.shape[1] != basis.dim or germ.dim != basis.dim:
        raise ValueError("sample dimension does not match the basis/germ")
    out = np.ones((Xi.shape[0], len(basis)))
    # Per-dimension tables of psi_0..psi_pmax, then products over dimensions.
    for d, fam in enumerate(germ.families):
        table = eval_orthonormal_table(fam, int(degrees[:, d].max()), Xi[:, d])
        out *= table[:, degrees[:, d]]
    return out


def fit_ols(
    ed: ExperimentalDesign, basis: MultiIndexSet, germ: GermSpec | None = None
) -> PceModel:
    """Ordinary least squares fit of the expansion coefficients.

    Solved through an orthogonal decomposition (SVD-backed lstsq), never by
    forming the normal equations.  Raises RankDeficientDesignError when the
    design matrix has deficient numerical rank; training R^2 and (when
    computable) the analytic leave-one-out Q^2 are stored as diagnostics.
    """
    germ = germ or ed.germ
    if germ is None:
        raise ValueError("germ specification required (none stored on the design)")
    if ed.Y is None:
        raise ValueError("experimental design has no responses")
    Psi = design_matrix(basis, germ, ed.Xi)
    n, P = Psi.shape
    beta, _, rank, _ = np.linalg.lstsq(Psi, ed.Y, rcond=None)
    if rank < P:
        raise RankDeficientDesignError(rank=int(rank), needed=P)
    resid = ed.Y - Psi @ beta
    var_y = float(np.var(ed.Y))
    r2 = 1.0 - float(np.mean(resid**2)) / var_y if var_y > 0 else float("nan")
    model = PceModel(germ=germ, basis=basis, beta=beta, r2=r2)
    q2 = float("nan")
    if n > P and var_y > 0:
        try:
            q2 = q_squared_loo(model, ed)
        except ValueError:
            pass
    return PceModel(germ=germ, basis=basis, beta=beta, r2=r2, q2=q2)


def eval_pce(model: PceModel, Xi: np.ndarray) -> np.ndarray:
    """Evaluate the surrogate at germ samples."""
    return design_matrix(model.basis, model.germ, Xi) @ model.beta


def r_squared(model: PceModel, ed_validation: ExperimentalDesign) -> float:
    """Coefficient of determination 1 - MSE / Var(Y) on a validation set."""
    if ed_validation.Y is None or len(ed_validation.Y) == 0:
        raise ValueError("validation design has no responses")
    var_y = float(np.var(ed_validation.Y))
    if var_y <= 0:
        raise ValueError("validation responses have zero variance")
    pred = eval_pce(model, ed_validation.Xi)
    return 1.0 - float(np.mean((ed_validation.Y - pred) ** 2)) / var_y


def q_squared_loo(model: PceModel, ed_training: ExperimentalDesign) -> float:
    """Analytic leave-one-out cross-validation accuracy.

    Q^2 = 1 - mean[(e_i / (1 - h_ii))^2] / Var(Y) with e_i the OLS residuals
    and h_ii the hat-matrix leverages; identical to refitting n times with
    one point left out each time.
    """
    if ed_training.Y is None:
        raise ValueError("training design has no responses")
    Psi = design_matrix(model.basis, model.germ, ed_training.Xi)
    n, P = Psi.shape
    if n <= P:
        raise ValueError("leave-one-out needs n > P")
    var_y = float(np.var(ed_training.Y))
    if var_y <= 0:
        raise ValueError("responses have zero variance")
    Q, R = np.linalg.qr(Psi, mode="reduced")
    if np.min(np.abs(np.diag(R))) <= 1e-12 * np.max(np.abs(np.diag(R))):
        raise RankDeficientDesignError(rank=int(np.sum(np.abs(np.diag(R)) > 0)), needed=P)
    h = np.sum(Q * Q, axis=1)
    if np.any(h >= 1.0 - 1e-12):
        raise ValueError("leverage h_ii ~ 1: leave-one-out prediction is singular")
    resid = ed_training.Y - Psi @ model.beta
    loo = resid / (1.0 - h)
    return 1.0 - float(np.mean(loo**2)) / var_y


def _central_moments_34(model: PceModel) -> tuple[float, float]:
    """Exhaustive third/fourth central moments from the coefficients.

    Ordered-tuple sums over the non-constant active terms, vectorized with
    per-dimension expectation tensors whose odd-parity entries are exactly
    zero, so parity-forced cancellations are exact.
    """
    degrees = model.basis.degrees()
    beta = model.beta
    active = [k for k in range(1, len(beta)) if beta[k] != 0.0]
    if not active:
        return 0.0, 0.0
    A = degrees[active]
    b = beta[active]
    K, M = A.shape
    max_deg = int(degrees.max())
    t3 = [expectation_tensor(f, max_deg, 3) for f in model.germ.families]
    t4 = [expectation_tensor(f, max_deg, 4) for f in model.germ.families]

    W3 = np.ones((K, K, K))
    for d in range(M):
        g = A[:, d]
        W3 *= t3[d][g[:, None, None], g[None, :, None], g[None, None, :]]
    mu3 = float(np.einsum("i,j,k,ijk->", b, b, b, W3))

    mu4 = 0.0
    for a_idx in range(K):
        Wa = np.ones((K, K, K))
        for d in range(M):
            g = A[:, d]
            Wa *= t4[d][A[a_idx, d], g[:, None, None], g[None, :, None], g[None, None, :]]
        mu4 += b[a_idx] * float(np.einsum("i,j,k,ijk->", b, b, b, Wa))
    return mu3, mu4


def moments_from_pce(
    model: PceModel,
    summation_cap: int = MOMENT_SUMMATION_CAP,
    fallback_samples: int = 1_000_000,
    fallback_seed: int = 0,
) -> MomentSet:
    """First four response moments from the expansion coefficients.

    Mean and variance are always exact (beta_0 and the coefficient energy).
    Central moments 3 and 4 come from exhaustive product-expectation sums
    when the basis is at most ``summation_cap`` terms, otherwise from an LHS
    germ sample of the (free to evaluate) surrogate, flagged in the result.
    """
    beta = model.beta
    mean = float(beta[0])
    variance = float(np.sum(beta[1:] ** 2))
    sampled = False
    if len(model.basis) <= summation_cap:
        mu3, mu4 = _central_moments_34(model)
    else:
        Xi = sample_germ(model.germ, fallback_samples, fallback_seed)
        Y = eval_pce(model, Xi)
        dev = Y - np.mean(Y)
        mu3 = float(np.mean(dev**3))
        mu4 = float(np.mean(dev**4))
        sampled = True
    if variance > 0:
        sd = variance**0.5
        skew = mu3 / sd**3
        kurt = mu4 / variance**2
    else:
        skew = float("nan")
        kurt = float("nan")
    m1 = mean
    m2 = variance + mean**2
    m3 = mu3 + 3 * mean * variance + mean**3
    m4 = mu4 + 4 * mean * mu3 + 6 * mean**2 * variance + mean**4
    return MomentSet(
        mean=mean,
        variance=variance,
        skewness=skew,
        kurtosis=kurt,
        raw=(m1, m2, m3, m4),
        sampled_higher_moments=sampled,
    )
