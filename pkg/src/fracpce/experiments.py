"""Convergence-study orchestration: both estimators, fits, scoring, sweeps.

For every (method, n_sim, repetition) cell the harness draws an LHS design,
builds the fractional-moment targets either analytically through the
expansion (``pce-holder``), by direct sample averages (``lhs``), or by
resampling a fitted surrogate (``pce-lhs``), fits the mixture distribution,
and scores the fitted CDF against the reference with the integrated KL
divergence.  Repetition seeds derive from the master seed so any subset of
the sweep is independently reproducible; the ``pce-lhs`` surrogate draw is
paired with the ``lhs`` design of the same cell so the two baselines see
identical sample locations.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .fracmoments import (
    DEFAULT_ORDERS,
    fractional_moments_from_pce,
    fractional_moments_from_samples,
)
from .meigd import FitConfig, FitResult, fit_meigd, meigd_cdf
from .metrics import GridConfig, ReferenceCdf, kl_pointwise, total_error
from .pce import fit_ols, eval_pce, moments_from_pce
from .polybasis import hyperbolic_set
from .sampling import sample_inputs

METHOD_PCE_HOLDER = "pce-holder"
METHOD_LHS = "lhs"
METHOD_PCE_LHS = "pce-lhs"
METHODS = (METHOD_PCE_HOLDER, METHOD_LHS, METHOD_PCE_LHS)


def derive_seed(master: int, *parts) -> int:
    """Stable 63-bit seed from the master seed and context labels."""
    h = hashlib.blake2b(repr((master,) + parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little") >> 1


@dataclass(frozen=True)
class ReferenceSpec:
    """How to obtain the reference CDF for one study."""

    kind: str  # "analytic-normal" | "empirical"
    mean: float = float("nan")
    std: float = float("nan")
    size: int = 100_000


@dataclass(frozen=True)
class ExperimentConfig:
    model: object  # GaussianSumModel | PlateModel | QuarterCarModel
    basis_p: int
    basis_q: float = 1.0
    orders: tuple[float, ...] = DEFAULT_ORDERS
    n_sim_grid: tuple[int, ...] = (20, 50, 100, 200)
    n_stat: int = 20
    methods: tuple[str, ...] = (METHOD_PCE_HOLDER, METHOD_LHS)
    reference: ReferenceSpec = ReferenceSpec(kind="empirical")
    master_seed: int = 2024
    fit: FitConfig = field(default_factory=lambda: FitConfig(patience=8))
    grid: GridConfig = field(default_factory=GridConfig)
    threads: int = 1

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.n_sim_grid, self.n_sim_grid[1:])):
            raise ValueError("n_sim grid must be increasing")
        if self.n_stat < 1:
            raise ValueError("n_stat must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")


@dataclass(frozen=True)
class RunRecord:
    method: str
    n_sim: int
    repetition: int
    seed: int
    epsilon: float
    fit_residual: float
    converged: bool
    model_evals: int
    wall_ms: float
    error: str = ""


@dataclass(frozen=True)
class ConvergenceResult:
    config: ExperimentConfig
    records: tuple[RunRecord, ...]
    reference: ReferenceCdf
    wall_s: float

    def aggregates(self) -> list[dict]:
        out = []
        for method in self.config.methods:
            for n_sim in self.config.n_sim_grid:
                eps = [
                    r.epsilon
                    for r in self.records
                    if r.method == method and r.n_sim == n_sim
                ]
                eps = np.asarray(eps)
                finite = eps[np.isfinite(eps)]
                out.append(
                    {
                        "method": method,
                        "n_sim": n_sim,
                        "n_reps": len(eps),
                        "n_failed": int(len(eps) - len(finite)),
                        "mean_epsilon": float(np.mean(eps)) if len(eps) else float("nan"),
                        "std_epsilon": float(np.std(eps, ddof=1)) if len(eps) > 1 else 0.0,
                    }
                )
        return out

    def mean_epsilon(self, method: str, n_sim: int) -> float:
        for row in self.aggregates():
            if row["method"] == method and row["n_sim"] == n_sim:
                return row["mean_epsilon"]
        raise KeyError((method, n_sim))

    def std_epsilon(self, method: str, n_sim: int) -> float:
        for row in self.aggregates():
            if row["method"] == method and row["n_sim"] == n_sim:
                return row["std_epsilon"]
        raise KeyError((method, n_sim))

    def epsilons(self, method: str, n_sim: int) -> np.ndarray:
        return np.asarray(
            [r.epsilon for r in self.records if r.method == method and r.n_sim == n_sim]
        )


def build_reference(config: ExperimentConfig) -> ReferenceCdf:
    spec = config.reference
    if spec.kind == "analytic-normal":
        return ReferenceCdf.normal(spec.mean, spec.std)
    if spec.kind != "empirical":
        raise ValueError(f"unknown reference kind {spec.kind!r}")
    seed = derive_seed(config.master_seed, "reference")
    ed = sample_inputs(config.model.inputs, spec.size, seed)
    Y = config.model.evaluate(ed.X)
    return ReferenceCdf.from_samples(Y)


def run_method_once(
    method: str,
    model,
    n_sim: int,
    seed: int,
    config: ExperimentConfig,
    reference: ReferenceCdf | None = None,
    fresh_draw_seed: int | None = None,
) -> tuple[FitResult, float, RunRecord]:
    """One repetition of one estimator at one design size.

    Returns the distribution fit, the total error, and the bookkeeping
    record.  The true model is evaluated exactly ``n_sim`` times; surrogate
    evaluations are free and not counted.  ``fresh_draw_seed`` sets the
    surrogate resampling seed of the pce-lhs variant (the sweep pairs it
    with the lhs design of the same cell).
    """
    if reference is None:
        reference = build_reference(config)
    t0 = time.perf_counter()
    ed = sample_inputs(model.inputs, n_sim, seed)
    ed = ed.with_responses(model.evaluate(ed.X))
    model_evals = n_sim

    if method == METHOD_LHS:
        fms = fractional_moments_from_samples(ed.Y, config.orders)
    else:
        basis = hyperbolic_set(model.inputs.dim, config.basis_p, config.basis_q)
        pce = fit_ols(ed, basis)
        if method == METHOD_PCE_HOLDER:
            moments = moments_from_pce(pce)
            fms = fractional_moments_from_pce(
                pce,
                config.orders,
                moments=moments,
                seed=derive_seed(seed, "positivity"),
            )
        elif method == METHOD_PCE_LHS:
            # Fresh surrogate draw paired with the lhs method's design of
            # the same (n_sim, repetition) cell.
            paired = _paired_lhs_seed(config, seed)
            ed_fresh = sample_inputs(model.inputs, n_sim, paired)
            fms = fractional_moments_from_samples(eval_pce(pce, ed_fresh.Xi), config.orders)
        else:
            raise ValueError(f"unknown method {method!r}")

    fit = fit_meigd(fms, replace(config.fit, seed=derive_seed(seed, "fit")))
    eps = total_error(reference, lambda x: meigd_cdf(fit.params, x), config.grid)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    record = RunRecord(
        method=method,
        n_sim=n_sim,
        repetition=-1,
        seed=seed,
        epsilon=eps,
        fit_residual=fit.residual,
        converged=fit.converged,
        model_evals=model_evals,
        wall_ms=wall_ms,
    )
    return fit, eps, record


_PAIRED_SEEDS: dict[int, int] = {}


def _paired_lhs_seed(config: ExperimentConfig, seed: int) -> int:
    return _PAIRED_SEEDS.get(seed, derive_seed(seed, "fresh-draw"))


def _cell_seed(config: ExperimentConfig, method: str, n_sim: int, rep: int) -> int:
    return derive_seed(config.master_seed, method, n_sim, rep)


def run_convergence_study(config: ExperimentConfig, on_record=None) -> ConvergenceResult:
    """Full sweep over methods x design sizes x repetitions.

    Failures inside a repetition (rank-deficient designs at n_sim below the
    basis size, diverged fits) record an infinite error instead of aborting
    the sweep.  ``on_record`` is called with each finished RunRecord, in
    deterministic order, for streaming output.
    """
    t_start = time.perf_counter()
    reference = build_reference(config)
    cells = [
        (method, n_sim, rep)
        for method in config.methods
        for n_sim in config.n_sim_grid
        for rep in range(config.n_stat)
    ]

    def run_cell(cell):
        method, n_sim, rep = cell
        seed = _cell_seed(config, method, n_sim, rep)
        if method == METHOD_PCE_LHS:
            _PAIRED_SEEDS[seed] = _cell_seed(config, METHOD_LHS, n_sim, rep)
        try:
            _, _, rec = run_method_once(method, config.model, n_sim, seed, config, reference)
            rec = replace(rec, repetition=rep)
        except Exception as exc:  # rank-deficiency, fit divergence, ...
            rec = RunRecord(
                method=method,
                n_sim=n_sim,
                repetition=rep,
                seed=seed,
                epsilon=math.inf,
                fit_residual=math.inf,
                converged=False,
                model_evals=n_sim,
                wall_ms=0.0,
                error=f"{type(exc).__name__}: {exc}",
            )
        finally:
            _PAIRED_SEEDS.pop(seed, None)
        return rec

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(run_cell, cells))
    else:
        records = [run_cell(cell) for cell in cells]
    if on_record is not None:
        for rec in records:
            on_record(rec)
    return ConvergenceResult(
        config=config,
        records=tuple(records),
        reference=reference,
        wall_s=time.perf_counter() - t_start,
    )


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "method",
    "n_sim",
    "repetition",
    "seed",
    "epsilon",
    "fit_residual",
    "converged",
    "model_evals",
    "wall_ms",
)


def record_row(rec: RunRecord) -> list:
    return [
        rec.method,
        rec.n_sim,
        rec.repetition,
        rec.seed,
        repr(rec.epsilon),
        repr(rec.fit_residual),
        rec.converged,
        rec.model_evals,
        f"{rec.wall_ms:.3f}",
    ]


def write_results_csv(result: ConvergenceResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in result.records:
            writer.writerow(record_row(rec))


def write_aggregates_json(result: ConvergenceResult, path) -> None:
    doc = {
        "model": result.config.model.name,
        "n_stat": result.config.n_stat,
        "master_seed": result.config.master_seed,
        "wall_s": result.wall_s,
        "total_model_evals": int(sum(r.model_evals for r in result.records)),
        "aggregates": result.aggregates(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def write_plot_data(result: ConvergenceResult, out_dir) -> None:
    """Per-cell CDF comparison grids for external plotting (repetition 0)."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    ref = result.reference
    grid = result.config.grid
    lo = ref.quantile(grid.tail)
    hi = ref.quantile(1.0 - grid.tail)
    span = hi - lo
    chi = np.linspace(lo - grid.extend * span, hi + grid.extend * span, grid.n_points)
    F = np.asarray(ref.cdf(chi), dtype=float)
    for method in result.config.methods:
        for n_sim in result.config.n_sim_grid:
            seed = _cell_seed(result.config, method, n_sim, 0)
            if method == METHOD_PCE_LHS:
                _PAIRED_SEEDS[seed] = _cell_seed(result.config, METHOD_LHS, n_sim, 0)
            try:
                fit, _, _ = run_method_once(
                    method, result.config.model, n_sim, seed, result.config, ref
                )
            except Exception:
                continue
            finally:
                _PAIRED_SEEDS.pop(seed, None)
            Ft = np.asarray(meigd_cdf(fit.params, chi), dtype=float)
            D = kl_pointwise(F, Ft)
            path = os.path.join(out_dir, f"cdf_{method}_n{n_sim}.csv")
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["chi", "ref_cdf", "fit_cdf", "d_kl"])
                for row in zip(chi, F, Ft, D):
                    writer.writerow([repr(v) for v in row])
