"""Clamped square plate in bending under uniform pressure.

Kirchhoff thin-plate model discretized with 4-node non-conforming
rectangular bending elements (12 DOF: deflection plus the two slopes per
node).  One edge is fully clamped; on the default 10 x 10 mesh this leaves
110 active nodes and a 330 x 330 symmetric positive-definite system.  The
response is the largest nodal deflection magnitude.

Because the mesh geometry is fixed, the global operator splits as
K = D(E, t, nu) * (G0 + nu * G1) with both G matrices assembled once and
cached; each evaluation only scales, factorizes and solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..distributions import InputVariable, InputVector

# Monomial exponents of the 12-term deflection polynomial:
# 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3, x^3 y, x y^3
_POWERS = (
    (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3), (3, 1), (1, 3),
)


@dataclass(frozen=True)
class PlateConfig:
    side: float = 1.0
    n_elems: int = 10
    pressure: float = 100.0
    qoi: str = "max-deflection"  # or "free-edge-mid"

    def __post_init__(self):
        if self.n_elems < 2:
            raise ValueError("mesh must be at least 2 x 2")
        if self.side <= 0:
            raise ValueError("side length must be positive")
        if self.qoi not in ("max-deflection", "free-edge-mid"):
            raise ValueError(f"unknown qoi {self.qoi!r}")


def _monomials(x: float, y: float) -> np.ndarray:
    return np.array([x**px * y**py for px, py in _POWERS])


def _d2(which: str, x: float, y: float) -> np.ndarray:
    """Second derivatives of the monomial row (xx, yy or xy)."""
    out = np.zeros(len(_POWERS))
    for k, (px, py) in enumerate(_POWERS):
        if which == "xx" and px >= 2:
            out[k] = px * (px - 1) * x ** (px - 2) * y**py
        elif which == "yy" and py >= 2:
            out[k] = py * (py - 1) * x**px * y ** (py - 2)
        elif which == "xy" and px >= 1 and py >= 1:
            out[k] = px * py * x ** (px - 1) * y ** (py - 1)
    return out


def _d1(which: str, x: float, y: float) -> np.ndarray:
    out = np.zeros(len(_POWERS))
    for k, (px, py) in enumerate(_POWERS):
        if which == "x" and px >= 1:
            out[k] = px * x ** (px - 1) * y**py
        elif which == "y" and py >= 1:
            out[k] = py * x**px * y ** (py - 1)
    return out


def _element_matrices(ax: float, by: float):
    """Nodal stiffness split (K0, K1 with K = D*(K0 + nu*K1)) and the
    consistent load vector for unit pressure, on an ax x by rectangle."""
    corners = ((0.0, 0.0), (ax, 0.0), (ax, by), (0.0, by))
    C = np.zeros((12, 12))
    for i, (x, y) in enumerate(corners):
        C[3 * i] = _monomials(x, y)
        C[3 * i + 1] = _d1("x", x, y)
        C[3 * i + 2] = _d1("y", x, y)
    Cinv = np.linalg.inv(C)

    gx, gw = np.polynomial.legendre.leggauss(4)
    K0c = np.zeros((12, 12))
    K1c = np.zeros((12, 12))
    fc = np.zeros(12)
    M0 = np.diag([1.0, 1.0, 0.5])
    M1 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -0.5]])
    for u, wu in zip(gx, gw):
        x = 0.5 * (u + 1.0) * ax
        for v, wv in zip(gx, gw):
            y = 0.5 * (v + 1.0) * by
            scale = wu * wv * (ax / 2.0) * (by / 2.0)
            B = np.vstack([_d2("xx", x, y), _d2("yy", x, y), 2.0 * _d2("xy", x, y)])
            K0c += scale * B.T @ M0 @ B
            K1c += scale * B.T @ M1 @ B
            fc += scale * _monomials(x, y)
    K0 = Cinv.T @ K0c @ Cinv
    K1 = Cinv.T @ K1c @ Cinv
    f = Cinv.T @ fc
    return K0, K1, f


@lru_cache(maxsize=8)
def _mesh_operator(side: float, n: int):
    """Assembled active-DOF operators for the clamped-edge mesh.

    Returns (G0, G1, f_unit, w_slice) where K = D*(G0 + nu*G1), the load for
    pressure q is q*f_unit, and w_slice picks the deflection DOFs.
    """
    h = side / n
    K0e, K1e, fe = _element_matrices(h, h)
    n_nodes = (n + 1) * (n + 1)

    # Nodes on the clamped edge x = 0 are dropped entirely (all three DOFs).
    active_of_node = np.full(n_nodes, -1, dtype=int)
    count = 0
    for node in range(n_nodes):
        ix = node % (n + 1)
        if ix != 0:
            active_of_node[node] = count
            count += 1
    ndof = 3 * count

    G0 = np.zeros((ndof, ndof))
    G1 = np.zeros((ndof, ndof))
    f = np.zeros(ndof)
    for ey in range(n):
        for ex in range(n):
            nodes = (
                ey * (n + 1) + ex,
                ey * (n + 1) + ex + 1,
                (ey + 1) * (n + 1) + ex + 1,
                (ey + 1) * (n + 1) + ex,
            )
            gdofs = np.empty(12, dtype=int)
            keep = np.empty(12, dtype=bool)
            for i, node in enumerate(nodes):
                act = active_of_node[node]
                for k in range(3):
                    gdofs[3 * i + k] = 3 * act + k if act >= 0 else -1
                    keep[3 * i + k] = act >= 0
            idx = gdofs[keep]
            G0[np.ix_(idx, idx)] += K0e[np.ix_(keep, keep)]
            G1[np.ix_(idx, idx)] += K1e[np.ix_(keep, keep)]
            f[idx] += fe[keep]

    G0.setflags(write=False)
    G1.setflags(write=False)
    f.setflags(write=False)
    return G0, G1, f, active_of_node


def plate_solve(E: float, t: float, nu: float, cfg: PlateConfig = PlateConfig()) -> float:
    """Largest deflection magnitude (m) of the clamped plate.

    Raises ValueError when the inputs are outside the physical range or the
    assembled system fails the positive-definiteness check.
    """
    if E <= 0 or t <= 0:
        raise ValueError("E and t must be positive")
    if not 0.0 < nu < 0.5:
        raise ValueError("Poisson ratio must lie in (0, 0.5)")
    G0, G1, f_unit, active_of_node = _mesh_operator(cfg.side, cfg.n_elems)
    D = E * t**3 / (12.0 * (1.0 - nu * nu))
    K = D * (G0 + nu * G1)
    try:
        factor = cho_factor(K, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"stiffness matrix is not positive definite: {exc}") from exc
    u = cho_solve(factor, cfg.pressure * f_unit, check_finite=False)
    w = u[0::3]
    if cfg.qoi == "max-deflection":
        return float(np.max(np.abs(w)))
    n = cfg.n_elems
    node = (n // 2) * (n + 1) + n  # mid-height node on the free edge x = side
    return float(abs(w[active_of_node[node]]))


def default_inputs() -> InputVector:
    """Paper inputs: E, t, nu as truncated Gaussians with CoV 15%, 10%, 10%."""
    return InputVector(
        (
            InputVariable.truncated_normal(2.1e11, 0.15 * 2.1e11),
            InputVariable.truncated_normal(5e-3, 0.1 * 5e-3),
            InputVariable.truncated_normal(0.3, 0.1 * 0.3),
        )
    )


@dataclass(frozen=True)
class PlateModel:
    name: str = "plate-fe"
    inputs: InputVector = field(default_factory=default_inputs)
    config: PlateConfig = field(default_factory=PlateConfig)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != 3:
            raise ValueError("expected columns (E, t, nu)")
        return np.array([plate_solve(E, t, nu, self.config) for E, t, nu in X])
