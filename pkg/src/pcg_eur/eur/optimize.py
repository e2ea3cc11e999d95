"""Search for states with a small entropy sum.

The bound ``ln d`` is a theorem, so the search can only confirm it; a sum
below ``ln d - DEFICIT_FLOOR`` means the numerics are broken and is flagged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..errors import PcgError
from ..measurement import conjugate_order, renyi_entropy
from ..phasespace import Grid, WaveFunction, hermite_functions, matched_grid
from ..scheme import PcgScheme
from .report import DEFICIT_FLOOR, measure_pair


class GaussianFamily:
    """Superposition of ``n_packets`` Gaussian packets, each (center, log sigma, momentum).

    ``n_packets=2`` gives the 6-parameter family. ``free`` restricts the
    search to a subset of ``("center", "log_sigma", "momentum")``; fixed
    parameters take the values in ``fixed``.
    """

    names = ("center", "log_sigma", "momentum")

    def __init__(self, n_packets: int = 2, free=names, fixed=None):
        self.n_packets = n_packets
        self.free = tuple(free)
        self.fixed = {"center": 0.0, "log_sigma": 0.0, "momentum": 0.0, **(fixed or {})}

    @property
    def dim(self) -> int:
        return self.n_packets * len(self.free)

    def bounds(self, grid: Grid):
        box = {
            "center": (-grid.L / 4, grid.L / 4),
            "log_sigma": (math.log(grid.dq / 2), math.log(grid.L / 32)),
            "momentum": (-grid.L / 4, grid.L / 4),
        }
        return [box[name] for _ in range(self.n_packets) for name in self.free]

    def _packets(self, x):
        x = np.asarray(x, dtype=float).reshape(self.n_packets, len(self.free))
        for row in x:
            par = dict(self.fixed)
            par.update(zip(self.free, row))
            yield par

    def build(self, x, grid: Grid, theta: float) -> WaveFunction:
        q = grid.q
        psi = np.zeros(grid.N, dtype=complex)
        for par in self._packets(x):
            sigma = math.exp(par["log_sigma"])
            g = np.exp(-((q - par["center"]) ** 2) / (4 * sigma ** 2) + 1j * par["momentum"] * q)
            psi += g / math.sqrt(np.vdot(g, g).real * grid.dq)
        return WaveFunction.normalized(grid, psi, theta)

    def describe(self, x) -> dict:
        return {"packets": list(self._packets(x))}


class HermiteFamily:
    """Complex combination of the first ``n_modes`` Hermite-Gauss modes (2 reals per mode)."""

    def __init__(self, n_modes: int = 10):
        self.n_modes = n_modes
        self._cache = {}

    @property
    def dim(self) -> int:
        return 2 * self.n_modes

    def bounds(self, grid: Grid):
        return [(-1.0, 1.0)] * self.dim

    def build(self, x, grid: Grid, theta: float) -> WaveFunction:
        if grid not in self._cache:
            self._cache[grid] = hermite_functions(self.n_modes, grid.q)
        x = np.asarray(x, dtype=float)
        c = x[: self.n_modes] + 1j * x[self.n_modes:]
        return WaveFunction.normalized(grid, c @ self._cache[grid], theta)

    def describe(self, x) -> dict:
        x = np.asarray(x, dtype=float)
        return {"coefficients_re": x[: self.n_modes].tolist(), "coefficients_im": x[self.n_modes:].tolist()}


@dataclass
class SearchResult:
    best_params: np.ndarray
    best_sum: float
    bound: float
    deficit: float
    alpha: float
    beta: float
    restart_sums: list = field(default_factory=list)
    evaluations: int = 0

    @property
    def red_flag(self) -> bool:
        return self.deficit < -DEFICIT_FLOOR


def entropy_sum(psi, scheme: PcgScheme, alpha: float) -> float:
    p1, p2 = measure_pair(psi, scheme)
    return renyi_entropy(p1, alpha) + renyi_entropy(p2, conjugate_order(alpha))


def minimize_entropy_sum(scheme: PcgScheme, alpha: float, family, budget: int = 500,
                         restarts: int = 8, seed: int = 0, grid: Grid = None, starts=(),
                         m: int = 8) -> SearchResult:
    """Multi-restart bounded Nelder-Mead over ``family``'s parameters.

    ``budget`` is the evaluation cap per restart. Explicit ``starts`` are
    used first; the remaining restarts begin at uniform random points of
    the family's box, drawn from ``seed``.
    """
    scheme.require_valid()
    if budget < 100:
        raise ValueError("budget must be at least 100 evaluations")
    grid = grid or matched_grid(scheme, m)
    beta = conjugate_order(alpha)
    bound = math.log(scheme.d)
    penalty = 10 * bound + 10
    lo, hi = np.array(family.bounds(grid)).T
    rng = np.random.default_rng(seed)
    count = [0]

    def objective(x):
        count[0] += 1
        try:
            return entropy_sum(family.build(x, grid, scheme.theta), scheme, alpha)
        except PcgError:
            return penalty

    x0s = [np.clip(np.asarray(s, dtype=float), lo, hi) for s in starts][:restarts]
    while len(x0s) < restarts:
        x0s.append(rng.uniform(lo, hi))

    best_x, best_f, sums = None, math.inf, []
    for x0 in x0s:
        simplex = [x0]
        step = 0.1 * (hi - lo)
        for i in range(len(x0)):
            v = x0.copy()
            v[i] = v[i] + step[i] if v[i] + step[i] <= hi[i] else v[i] - step[i]
            simplex.append(v)
        res = minimize(objective, x0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
                       options={"maxfev": budget, "xatol": 1e-6, "fatol": 1e-12,
                                "initial_simplex": np.array(simplex), "adaptive": len(x0) > 6})
        sums.append(float(res.fun))
        if res.fun < best_f:
            best_x, best_f = np.array(res.x), float(res.fun)
    return SearchResult(best_x, best_f, bound, best_f - bound, alpha, beta, sums, count[0])
