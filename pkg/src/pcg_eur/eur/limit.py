"""Rescaled PCG entropies against continuous differential entropies as d grows."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import CoverageError
from ..measurement import check_order, conjugate_order, renyi_entropy
from ..phasespace import TAIL_TOL, WaveFunction, covering_grid, hermite_gauss, rotate_to
from ..scheme import make_scheme
from .report import measure_pair


def continuous_renyi(psi: WaveFunction, alpha: float, tail_tol: float = TAIL_TOL) -> float:
    """Differential Renyi entropy of ``|psi|^2`` by midpoint quadrature."""
    check_order(alpha)
    rho, dq = psi.density, psi.grid.dq
    if psi.grid.edge_mass(rho) > tail_tol:
        raise CoverageError("state is not contained in the grid")
    if alpha == 1:
        nz = rho[rho > 0]
        return float(-(nz * np.log(nz)).sum() * dq)
    if math.isinf(alpha):
        return float(-math.log(rho.max()))
    return float(math.log((rho ** alpha).sum() * dq) / (1 - alpha))


@dataclass(frozen=True)
class LimitRecord:
    d: int
    T_theta: float
    s_theta: float
    s_theta_prime: float
    alpha: float
    beta: float
    H_theta: float
    H_theta_prime: float
    rescaled_sum: float
    bound: float
    h_theta: float
    h_theta_prime: float
    continuous_sum: float
    gap_theta: float
    gap_theta_prime: float

    def to_dict(self) -> dict:
        return asdict(self)


def hg_state(n: int = 0) -> Callable:
    return lambda grid, theta: hermite_gauss(n, grid, theta)


def limit_study(state: Callable = hg_state(0), theta: float = 0.0, theta_prime: float = math.pi / 2,
                alpha: float = 1.0, c: float = None, ds: Sequence[int] = (4, 16, 64, 256),
                m: int = 8, half_width: float = 10.0) -> list:
    """Follow ``H + ln s`` toward the differential entropy along a list of ``d``.

    ``state(grid, theta)`` builds the test state. Every ``d`` uses an ``M = 1``
    scheme with ``T_theta = c * sqrt(d)``; the default
    ``c = sqrt(2 pi |sin dtheta|)`` makes both periods equal.
    """
    sin = abs(math.sin(theta - theta_prime))
    c = math.sqrt(2 * math.pi * sin) if c is None else c
    beta = conjugate_order(alpha)
    bound = math.log(2 * math.pi * sin)
    records = []
    for d in ds:
        scheme = make_scheme(d, theta, theta_prime, 1, c * math.sqrt(d))
        grid = covering_grid(scheme, half_width, m)
        psi = state(grid, theta)
        p1, p2 = measure_pair(psi, scheme)
        s1, s2 = scheme.spec_theta.s, scheme.spec_theta_prime.s
        H1, H2 = renyi_entropy(p1, alpha), renyi_entropy(p2, beta)
        h1 = continuous_renyi(psi, alpha)
        h2 = continuous_renyi(rotate_to(psi, theta_prime), beta)
        records.append(LimitRecord(
            d, scheme.spec_theta.T, s1, s2, alpha, beta, H1, H2,
            H1 + H2 + math.log(s1 * s2), bound, h1, h2, h1 + h2,
            abs(H1 + math.log(s1) - h1), abs(H2 + math.log(s2) - h2)))
    return records
