"""Entropy-sum reports for a state measured along both directions of a scheme."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from math import gcd
from typing import Iterable, Optional

import numpy as np

from ..measurement import conjugate_order, probabilities, renyi_entropy
from ..phasespace import (TAIL_TOL, Ensemble, bin_localized_state, frft, matched_grid,
                          rotate_to)
from ..scheme import PcgScheme, symmetric_scheme

#: numerical floor on the deficit at default resolution
DEFICIT_FLOOR = 2e-3
DEFAULT_ORDERS = (0.5, 2 / 3, 1.0, 2.0, math.inf)


@dataclass(frozen=True)
class EurReport:
    scheme: str
    state: str
    alpha: float
    beta: float
    h_theta: float
    h_theta_prime: float
    total: float
    bound: float
    deficit: float
    seed: Optional[int] = None

    @property
    def red_flag(self) -> bool:
        return self.deficit < -DEFICIT_FLOOR

    def to_dict(self) -> dict:
        return asdict(self)


def rotated(state, theta: float):
    """``state`` expressed along ``theta`` (pure states and ensembles)."""
    if isinstance(state, Ensemble):
        return Ensemble(tuple((w, rotate_to(psi, theta)) for w, psi in state.members))
    return rotate_to(state, theta)


def measure_pair(state, scheme: PcgScheme, tail_tol: float = TAIL_TOL):
    """Probability vectors ``(p[theta], p[theta'])`` for a state given along either direction."""
    at_theta = rotated(state, scheme.theta)
    at_prime = rotated(state, scheme.theta_prime)
    return (probabilities(at_theta, scheme, "theta", tail_tol),
            probabilities(at_prime, scheme, "theta_prime", tail_tol))


def report_from_probabilities(p_theta, p_theta_prime, scheme: PcgScheme, alpha: float,
                              state_id: str = "", seed: Optional[int] = None) -> EurReport:
    beta = conjugate_order(alpha)
    h1, h2 = renyi_entropy(p_theta, alpha), renyi_entropy(p_theta_prime, beta)
    bound = math.log(scheme.d)
    total = h1 + h2
    return EurReport(scheme.label, state_id, alpha, beta, h1, h2, total, bound, total - bound, seed)


def eur_reports(state, scheme: PcgScheme, alphas: Iterable[float] = DEFAULT_ORDERS,
                state_id: str = "", seed: Optional[int] = None, tail_tol: float = TAIL_TOL):
    """One report per order, sharing a single pair of measurements."""
    scheme.require_valid()
    p1, p2 = measure_pair(state, scheme, tail_tol)
    return [report_from_probabilities(p1, p2, scheme, a, state_id, seed) for a in alphas]


def eur_report(state, scheme: PcgScheme, alpha: float, state_id: str = "",
               seed: Optional[int] = None, tail_tol: float = TAIL_TOL) -> EurReport:
    """H_alpha along theta plus H_beta along theta', compared with ln d.

    The state may be pure or an :class:`Ensemble`, given along either
    direction of the scheme. Invalid schemes raise :class:`SchemeError`.
    """
    return eur_reports(state, scheme, (alpha,), state_id, seed, tail_tol)[0]


def probe_states(scheme: PcgScheme, k: int, grid):
    """Bin-localised states used to test unbiasedness for outcome ``k``.

    Besides the single bump, pairs of bumps one or ``M/gcd(M, d)`` periods
    apart with relative phases 1, i, -1, -i: a single bump cannot tell a
    broken scheme from a good one, because its autocorrelation vanishes at
    every shift a non-coprime ``M`` would expose.
    """
    yield bin_localized_state(scheme, "theta", k, grid)
    seps = sorted({1, scheme.M // gcd(scheme.M, scheme.d)})
    for sep in seps:
        for phase in (1, 1j, -1, -1j):
            yield bin_localized_state(scheme, "theta", k, grid, periods=(0, sep), amplitudes=(1, phase))


def probe_deviations(d: int, dtheta: float, M: int, grid=None, m: int = 4) -> np.ndarray:
    """Per outcome ``k``: worst ``max_l |p_l[theta'] - 1/d|`` over :func:`probe_states`."""
    scheme = symmetric_scheme(d, 0.0, -dtheta, M, check=False)
    grid = grid or matched_grid(scheme, m)
    out = np.zeros(d)
    for k in range(d):
        for psi in probe_states(scheme, k, grid):
            p = probabilities(frft(psi, scheme.theta_prime - scheme.theta), scheme, "theta_prime")
            out[k] = max(out[k], float(np.max(np.abs(p - 1 / d))))
    return out


def invalid_scheme_probe(d: int, dtheta: float, M: int, grid=None, m: int = 4) -> float:
    """Largest deviation from uniform statistics seen in the conjugate direction.

    For ``gcd(M, d) > 1`` this is well above zero; a coprime ``M`` serves as
    the control and gives zero up to rounding.
    """
    return float(probe_deviations(d, dtheta, M, grid, m).max())
