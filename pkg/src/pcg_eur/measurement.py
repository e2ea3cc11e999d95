"""PCG outcome probabilities and entropies of the resulting distributions.

All entropies are in nats. Orders run over ``[1/2, inf]``; ``math.inf``
stands for the min-entropy.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import CoverageError, EmptyBinError, ParameterError
from .phasespace import TAIL_TOL, Ensemble, Grid, WaveFunction, same_angle
from .scheme import BinSpec, PcgScheme

CLAMP_TOL = 1e-12
SUM_TOL = 1e-8
EMPTY_BIN = 1e-12


def as_probability_vector(p, tol: float = SUM_TOL) -> np.ndarray:
    """Clamp tiny negatives and renormalise; reject anything that is not a distribution."""
    p = np.array(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ParameterError("probability vector must be one-dimensional")
    if np.any(p < -CLAMP_TOL):
        raise ParameterError(f"negative probability {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1) > tol:
        raise ParameterError(f"probabilities sum to {total:.12g}")
    return p / total


def check_coverage(density, grid: Grid, spec: BinSpec, tol: float = TAIL_TOL):
    """Raise if mass piles up at the grid edge of a grid that does not tile whole periods."""
    if grid.commensurate(spec.T, spec.offset):
        return
    edge = grid.edge_mass(density)
    if edge > tol:
        raise CoverageError(f"{edge:.3e} of the probability sits at the grid edge; widen the grid")


def binned(density, grid: Grid, spec: BinSpec) -> np.ndarray:
    """Midpoint-rule mass of a sampled density in each of the ``d`` outcomes."""
    idx = spec.bin_index(grid.q)
    return np.bincount(idx, weights=np.asarray(density) * grid.dq, minlength=spec.d)


def _check_direction(psi, scheme: PcgScheme, direction: str):
    if not same_angle(psi.theta, scheme.angle(direction)):
        raise ParameterError(f"state is given along theta={psi.theta:.6g} but {direction} is "
                             f"{scheme.angle(direction):.6g}; rotate it first")


def pcg_probabilities(psi: WaveFunction, scheme: PcgScheme, direction: str = "theta",
                      tail_tol: float = TAIL_TOL) -> np.ndarray:
    """Outcome probabilities of the PCG measurement along ``direction``."""
    _check_direction(psi, scheme, direction)
    spec = scheme.spec(direction)
    density = psi.density
    check_coverage(density, psi.grid, spec, tail_tol)
    return as_probability_vector(binned(density, psi.grid, spec))


def ensemble_probabilities(rho: Ensemble, scheme: PcgScheme, direction: str = "theta",
                           tail_tol: float = TAIL_TOL) -> np.ndarray:
    p = sum(w * pcg_probabilities(psi, scheme, direction, tail_tol) for w, psi in rho.members)
    return as_probability_vector(p)


def probabilities(state, scheme: PcgScheme, direction: str = "theta", tail_tol: float = TAIL_TOL):
    """Dispatch on pure (:class:`WaveFunction`) or mixed (:class:`Ensemble`) input."""
    if isinstance(state, Ensemble):
        return ensemble_probabilities(state, scheme, direction, tail_tol)
    return pcg_probabilities(state, scheme, direction, tail_tol)


def check_order(alpha: float):
    if math.isnan(alpha) or alpha < 0.5:
        raise ParameterError(f"order must lie in [1/2, inf], got {alpha!r}")


def renyi_entropy(p, alpha: float) -> float:
    """Renyi entropy of order ``alpha``; Shannon at 1, min-entropy at ``inf``."""
    check_order(alpha)
    p = np.asarray(p, dtype=float)
    if alpha == 1:
        nz = p[p > 0]
        return float(-(nz * np.log(nz)).sum())
    if math.isinf(alpha):
        return float(-math.log(p.max()))
    return float(math.log((p ** alpha).sum()) / (1 - alpha))


def shannon_entropy(p) -> float:
    return renyi_entropy(p, 1.0)


def conjugate_order(alpha: float) -> float:
    """The order ``beta`` with ``1/alpha + 1/beta = 2``."""
    check_order(alpha)
    if math.isinf(alpha):
        return 0.5
    if alpha == 0.5:
        return math.inf
    return alpha / (2 * alpha - 1)


def parse_order(value) -> float:
    """Order from config input: numbers, ``"inf"``, or fractions like ``"2/3"``."""
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "infinity", "∞"):
            return math.inf
        if "/" in v:
            num, den = v.split("/")
            return float(num) / float(den)
        return float(v)
    return float(value)


def as_joint_distribution(joint) -> np.ndarray:
    joint = np.array(joint, dtype=float)
    if joint.ndim != 2:
        raise ParameterError("joint distribution must be a 2-d array")
    if np.any(joint < -CLAMP_TOL):
        raise ParameterError("negative joint probability")
    joint = np.clip(joint, 0.0, None)
    if abs(joint.sum() - 1) > SUM_TOL:
        raise ParameterError(f"joint probabilities sum to {joint.sum():.12g}")
    return joint / joint.sum()


def conditional_shannon(joint) -> float:
    """H[K|L] for ``joint[k, l]``: joint entropy minus the entropy of the ``l`` marginal."""
    joint = as_joint_distribution(joint)
    h = shannon_entropy(joint.ravel()) - shannon_entropy(joint.sum(axis=0))
    return max(h, 0.0)


def project_and_normalize(psi: WaveFunction, scheme: PcgScheme, direction: str, k: int) -> WaveFunction:
    """Project ``psi`` onto outcome ``k`` and renormalise."""
    _check_direction(psi, scheme, direction)
    spec = scheme.spec(direction)
    spec.check_index(k)
    mask = spec.bin_index(psi.grid.q) == k
    pk = float(psi.density[mask].sum() * psi.grid.dq)
    if pk <= EMPTY_BIN:
        raise EmptyBinError(f"outcome {k} has probability {pk:.3e}")
    return WaveFunction(psi.grid, np.where(mask, psi.psi, 0) / math.sqrt(pk), psi.theta)
