"""Two-party PCG statistics and the conditional-entropy steering witness."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..errors import CoverageError, ParameterError, ResolutionError, SamplingError
from ..measurement import TAIL_TOL, as_joint_distribution, check_coverage, conditional_shannon
from ..phasespace import UNITARITY_TOL, Grid, WaveFunction, frft_matrix, same_angle, wrap_angle
from ..scheme import PcgScheme

MAX_GRID = 512
VIOLATION_TOL = 1e-3


class TwoModeState:
    """Pure two-mode state ``psi[a, b]`` sampled on ``grid x grid``."""

    __slots__ = ("grid", "psi", "theta_a", "theta_b")

    def __init__(self, grid: Grid, psi, theta_a: float = 0.0, theta_b: float = 0.0):
        if grid.N > MAX_GRID:
            raise ParameterError(f"two-mode grids are capped at {MAX_GRID} points per axis")
        psi = np.array(psi, dtype=complex)
        if psi.shape != (grid.N, grid.N):
            raise ParameterError("amplitude array must be N x N")
        norm = float(np.vdot(psi, psi).real) * grid.dq ** 2
        if abs(norm - 1) > 1e-6:
            raise ParameterError(f"two-mode state is not normalised (norm {norm:.3e})")
        psi.flags.writeable = False
        self.grid, self.psi = grid, psi
        self.theta_a, self.theta_b = float(theta_a), float(theta_b)

    @classmethod
    def normalized(cls, grid, psi, theta_a=0.0, theta_b=0.0):
        psi = np.asarray(psi, dtype=complex)
        return cls(grid, psi / math.sqrt(np.vdot(psi, psi).real * grid.dq ** 2), theta_a, theta_b)

    @classmethod
    def product(cls, a: WaveFunction, b: WaveFunction) -> "TwoModeState":
        if a.grid != b.grid:
            raise ParameterError("both parties must use the same grid")
        return cls(a.grid, np.outer(a.psi, b.psi), a.theta, b.theta)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def rotated(self, theta_a: float, theta_b: float) -> "TwoModeState":
        psi = self.psi
        da, db = wrap_angle(theta_a - self.theta_a), wrap_angle(theta_b - self.theta_b)
        if not same_angle(da, 0):
            psi = frft_matrix(self.grid, da) @ psi
        if not same_angle(db, 0):
            psi = psi @ frft_matrix(self.grid, db).T
        drift = float(np.vdot(psi, psi).real) * self.grid.dq ** 2 - 1
        if abs(drift) > UNITARITY_TOL:
            raise SamplingError(f"norm drifted by {drift:.3e} under rotation; use a finer or wider grid")
        return TwoModeState(self.grid, psi, theta_a, theta_b)


def squeezed_half_width(r: float) -> float:
    return 6 * math.sqrt(math.cosh(2 * r) / 2)


def squeezed_resolution(r: float, grid: Grid) -> float:
    """Grid cells per standard deviation of the squeezed quadrature combination."""
    return math.exp(-r) / math.sqrt(2) / grid.dq


def two_mode_squeezed(r: float, grid: Grid) -> TwoModeState:
    """Two-mode squeezed vacuum in position space: ``x_a - x_b`` and ``p_a + p_b`` squeezed.

    Each mode alone is thermal with position variance ``cosh(2r)/2``; the
    grid must reach six standard deviations, and the squeezed combination
    (standard deviation ``exp(-r)/sqrt(2)``) must span at least one cell.
    Binned probabilities converge like ``dq**2``: about 1e-3 in the witness
    at four cells per squeezed deviation, a few 1e-2 at one.
    """
    need = squeezed_half_width(r)
    if grid.L < need:
        raise CoverageError(f"r={r:g} needs a grid half-width of {need:.3g}, got {grid.L:.3g}")
    if squeezed_resolution(r, grid) < 1:
        raise ResolutionError(f"r={r:g} is not resolved: squeezed deviation {math.exp(-r) / math.sqrt(2):.3g} "
                              f"is below the grid spacing {grid.dq:.3g}")
    xa, xb = np.meshgrid(grid.q, grid.q, indexing="ij")
    psi = np.exp(-math.exp(2 * r) * (xa - xb) ** 2 / 4 - math.exp(-2 * r) * (xa + xb) ** 2 / 4)
    return TwoModeState.normalized(grid, psi)


def joint_probabilities(state, scheme: PcgScheme, alice: str, bob: str, theta_a: float,
                        theta_b: float, tail_tol: float = TAIL_TOL) -> np.ndarray:
    """``p[k, l]`` with Alice binned by ``scheme.spec(alice)`` at ``theta_a``, Bob by ``scheme.spec(bob)`` at ``theta_b``.

    ``state`` is a :class:`TwoModeState` or a sequence of ``(weight, TwoModeState)``.
    """
    if isinstance(state, TwoModeState):
        state = [(1.0, state)]
    spec_a, spec_b = scheme.spec(alice), scheme.spec(bob)
    d = scheme.d
    total = np.zeros((d, d))
    for w, member in state:
        rho = member.rotated(theta_a, theta_b).density
        g = member.grid
        check_coverage(rho.sum(axis=1) * g.dq, g, spec_a, tail_tol)
        check_coverage(rho.sum(axis=0) * g.dq, g, spec_b, tail_tol)
        idx = spec_a.bin_index(g.q)[:, None] * d + spec_b.bin_index(g.q)[None, :]
        total += w * np.bincount(idx.ravel(), weights=rho.ravel() * g.dq ** 2, minlength=d * d).reshape(d, d)
    return as_joint_distribution(total)


@dataclass(frozen=True)
class WitnessReport:
    theta: float
    phi: float
    theta_prime: float
    phi_prime: float
    h_first: float
    h_second: float
    total: float
    bound: float
    violated: bool

    def to_dict(self) -> dict:
        return asdict(self)


def steering_witness(state, scheme: PcgScheme, bob_angles: Sequence[float] = None,
                     tol: float = VIOLATION_TOL) -> WitnessReport:
    """H[q_theta | q_phi] + H[q_theta' | q_phi'] against ln d.

    Bob bins with Alice's periods (``phi`` like ``theta``, ``phi'`` like
    ``theta'``). The default Bob angles ``(-theta, -theta')`` are the ones
    correlated with Alice's in a two-mode squeezed vacuum.
    """
    scheme.require_valid()
    phi, phi_prime = bob_angles if bob_angles is not None else (0.0 - scheme.theta, 0.0 - scheme.theta_prime)
    j1 = joint_probabilities(state, scheme, "theta", "theta", scheme.theta, phi)
    j2 = joint_probabilities(state, scheme, "theta_prime", "theta_prime", scheme.theta_prime, phi_prime)
    h1, h2 = conditional_shannon(j1), conditional_shannon(j2)
    bound = math.log(scheme.d)
    return WitnessReport(scheme.theta, phi, scheme.theta_prime, phi_prime, h1, h2, h1 + h2, bound,
                         h1 + h2 < bound - tol)
