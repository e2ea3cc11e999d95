"""Sampled wavefunctions and their rotation between quadrature directions.

Samples sit at cell midpoints ``q_j = (j - N/2 + 1/2) * dq``; cell edges are
then the integer multiples of ``dq``, so a bin width that is a multiple of
``dq`` puts every bin edge on a cell edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .errors import CoverageError, ParameterError, ResolutionError, SamplingError, SchemeError
from .scheme import SIN_TOL, PcgScheme, nearest_interval

NORM_TOL = 1e-6
UNITARITY_TOL = 1e-6
TAIL_TOL = 1e-8


@dataclass(frozen=True)
class Grid:
    N: int
    dq: float

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and self.N > 0 and self.N % 2 == 0):
            raise ParameterError(f"N must be a positive even integer, got {self.N!r}")
        if not (math.isfinite(self.dq) and self.dq > 0):
            raise ParameterError(f"dq must be positive, got {self.dq!r}")
        object.__setattr__(self, "N", int(self.N))

    @cached_property
    def q(self) -> np.ndarray:
        q = (np.arange(self.N) - self.N / 2 + 0.5) * self.dq
        q.flags.writeable = False
        return q

    @property
    def L(self) -> float:
        """Half-width: the grid covers ``[-L, L)``."""
        return self.N * self.dq / 2

    def commensurate(self, T: float, offset: float = 0.0) -> bool:
        """True if the grid spans whole periods starting on a bin edge.

        Wrapping such a grid onto a circle keeps every cell in its bin, so
        mass aliased across the boundary never changes an outcome.
        """
        span = self.N * self.dq / T
        start = (-self.L - offset) / T
        return abs(span - round(span)) < 1e-9 and abs(start - round(start)) < 1e-9

    def edge_mass(self, density) -> float:
        """Probability mass in the outermost ~3% of cells on either side."""
        w = max(1, self.N // 32)
        density = np.asarray(density)
        return float((density[..., :w].sum() + density[..., -w:].sum()) * self.dq)


def matched_grid(scheme: PcgScheme, m: int = 8) -> Grid:
    """Grid on which the sampled transform between the scheme's directions is unitary.

    ``dq = s_theta / m`` and ``N = 2 pi |sin dtheta| / dq**2``. Requires
    ``s_theta' / dq`` to be an integer too (e.g. equal periods).
    """
    if m < 4:
        raise ParameterError("need at least 4 grid points per bin")
    dq = scheme.spec_theta.s / m
    ratio = scheme.spec_theta_prime.s / dq
    if abs(ratio - round(ratio)) > 1e-9 * ratio:
        raise ParameterError("bin widths are not commensurate; use covering_grid")
    n = 2 * math.pi * abs(math.sin(scheme.dtheta)) / dq ** 2
    N = round(n)
    if abs(n - N) > 1e-6 * n or N % 2:
        raise ParameterError(f"no matched grid for m={m} (N would be {n:.6g})")
    return Grid(N, dq)


def covering_grid(scheme: PcgScheme, half_width: float, m: int = 8) -> Grid:
    """Grid with ``dq = min(s) / m`` covering at least ``[-half_width, half_width)``."""
    if m < 4:
        raise ParameterError("need at least 4 grid points per bin")
    dq = min(scheme.spec_theta.s, scheme.spec_theta_prime.s) / m
    return Grid(2 * math.ceil(half_width / dq - 1e-9), dq)


def wrap_angle(a: float) -> float:
    return math.remainder(a, 2 * math.pi)


def same_angle(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(wrap_angle(a - b)) < tol


class WaveFunction:
    """Pure state sampled on a grid in the ``theta`` quadrature representation."""

    __slots__ = ("grid", "psi", "theta")

    def __init__(self, grid: Grid, psi, theta: float = 0.0):
        psi = np.array(psi, dtype=complex)
        if psi.shape != (grid.N,):
            raise ParameterError(f"expected {grid.N} amplitudes, got shape {psi.shape}")
        if not np.all(np.isfinite(psi)):
            raise ParameterError("amplitudes must be finite")
        norm = float(np.vdot(psi, psi).real * grid.dq)
        if abs(norm - 1) > NORM_TOL:
            raise ParameterError(f"state is not normalised (norm {norm:.3e})")
        psi.flags.writeable = False
        self.grid = grid
        self.psi = psi
        self.theta = float(theta)

    @classmethod
    def normalized(cls, grid: Grid, psi, theta: float = 0.0) -> "WaveFunction":
        psi = np.asarray(psi, dtype=complex)
        norm = math.sqrt(float(np.vdot(psi, psi).real) * grid.dq)
        if norm == 0:
            raise ParameterError("cannot normalise the zero vector")
        return cls(grid, psi / norm, theta)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def norm(self) -> float:
        return float(self.density.sum() * self.grid.dq)

    def __repr__(self):
        return f"WaveFunction(N={self.grid.N}, dq={self.grid.dq:.6g}, theta={self.theta:.6g})"


@dataclass(frozen=True)
class Ensemble:
    """Mixed state as a convex combination of pure states."""

    members: tuple

    def __post_init__(self):
        members = tuple((float(w), psi) for w, psi in self.members)
        if not members:
            raise ParameterError("empty ensemble")
        weights = np.array([w for w, _ in members])
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
            raise ParameterError("ensemble weights must be non-negative and sum to 1")
        g, th = members[0][1].grid, members[0][1].theta
        for _, psi in members:
            if psi.grid != g or not same_angle(psi.theta, th):
                raise ParameterError("ensemble members must share grid and direction")
        object.__setattr__(self, "members", members)

    @property
    def grid(self) -> Grid:
        return self.members[0][1].grid

    @property
    def theta(self) -> float:
        return self.members[0][1].theta

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])


def _require_coverage(grid: Grid, half_width: float, what: str):
    if grid.L < half_width:
        raise CoverageError(f"{what} needs the grid to cover +-{half_width:.4g}, grid covers +-{grid.L:.4g}")


def hermite_functions(n_max: int, q) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions ``0..n_max-1`` at ``q`` (rows), by recurrence."""
    q = np.asarray(q, dtype=float)
    out = np.empty((n_max,) + q.shape)
    out[0] = np.pi ** -0.25 * np.exp(-q ** 2 / 2)
    if n_max > 1:
        out[1] = math.sqrt(2.0) * q * out[0]
    for n in range(1, n_max - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * q * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_gauss(n: int, grid: Grid, theta: float = 0.0) -> WaveFunction:
    """n-th Hermite-Gauss mode (hbar = m = omega = 1), renormalised on the grid."""
    if n < 0:
        raise ParameterError("mode index must be >= 0")
    _require_coverage(grid, math.sqrt(2 * n + 1) + 5, f"HG_{n}")
    return WaveFunction.normalized(grid, hermite_functions(n + 1, grid.q)[n], theta)


def gaussian(center: float, sigma: float, momentum: float, grid: Grid, theta: float = 0.0) -> WaveFunction:
    """Gaussian packet whose density has mean ``center`` and standard deviation ``sigma``."""
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    _require_coverage(grid, abs(center) + 8 * sigma, "gaussian")
    q = grid.q
    psi = np.exp(-((q - center) ** 2) / (4 * sigma ** 2) + 1j * momentum * q)
    return WaveFunction.normalized(grid, psi, theta)


def random_superposition(n_max: int, seed: int, grid: Grid, theta: float = 0.0) -> WaveFunction:
    """Normalised combination of HG_0..HG_{n_max-1} with complex-Gaussian coefficients."""
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    _require_coverage(grid, math.sqrt(2 * n_max - 1) + 5, "random superposition")
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n_max) + 1j * rng.standard_normal(n_max)
    c /= np.linalg.norm(c)
    return WaveFunction.normalized(grid, c @ hermite_functions(n_max, grid.q), theta)


def bump(q, a: float, b: float, fill: float = 0.8):
    """cos^2 bump on the central ``fill`` fraction of ``[a, b)``, zero elsewhere."""
    c, w = (a + b) / 2, fill * (b - a)
    x = (np.asarray(q) - c) / w
    return np.where(np.abs(x) < 0.5, np.cos(np.pi * x) ** 2, 0.0)


def bin_localized_state(scheme: PcgScheme, direction: str, k: int, grid: Grid,
                        periods: Sequence[int] = (0,), amplitudes=None) -> WaveFunction:
    """State supported strictly inside outcome ``k``'s bins along ``direction``.

    By default a single cos^2 bump in the sub-interval nearest the origin.
    ``periods`` adds bumps shifted by whole periods, weighted by the complex
    ``amplitudes``; any such state still gives outcome ``k`` with certainty.
    """
    spec = scheme.spec(direction)
    if spec.s < 4 * grid.dq:
        raise ResolutionError(f"bin width {spec.s:.4g} is narrower than 4 grid spacings ({grid.dq:.4g})")
    a, b = nearest_interval(spec, k)
    amplitudes = np.ones(len(periods)) if amplitudes is None else np.asarray(amplitudes, dtype=complex)
    if len(amplitudes) != len(periods):
        raise ParameterError("need one amplitude per period")
    psi = np.zeros(grid.N, dtype=complex)
    for n, c in zip(periods, amplitudes):
        lo, hi = a + n * spec.T, b + n * spec.T
        if lo < -grid.L or hi > grid.L:
            raise CoverageError(f"bin interval [{lo:.4g}, {hi:.4g}) does not fit in the grid")
        psi += c * bump(grid.q, lo, hi)
    return WaveFunction.normalized(grid, psi, scheme.angle(direction))


def overlap(psi: WaveFunction, phi: WaveFunction) -> complex:
    """Inner product <psi|phi> by grid quadrature."""
    if psi.grid != phi.grid:
        raise ParameterError("states live on different grids")
    if not same_angle(psi.theta, phi.theta):
        raise ParameterError("states are in different quadrature representations")
    return complex(np.vdot(psi.psi, phi.psi) * psi.grid.dq)


def kernel_prefactor(dtheta: float) -> complex:
    return complex(np.sqrt(-1j * np.exp(1j * dtheta) / (2 * np.pi * np.sin(dtheta))))


def overlap_kernel(q_theta, q_theta_prime, dtheta: float):
    """<q_theta|q_theta'> for quadratures separated by ``dtheta = theta - theta'``."""
    sin, cot = math.sin(dtheta), math.cos(dtheta) / math.sin(dtheta)
    q1, q2 = np.asarray(q_theta, dtype=float), np.asarray(q_theta_prime, dtype=float)
    return kernel_prefactor(dtheta) * np.exp(1j * cot / 2 * (q1 ** 2 + q2 ** 2) - 1j * q1 * q2 / sin)


@lru_cache(maxsize=16)
def _frft_matrix(N: int, dq: float, angle: float) -> np.ndarray:
    q = Grid(N, dq).q
    # output[l] = sum_j conj(F(q_j, q_l)) psi[j] dq with theta - theta' = -angle
    K = np.conj(overlap_kernel(q[None, :], q[:, None], -angle)) * dq
    K.flags.writeable = False
    return K


def frft_matrix(grid: Grid, angle: float) -> np.ndarray:
    """Dense matrix taking samples along ``theta`` to samples along ``theta + angle``.

    A half turn is the parity ``psi(q) -> psi(-q)``, exact on the symmetric grid.
    """
    if same_angle(angle, math.pi):
        return np.eye(grid.N)[::-1]
    if abs(math.sin(angle)) < SIN_TOL:
        raise SchemeError("degenerate-angle", "fractional Fourier transform needs sin(angle) != 0")
    return _frft_matrix(grid.N, grid.dq, float(angle))


def frft(psi: WaveFunction, angle: float) -> WaveFunction:
    """Rotate ``psi`` by ``angle`` in phase space: representation ``theta -> theta + angle``.

    ``angle = pi/2`` is the unitary Fourier transform ``exp(-i q p) / sqrt(2 pi)``.
    """
    K = frft_matrix(psi.grid, angle)
    out = K @ psi.psi
    n_in = psi.norm
    n_out = float(np.vdot(out, out).real * psi.grid.dq)
    if abs(n_out - n_in) > UNITARITY_TOL:
        raise SamplingError(f"norm drifted by {n_out - n_in:.3e} under rotation by {angle:.6g}; "
                            "use a finer or wider grid")
    return WaveFunction(psi.grid, out, psi.theta + angle)


def rotate_to(psi: WaveFunction, theta: float) -> WaveFunction:
    """Representation of ``psi`` along ``theta`` (no-op if already there)."""
    if same_angle(psi.theta, theta):
        return psi
    return frft(psi, wrap_angle(theta - psi.theta))
