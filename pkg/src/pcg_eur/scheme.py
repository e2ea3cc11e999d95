"""Periodic bin functions and mutually unbiased PCG parameter sets.

A PCG measurement in direction ``theta`` sorts the quadrature value ``z``
into ``d`` outcomes according to ``(z - offset) mod T``; outcome ``k``
collects the bins ``[k*s, (k+1)*s)`` with ``s = T/d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import ParameterError, SchemeError

#: relative tolerance for recognising ``M`` as an integer
M_TOL = 1e-9
#: |sin(dtheta)| below this counts as parallel quadratures
SIN_TOL = 1e-12

DIRECTIONS = ("theta", "theta_prime")


@dataclass(frozen=True)
class BinSpec:
    """Period ``T`` split into ``d`` bins of width ``s = T/d``, shifted by ``offset``."""

    T: float
    d: int
    offset: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.d, (int, np.integer)) and self.d >= 2):
            raise ParameterError(f"d must be an integer >= 2, got {self.d!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ParameterError(f"period T must be positive, got {self.T!r}")
        if not math.isfinite(self.offset):
            raise ParameterError("offset must be finite")
        object.__setattr__(self, "d", int(self.d))

    @property
    def s(self) -> float:
        return self.T / self.d

    def check_index(self, k):
        if not (isinstance(k, (int, np.integer)) and 0 <= k < self.d):
            raise ParameterError(f"bin index must satisfy 0 <= k < {self.d}, got {k!r}")

    def bin_index(self, z):
        """Outcome index of every coordinate in ``z`` (vectorised).

        Points that sit on a bin edge up to rounding are assigned to the
        upper bin, as the half-open convention requires.
        """
        u = (np.asarray(z, dtype=float) - self.offset) / self.s
        r = np.rint(u)
        u = np.where(np.abs(u - r) <= 1e-12 * np.maximum(1.0, np.abs(u)), r, u)
        return np.mod(np.floor(u).astype(np.int64), self.d)


def mask_value(z, spec: BinSpec, k: int):
    """Periodic bin function: 1 where ``z`` falls into outcome ``k``, else 0.

    Scalar ``z`` gives an ``int``; array input gives an integer array.
    """
    spec.check_index(k)
    out = (spec.bin_index(z) == k).astype(int)
    return int(out) if np.ndim(out) == 0 else out


def fourier_coefficient(k: int, N: int, d: int) -> complex:
    """Coefficient of ``exp(2 pi i N z / T)`` in the Fourier series of bin ``k``.

    Zero exactly whenever ``d`` divides ``N``.
    """
    if N == 0:
        raise ParameterError("N = 0 is the DC term 1/d, not a harmonic coefficient")
    if not (0 <= k < d):
        raise ParameterError(f"bin index must satisfy 0 <= k < {d}")
    if N % d == 0:
        return 0j
    return (1 - np.exp(-2j * np.pi * N / d)) / (2j * np.pi * N) * np.exp(-2j * np.pi * N * k / d)


def fourier_coefficients(k: int, n_max: int, d: int):
    """Coefficients for ``N = 1..n_max`` as an array (same values as above)."""
    N = np.arange(1, n_max + 1)
    c = (1 - np.exp(-2j * np.pi * N / d)) / (2j * np.pi * N) * np.exp(-2j * np.pi * N * k / d)
    c[N % d == 0] = 0
    return c


def reconstruct_mask(spec: BinSpec, k: int, z, n_max: int, chunk: int = 256):
    """Truncated Fourier series of the bin function, summed in ``+-N`` pairs."""
    spec.check_index(k)
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    z = np.asarray(z, dtype=float)
    phase = 2 * np.pi * (z.ravel() - spec.offset) / spec.T
    acc = np.full(phase.shape, 1.0 / spec.d, dtype=complex)
    if n_max:
        coef = fourier_coefficients(k, n_max, spec.d)
        # f_{k,-N} is the conjugate of f_{k,N}
        for start in range(0, n_max, chunk):
            N = np.arange(start + 1, min(start + chunk, n_max) + 1)
            c = coef[start:start + chunk]
            e = np.exp(1j * np.outer(phase, N))
            acc += e @ c + e.conj() @ c.conj()
    if acc.size and np.max(np.abs(acc.imag)) > 1e-12:
        raise AssertionError("Fourier partial sum is not real")
    out = acc.real.reshape(z.shape)
    return float(out) if out.ndim == 0 else out


class MubCheck(NamedTuple):
    valid: bool
    M: float
    reason: Optional[str] = None

    def __bool__(self):
        return self.valid


def coprime_condition(M: int, d: int) -> bool:
    """``M*n/d`` is not an integer for any ``n = 1..d-1``."""
    return all((M * n) % d != 0 for n in range(1, d))


def check_mub(T_theta: float, T_theta_prime: float, dtheta: float, d: int) -> MubCheck:
    """Decide whether two PCG measurements are mutually unbiased.

    Returns a :class:`MubCheck` whose ``reason`` is ``None`` when valid and
    otherwise one of ``degenerate-angle``, ``non-integer-M`` or
    ``coprimality-failure``.
    """
    if not (T_theta > 0 and T_theta_prime > 0):
        raise ParameterError("periods must be positive")
    if not (isinstance(d, (int, np.integer)) and d >= 2):
        raise ParameterError("d must be an integer >= 2")
    sin = abs(math.sin(dtheta))
    if sin < SIN_TOL:
        return MubCheck(False, 0.0, "degenerate-angle")
    M = 2 * math.pi * d * sin / (T_theta * T_theta_prime)
    Mi = round(M)
    if Mi < 1 or abs(M - Mi) > M_TOL * max(1.0, M):
        return MubCheck(False, M, "non-integer-M")
    if not coprime_condition(Mi, d):
        return MubCheck(False, float(Mi), "coprimality-failure")
    return MubCheck(True, float(Mi))


@dataclass(frozen=True)
class PcgScheme:
    """A pair of PCG measurements along ``theta`` and ``theta_prime``.

    The constructor only enforces structural invariants (shared ``d``,
    non-parallel directions); whether the pair is mutually unbiased is
    reported by :attr:`mub`. Use :func:`make_scheme` to build schemes that
    are guaranteed valid.
    """

    theta: float
    theta_prime: float
    spec_theta: BinSpec
    spec_theta_prime: BinSpec
    M: int = field(default=0)

    def __post_init__(self):
        if self.spec_theta.d != self.spec_theta_prime.d:
            raise ParameterError("both directions must share the same d")
        if abs(math.sin(self.theta - self.theta_prime)) < SIN_TOL:
            raise SchemeError("degenerate-angle", "parallel quadratures: sin(theta - theta') = 0")
        if not self.M:
            object.__setattr__(self, "M", max(1, round(self.mub.M)))

    @property
    def d(self) -> int:
        return self.spec_theta.d

    @property
    def dtheta(self) -> float:
        return self.theta - self.theta_prime

    @property
    def mub(self) -> MubCheck:
        return check_mub(self.spec_theta.T, self.spec_theta_prime.T, self.dtheta, self.d)

    def require_valid(self):
        chk = self.mub
        if not chk.valid:
            raise SchemeError(chk.reason, f"scheme is not mutually unbiased: {chk.reason} (M={chk.M:.12g})")
        return self

    def angle(self, direction: str) -> float:
        return self.theta if _direction(direction) == "theta" else self.theta_prime

    def spec(self, direction: str) -> BinSpec:
        return self.spec_theta if _direction(direction) == "theta" else self.spec_theta_prime

    def swapped(self) -> "PcgScheme":
        return PcgScheme(self.theta_prime, self.theta, self.spec_theta_prime, self.spec_theta, self.M)

    @property
    def label(self) -> str:
        return (f"d={self.d};M={self.M};theta={self.theta:.12g};theta_prime={self.theta_prime:.12g};"
                f"T_theta={self.spec_theta.T:.12g};T_theta_prime={self.spec_theta_prime.T:.12g}")

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "M": self.M,
            "theta": self.theta,
            "theta_prime": self.theta_prime,
            "T_theta": self.spec_theta.T,
            "T_theta_prime": self.spec_theta_prime.T,
            "offset_theta": self.spec_theta.offset,
            "offset_theta_prime": self.spec_theta_prime.offset,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PcgScheme":
        d = int(data["d"])
        if "T_theta_prime" not in data or data["T_theta_prime"] is None:
            return make_scheme(d, float(data["theta"]), float(data["theta_prime"]), int(data["M"]),
                               float(data["T_theta"]),
                               offset_theta=float(data.get("offset_theta", 0.0)),
                               offset_theta_prime=float(data.get("offset_theta_prime", 0.0)))
        return cls(
            float(data["theta"]),
            float(data["theta_prime"]),
            BinSpec(float(data["T_theta"]), d, float(data.get("offset_theta", 0.0))),
            BinSpec(float(data["T_theta_prime"]), d, float(data.get("offset_theta_prime", 0.0))),
            int(data.get("M") or 0),
        )


def _direction(direction: str) -> str:
    if direction not in DIRECTIONS:
        raise ParameterError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return direction


def make_scheme(d: int, theta: float, theta_prime: float, M: int, T_theta: float,
                offset_theta: float = 0.0, offset_theta_prime: float = 0.0) -> PcgScheme:
    """Build a mutually unbiased scheme, deriving ``T_theta_prime`` from the MUB condition."""
    if abs(math.sin(theta - theta_prime)) < SIN_TOL:
        raise SchemeError("degenerate-angle", "parallel quadratures: sin(theta - theta') = 0")
    if not (isinstance(M, (int, np.integer)) and M >= 1):
        raise SchemeError("non-integer-M", f"M must be a positive integer, got {M!r}")
    if not coprime_condition(int(M), d):
        raise SchemeError("coprimality-failure", f"M*n/d is an integer for some n (M={M}, d={d})")
    if not T_theta > 0:
        raise ParameterError("T_theta must be positive")
    T_prime = 2 * math.pi * d * abs(math.sin(theta - theta_prime)) / (M * T_theta)
    scheme = PcgScheme(theta, theta_prime, BinSpec(T_theta, d, offset_theta),
                       BinSpec(T_prime, d, offset_theta_prime), int(M))
    return scheme.require_valid()


def symmetric_scheme(d: int, theta: float = 0.0, theta_prime: float = math.pi / 2, M: int = 1,
                     check: bool = True) -> PcgScheme:
    """Scheme with equal periods ``T = sqrt(2 pi d |sin| / M)`` in both directions.

    With ``check=False`` a non-coprime ``M`` is accepted, giving a parameter
    set that deliberately violates mutual unbiasedness.
    """
    if abs(math.sin(theta - theta_prime)) < SIN_TOL:
        raise SchemeError("degenerate-angle")
    T = math.sqrt(2 * math.pi * d * abs(math.sin(theta - theta_prime)) / M)
    if check:
        return make_scheme(d, theta, theta_prime, M, T)
    return PcgScheme(theta, theta_prime, BinSpec(T, d), BinSpec(T, d), int(M))


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, disjoint, non-empty half-open intervals ``[a, b)``."""

    intervals: tuple

    def __post_init__(self):
        prev = -math.inf
        for a, b in self.intervals:
            if not a < b or a < prev:
                raise ParameterError("intervals must be non-empty, sorted and disjoint")
            prev = b

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)


def bin_intervals(spec: BinSpec, k: int, L: float) -> IntervalSet:
    """The part of outcome ``k``'s bin set that lies inside ``[-L, L)``."""
    spec.check_index(k)
    if not L > 0:
        raise ParameterError("L must be positive")
    T, s, o = spec.T, spec.s, spec.offset
    n0 = math.floor((-L - o) / T) - 1
    n1 = math.ceil((L - o) / T) + 1
    out = []
    for n in range(n0, n1 + 1):
        a = max(o + n * T + k * s, -L)
        b = min(o + n * T + (k + 1) * s, L)
        if b - a > 1e-12 * max(1.0, L):
            out.append((a, b))
    return IntervalSet(tuple(out))


def nearest_interval(spec: BinSpec, k: int):
    """The sub-interval of outcome ``k``'s bin set whose centre is closest to the origin."""
    spec.check_index(k)
    c0 = spec.offset + (k + 0.5) * spec.s
    n = round(-c0 / spec.T)
    a = spec.offset + n * spec.T + k * spec.s
    return a, a + spec.s
