"""Seeded ARMA simulation.

The random stream is SplitMix64 used in counter mode: draw ``i`` (0-based) of
seed ``s`` is ``mix(s + (i + 1) * 0x9E3779B97F4A7C15 mod 2**64)`` with the
standard SplitMix64 finalizer. A draw becomes a uniform on [0, 1) as
``(z >> 11) * 2**-53``. Normal pairs come from Box-Muller on consecutive
uniforms ``(u0, u1)``::

    r = sqrt(-2 ln(1 - u0))
    z0 = r cos(2 pi u1), z1 = r sin(2 pi u1)

Everything is integer arithmetic until the final transform, so any language
with 64-bit unsigned integers reproduces the stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import InputError
from .estimation import is_stationary
from .series import TimeSeries

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Raw 64-bit outputs ``offset .. offset + count - 1`` of the stream for ``seed``."""
    seed64 = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = seed64 + idx * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def uniforms(seed: int, count: int) -> np.ndarray:
    """Uniform draws on [0, 1) with 53 random bits each."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def standard_normals(seed: int, count: int) -> np.ndarray:
    """Box-Muller standard normals; uses ``2 * ceil(count / 2)`` uniforms."""
    pairs = (count + 1) // 2
    u = uniforms(seed, 2 * pairs)
    u0, u1 = u[0::2], u[1::2]
    r = np.sqrt(-2.0 * np.log1p(-u0))
    ang = 2.0 * np.pi * u1
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(ang)
    z[1::2] = r * np.sin(ang)
    return z[:count]


def white_noise(n: int, sigma: float = 1.0, seed: int = 0) -> TimeSeries:
    """i.i.d. N(0, sigma^2) sample of length ``n``."""
    if n < 1:
        raise InputError("n must be >= 1")
    if sigma < 0:
        raise InputError("sigma must be non-negative")
    return TimeSeries(sigma * standard_normals(seed, n))


@dataclass(frozen=True)
class SimSpec:
    """ARMA simulation settings; MA terms enter with a plus sign."""

    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()
    constant: float = 0.0
    sigma: float = 1.0
    n: int = 100
    burn_in: int | None = None
    seed: int = 0
    step: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(float(b) for b in self.ma))
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", 10 * (len(self.ar) + len(self.ma) + 1))
        if self.n < 1:
            raise InputError("n must be >= 1")
        if self.burn_in < 0:
            raise InputError("burn_in must be >= 0")
        if self.sigma < 0:
            raise InputError("sigma must be non-negative")
        if not is_stationary(self.ar):
            raise InputError(f"AR coefficients {self.ar} are not stationary")


def simulate_arma(spec: SimSpec) -> TimeSeries:
    """Generate ``(y_t - c) = sum a_i (y_{t-i} - c) + u_t + sum b_j u_{t-j}``.

    Pre-sample values sit at the mean ``c`` with zero shocks; the first
    ``burn_in`` outputs are dropped.
    """
    total = spec.n + spec.burn_in
    u = spec.sigma * standard_normals(spec.seed, total)
    w = lfilter(np.r_[1.0, spec.ma], np.r_[1.0, -np.asarray(spec.ar)], u)
    return TimeSeries(spec.constant + w[spec.burn_in:], step=spec.step)
