"""Smooth profile functions: the bump, a smooth step and the wet blanket."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad


def _raw_bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


@lru_cache(maxsize=None)
def _bump_mass() -> float:
    val, _ = quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), -1, 1, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def bump(x):
    """C-infinity, even, supported in (-1, 1), integral 1."""
    return _raw_bump(x) / _bump_mass()


def peak_bump(x):
    """Same shape scaled to peak value 1 at the origin."""
    return _raw_bump(x) * math.e


def scaled_bump(x, eps: float, t: float = 0.0):
    """``b_{eps,t}(x) = b((x - t) / eps) / eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return bump((np.asarray(x, dtype=float) - t) / eps) / eps


@lru_cache(maxsize=4096)
def _bump_cdf_scalar(x: float) -> float:
    if x <= -1:
        return 0.0
    if x >= 1:
        return 1.0
    if x <= 0:
        val, _ = quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), -1, x, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val / _bump_mass()
    return 1.0 - _bump_cdf_scalar(-x)


def _phi(u):
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(x):
    """C-infinity, 0 for x <= -1, 1 for x >= 1, odd about (0, 1/2)."""
    u = (np.asarray(x, dtype=float) + 1.0) / 2.0
    a, b = _phi(u), _phi(1.0 - u)
    return a / (a + b)


def _unit_bump(u: float) -> float:
    # bump moved to [0, 1], symmetric about 1/2, integral 1
    return 2.0 * float(bump(np.array([2.0 * u - 1.0]))[0])


@lru_cache(maxsize=4096)
def _wet_scalar(x: float) -> float:
    if x <= 0:
        return x
    if x >= 1:
        return 0.5
    # b(x) = x - int_0^x G = x (1 - G(x)) + int_0^x y B(y) dy
    G = _bump_cdf_scalar(2.0 * x - 1.0)
    moment, _ = quad(lambda y: y * _unit_bump(y), 0.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    return x * (1.0 - G) + moment


def wet_blanket(x):
    """C-infinity with b(x) = x for x <= 0 and b(x) = 1/2 for x >= 1."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    return np.array([_wet_scalar(float(v)) for v in flat]).reshape(x.shape)


PROFILES = {"bump": bump, "peak_bump": peak_bump, "smooth_step": smooth_step,
            "wet_blanket": wet_blanket}


def smoothing_profiles(kind: str, samples: int = 201, lo: float = -1.5, hi: float = 1.5):
    """Return ``(callable, table)`` with the table an ``(samples, 2)`` array."""
    if kind not in PROFILES:
        raise ValueError(f"unknown profile {kind!r}; choose from {sorted(PROFILES)}")
    if samples < 2 or not hi > lo:
        raise ValueError("need samples >= 2 and hi > lo")
    fn = PROFILES[kind]
    xs = np.linspace(lo, hi, samples)
    return fn, np.column_stack([xs, fn(xs)])
