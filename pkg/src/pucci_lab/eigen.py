"""Radial principal eigenvalue of M^+ on balls by shooting from the center."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .constructions import shell_volume
from .norms import BoundConfig, lyapunov_bounds_from
from .pucci import EllipticityPair

STEPS_PER_RADIUS = 10_000
START_FRACTION = 1e-6
ZERO_TOL = 1e-12
MAX_HALVINGS = 12
RICHARDSON_TOL = 1e-7


class BracketError(RuntimeError):
    pass


@njit(cache=True)
def _d2u(r, u, du, mu, lam, Lam, n):
    t = du / r
    p = Lam * t if t > 0.0 else lam * t
    rhs = -mu * u - (n - 1) * p
    return rhs / Lam if rhs >= 0.0 else rhs / lam


@njit(cache=True)
def _rk4(r, u, du, h, mu, lam, Lam, n):
    """One RK4 step; also reports whether any stage saw a sign switch."""
    k1u = du
    k1v = _d2u(r, u, du, mu, lam, Lam, n)
    k2u = du + 0.5 * h * k1v
    k2v = _d2u(r + 0.5 * h, u + 0.5 * h * k1u, k2u, mu, lam, Lam, n)
    k3u = du + 0.5 * h * k2v
    k3v = _d2u(r + 0.5 * h, u + 0.5 * h * k2u, k3u, mu, lam, Lam, n)
    k4u = du + h * k3v
    k4v = _d2u(r + h, u + h * k3u, k4u, mu, lam, Lam, n)
    s0 = k1v >= 0.0
    t0 = k1u > 0.0
    mixed = ((k2v >= 0.0) != s0 or (k3v >= 0.0) != s0 or (k4v >= 0.0) != s0
             or (k2u > 0.0) != t0 or (k3u > 0.0) != t0 or (k4u > 0.0) != t0)
    u1 = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v1 = du + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return u1, v1, mixed


@njit(cache=True)
def _shoot(mu, lam, Lam, n, r_max, h, zero_tol, max_halvings):
    r0 = START_FRACTION * r_max
    m = int(math.ceil((r_max - r0) / h)) + 2
    rs = np.empty(m)
    us = np.empty(m)
    dus = np.empty(m)
    r = r0
    u = 1.0 - mu * r0 * r0 / (2.0 * n * lam)
    du = -mu * r0 / (n * lam)
    rs[0], us[0], dus[0] = r, u, du
    count = 1
    zero = np.nan
    h_min = h / 2.0**max_halvings
    while r < r_max and count < m:
        macro_end = min(r + h, r_max)
        while r < macro_end:
            hs = macro_end - r
            while True:
                u1, v1, mixed = _rk4(r, u, du, hs, mu, lam, Lam, n)
                if not mixed or hs <= h_min:
                    break
                hs *= 0.5
            if u1 <= 0.0 < u:
                # bisect the RK4 step length for the first zero
                lo, hi = 0.0, hs
                while hi - lo > zero_tol * r_max:
                    mid = 0.5 * (lo + hi)
                    um, vm, _ = _rk4(r, u, du, mid, mu, lam, Lam, n)
                    if um > 0.0:
                        lo = mid
                    else:
                        hi = mid
                zero = r + 0.5 * (lo + hi)
                uz, vz, _ = _rk4(r, u, du, zero - r, mu, lam, Lam, n)
                rs[count], us[count], dus[count] = zero, uz, vz
                return rs[: count + 1], us[: count + 1], dus[: count + 1], zero
            r += hs
            u, du = u1, v1
        rs[count], us[count], dus[count] = r, u, du
        count += 1
    return rs[:count], us[:count], dus[:count], zero


@dataclass(frozen=True)
class ShootingState:
    mu: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    first_zero: float | None

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "u", "du"])
        for row in zip(self.r, self.u, self.du):
            w.writerow(["%.17g" % v for v in row])
        return buf.getvalue()


def shoot(e: EllipticityPair, N: int, mu: float, R_max: float, step: float) -> ShootingState:
    """Integrate the regular radial solution of ``M^+(D^2 u) + mu u = 0`` out to ``R_max``."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if N < 2:
        raise ValueError(f"dimension must be at least 2, got {N}")
    if not (0 < step <= R_max / 1e3):
        raise ValueError(f"step must lie in (0, R_max/1000], got {step}")
    rs, us, dus, zero = _shoot(float(mu), float(e.lam), float(e.Lam), int(N), float(R_max), float(step),
                               ZERO_TOL, MAX_HALVINGS)
    return ShootingState(float(mu), rs, us, dus, None if math.isnan(zero) else float(zero))


@dataclass(frozen=True)
class EigenResult:
    mu1: float
    R: float
    N: int
    lam: float
    Lam: float
    achieved_tol: float
    first_zero: float
    richardson_error: float

    @property
    def volume(self) -> float:
        return shell_volume(self.N, 0.0, self.R)

    @property
    def empirical_C1_floor(self) -> float:
        return 1.0 / (self.mu1 * self.volume ** (1.0 / self.N) * 2.0 * self.R)

    def to_json(self) -> dict:
        return {"mu1": self.mu1, "R": self.R, "N": self.N, "lam": self.lam, "Lam": self.Lam,
                "achieved_tol": self.achieved_tol, "first_zero": self.first_zero,
                "richardson_error": self.richardson_error, "empirical_C1_floor": self.empirical_C1_floor}


def _zero_at(e: EllipticityPair, N: int, mu: float, R: float) -> float:
    z = shoot(e, N, mu, 2.0 * R, R / STEPS_PER_RADIUS).first_zero
    return math.inf if z is None else z


def richardson_error(e: EllipticityPair, N: int, mu: float, R: float, checkpoints: int = 16) -> float:
    """Max ``|u_h - u_{h/2}|`` at interior checkpoints shared by both grids."""
    h = R / STEPS_PER_RADIUS
    a = shoot(e, N, mu, 2.0 * R, h)
    b = shoot(e, N, mu, 2.0 * R, h / 2)
    last = min(len(a.r) - 2, (len(b.r) - 2) // 2)
    idx = np.unique(np.linspace(1, last, checkpoints).astype(int))
    return float(np.max(np.abs(a.u[idx] - b.u[2 * idx])))


def principal_eigenvalue(e: EllipticityPair, N: int, R: float = 1.0, tol: float = 1e-10) -> EigenResult:
    """Smallest mu whose regular radial solution first vanishes at ``r = R``."""
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    if not tol >= 1e-10:
        raise ValueError(f"tol must be at least 1e-10, got {tol}")
    mu = 1.0 / R**2
    z = _zero_at(e, N, mu, R)
    lo, hi = None, None
    for _ in range(61):
        if z > R:
            lo = mu
            mu *= 2.0
        else:
            hi = mu
            mu *= 0.5
        if lo is not None and hi is not None:
            break
        z = _zero_at(e, N, mu, R)
    else:
        raise BracketError(f"eigenvalue bracket left [2^-60, 2^60] / R^2 (last mu={mu:.3e}, zero={z})")
    while (hi - lo) > tol * hi:
        mid = 0.5 * (lo + hi)
        if _zero_at(e, N, mid, R) > R:
            lo = mid
        else:
            hi = mid
    mu1 = 0.5 * (lo + hi)
    return EigenResult(mu1, R, N, e.lam, e.Lam, (hi - lo) / mu1, _zero_at(e, N, mu1, R),
                       richardson_error(e, N, mu1, R))


def empirical_bound_report(res: EigenResult, p: float) -> dict:
    """Constant coefficient ``a = mu1``: its L^p norm bounds the infimum from above."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    upper = res.mu1 * res.volume ** (1.0 / p)
    floor = res.empirical_C1_floor
    norm_N = res.mu1 * res.volume ** (1.0 / res.N)
    bounds = lyapunov_bounds_from(res.N, 2.0 * res.R, res.volume, BoundConfig(floor, p))
    out = {"p": p, "mu1": res.mu1, "upper_bound": upper, "empirical_C1_floor": floor,
           "floor_identity": floor * 2.0 * res.R * norm_N, "lower_N_at_floor": bounds.lower_N,
           "lower_p_at_floor": bounds.lower_p, "notes": list(bounds.notes)}
    if bounds.lower_p is not None:
        out["consistent"] = bool(bounds.lower_p <= upper * (1 + 1e-12))
    return out


__all__ = ["BracketError", "EigenResult", "ShootingState", "empirical_bound_report", "principal_eigenvalue",
           "richardson_error", "shoot"]
