"""Weighted L^p norms of radial fields, closed-form norm formulas, the
ABP-derived Lyapunov lower bounds, residual verification, and limit sweeps."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constructions import (
    ConstructionInstance,
    InducedCoefficientError,
    ParamsN2,
    ParamsN3,
    ParamsSmallNorm,
    build,
    shell_volume,
    unit_sphere_area,
)
from .pucci import EllipticityPair, Sign, pucci_radial_array
from .quadrature import QuadratureError, integrate
from .radial import CoefficientField, InterfaceReport, RadialPiecewise, interface_report, positive_part

QUAD_MIN_EPS = 1e-6


@dataclass(frozen=True)
class DomainBall:
    dim: int
    radius: float

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"dimension must be at least 2, got {self.dim}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def omega(self) -> float:
        """Surface measure of the unit sphere (so ``dx = omega r^{N-1} dr``)."""
        return unit_sphere_area(self.dim)

    @property
    def diam(self) -> float:
        return 2.0 * self.radius

    @property
    def volume(self) -> float:
        return shell_volume(self.dim, 0.0, self.radius)


@dataclass(frozen=True)
class BoundConfig:
    C1: float
    p: float

    def __post_init__(self) -> None:
        if not self.C1 > 0:
            raise ValueError(f"C1 must be positive, got {self.C1}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")


# ---------------------------------------------------------------------------
# quadrature of radial fields


def _pieces_of(g: CoefficientField | RadialPiecewise) -> list[tuple[float, float, Callable, tuple]]:
    if isinstance(g, RadialPiecewise):
        return [(lo, hi, piece.value, ()) for (lo, hi), piece in zip(g.intervals(), g.pieces)]
    return [(lo, hi, piece, g.split_points(i)) for i, ((lo, hi), piece) in enumerate(zip(g.intervals(), g.pieces))]


def radial_integral(g: CoefficientField | RadialPiecewise, transform: Callable, region=None,
                    dim: int | None = None, rtol: float = 1e-10) -> tuple[float, float]:
    """``int omega_N r^{N-1} transform(g(r)) dr`` over ``region``, split at every breakpoint."""
    n = dim if dim is not None else g.dim
    lo_r, hi_r = region if region is not None else (0.0, g.outer_radius)
    if lo_r < 0 or hi_r > g.outer_radius * (1 + 1e-14) or hi_r < lo_r:
        raise ValueError(f"region [{lo_r}, {hi_r}] not inside [0, {g.outer_radius}]")
    omega = unit_sphere_area(n)
    total, err = [], []
    for lo, hi, fn, splits in _pieces_of(g):
        a, b = max(lo, lo_r), min(hi, hi_r)
        if b <= a:
            continue
        edges = [a] + sorted(s for s in splits if a < s < b) + [b]

        def integrand(r, fn=fn):
            return omega * r ** (n - 1) * transform(fn(r))

        v, e = integrate(integrand, edges, rtol=rtol)
        total.append(v)
        err.append(e)
    return math.fsum(total), math.fsum(err)


def lp_norm(g: CoefficientField | RadialPiecewise, p: float, region=None, ball: DomainBall | None = None,
            rtol: float = 1e-10, full_output: bool = False):
    """``(int omega_N r^{N-1} |g|^p dr)^{1/p}`` by adaptive Gauss-Legendre.

    With ``full_output`` returns ``(norm, relative_error_estimate)``.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    dim = g.dim
    if ball is not None:
        if ball.dim != g.dim:
            raise ValueError("ball dimension does not match the field")
        if region is None:
            region = (0.0, min(ball.radius, g.outer_radius))
        elif region[1] > ball.radius * (1 + 1e-14):
            raise ValueError("region extends beyond the ball")
    val, err = radial_integral(g, lambda v: np.abs(v) ** p, region, dim, rtol)
    norm = val ** (1.0 / p)
    if full_output:
        rel = err / val / p if val > 0 else 0.0
        return norm, rel
    return norm


# ---------------------------------------------------------------------------
# closed forms


def closed_norm_n3(p: ParamsN3, exponent: float) -> float:
    """Norm of ``lam c d / r^2`` on the annulus ``eps < r < 1``; needs ``1 <= exponent < N/2``."""
    N, q = p.N, exponent
    if not (1 <= q < N / 2):
        raise ValueError(f"closed form valid only for 1 <= p < N/2 = {N / 2}, got p={q}")
    cdl = p.c * p.d * p.e.lam
    return (cdl**q * unit_sphere_area(N) * (1.0 - p.epsilon ** (N - 2 * q)) / (N - 2 * q)) ** (1.0 / q)


def closed_norm_n3_limit(p: ParamsN3, exponent: float) -> float:
    """``epsilon -> 0`` limit of :func:`closed_norm_n3`."""
    N, q = p.N, exponent
    if not (1 <= q < N / 2):
        raise ValueError(f"closed form valid only for 1 <= p < N/2 = {N / 2}, got p={q}")
    return p.c * p.d * p.e.lam * unit_sphere_area(N) ** (1.0 / q) / (N - 2 * q) ** (1.0 / q)


def closed_norm_small_bound(p: ParamsSmallNorm, exponent: float) -> float:
    """Upper bound for ``||a+||_p`` obtained by dropping ``-Lam/k^2``; needs ``1 <= exponent < N``."""
    N, q, k = p.N, exponent, p.k
    if not (1 <= q < N):
        raise ValueError(f"closed form valid only for 1 <= p < N = {N}, got p={q}")
    bracket = 1.5 ** (N - q) - (k + 1.0) ** (-(N - q))
    return (unit_sphere_area(N) / (N - q) * p.rbar**N / k**q * bracket) ** (1.0 / q)


def n2_l1_bound_log(Lam: float, alpha: float, K: float, log_eps: float) -> float:
    """Planar L^1 bound from ``log(eps)`` directly, so eps may underflow."""
    L = 2.0 * log_eps + K - 1.0
    if -1.0 <= L <= 0.0:
        raise ValueError(f"degenerate bound: log(eps^2) + K - 1 = {L} lies in [-1, 0]")
    # log(L / (1 + L)) == -log1p(1/L), positive for L < -1
    return 4 * math.pi * Lam * -math.log1p(1.0 / L) + 4 * math.pi * Lam * alpha / (K - math.log(alpha**2))


def n2_l1_bound(p: ParamsN2) -> float:
    return n2_l1_bound_log(p.e.Lam, p.alpha, p.K, math.log(p.epsilon))


# ---------------------------------------------------------------------------
# Lyapunov lower bounds


@dataclass(frozen=True)
class BoundReport:
    C1: float
    p: float
    dim: int
    diam: float
    volume: float
    lower_N: float
    lower_p: float | None
    tilde_lower: float
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"C1": self.C1, "p": self.p, "N": self.dim, "diam": self.diam, "volume": self.volume,
                "lower_N": self.lower_N, "lower_p": self.lower_p, "tilde_lower": self.tilde_lower,
                "notes": list(self.notes)}


def lyapunov_bounds_from(dim: int, diam: float, volume: float, cfg: BoundConfig) -> BoundReport:
    base = 1.0 / (cfg.C1 * diam)
    notes = []
    if cfg.p >= dim:
        lower_p = 1.0 / (cfg.C1 * diam * volume ** (1.0 / dim - 1.0 / cfg.p))
    else:
        lower_p = None
        notes.append(f"lower_p needs p >= N = {dim} (Holder step from L^p to L^N); got p = {cfg.p}")
    tilde = min(volume ** (1.0 / cfg.p), base ** (dim / cfg.p))
    return BoundReport(cfg.C1, cfg.p, dim, diam, volume, base, lower_p, tilde, tuple(notes))


def lyapunov_bounds(ball: DomainBall, cfg: BoundConfig) -> BoundReport:
    """Necessary lower bounds on ``||a+||`` for a nontrivial solution on ``ball``."""
    return lyapunov_bounds_from(ball.dim, ball.diam, ball.volume, cfg)


# ---------------------------------------------------------------------------
# power transform


@dataclass(frozen=True)
class PowerTransformReport:
    lhs: float  # ||(a+)^{p/N}||_N^N
    rhs: float  # ||a+||_p^p
    rel_err: float
    pointwise_checked: int
    pointwise_ok: bool

    def to_json(self) -> dict:
        return self.__dict__.copy()


def power_transform_check(a: CoefficientField, p: float, ball: DomainBall | None = None,
                          samples: int = 200) -> PowerTransformReport:
    """Check ``||(a+)^{p/N}||_N^N = ||a+||_p^p`` and ``a+ <= (a+)^{p/N}`` where ``a+ <= 1``."""
    N = a.dim
    if not (1 <= p < N):
        raise ValueError(f"need 1 <= p < N = {N}, got p={p}")
    ap = positive_part(a)
    region = (0.0, ball.radius) if ball is not None else None
    lhs, _ = radial_integral(ap, lambda v: (np.maximum(v, 0.0) ** (p / N)) ** N, region)
    rhs, _ = radial_integral(ap, lambda v: np.maximum(v, 0.0) ** p, region)
    rel = abs(lhs - rhs) / abs(rhs) if rhs != 0 else abs(lhs)
    checked, ok = 0, True
    for lo, hi in ap.intervals():
        r = np.linspace(lo, hi, samples + 2)[1:-1]
        v = ap(r)
        small = (v >= 0) & (v <= 1)
        checked += int(np.sum(small))
        ok &= bool(np.all(v[small] <= v[small] ** (p / N) * (1 + 1e-15)))
    return PowerTransformReport(lhs, rhs, rel, checked, ok)


def holder_gap(a: CoefficientField, p: float) -> tuple[float, float]:
    """``(||a+||_N, |Omega|^{1/N - 1/p} ||a+||_p)`` on the field's ball."""
    ap = positive_part(a)
    N = a.dim
    vol = shell_volume(N, 0.0, a.outer_radius)
    return lp_norm(ap, N), vol ** (1.0 / N - 1.0 / p) * lp_norm(ap, p)


# ---------------------------------------------------------------------------
# residuals


@dataclass(frozen=True)
class ResidualReport:
    sign: str
    negate: bool
    max_residual: float
    at_radius: float
    per_piece: tuple[float, ...]
    samples_per_piece: int
    interfaces: InterfaceReport
    boundary_value: float

    def to_json(self) -> dict:
        return {"sign": self.sign, "negate": self.negate, "max_residual": self.max_residual,
                "at_radius": self.at_radius, "per_piece": list(self.per_piece),
                "samples_per_piece": self.samples_per_piece,
                "interfaces": self.interfaces.to_json(), "boundary_value": self.boundary_value}


def residual_verify(inst: ConstructionInstance, samples: int = 200, sign: Sign = "plus",
                    negate: bool = False, delta: float | None = None) -> ResidualReport:
    """Max over interior samples of ``|M^sign(D^2 w) + a w| / (1 + |w|)``, ``w = -u`` if negated.

    Jets are evaluated in extended precision: on pieces like ``A r^{2-beta}``
    near a tiny radius the two Hessian contributions are large and cancel,
    and float64 rounding alone would dominate the residual.
    """
    u, a = inst.u, inst.a
    if delta is None:
        delta = 1e-8 * inst.domain_radius
    s = -1.0 if negate else 1.0
    worst, where, per = 0.0, float("nan"), []
    for i, ((lo, hi), piece) in enumerate(zip(u.intervals(), u.pieces)):
        r = np.linspace(lo + delta, hi - delta, samples).astype(np.longdouble)
        val = piece.value
        d1 = val.derivative()
        w, dw, d2w = s * val(r), s * d1(r), s * d1.derivative()(r)
        op = pucci_radial_array(inst.e, u.dim, dw / r, d2w, sign)
        res = (np.abs(op + a.pieces[i](r) * w) / (1.0 + np.abs(w))).astype(float)
        k = int(np.argmax(res))
        per.append(float(res[k]))
        if res[k] > worst or i == 0:
            worst, where = float(res[k]), float(r[k])
    boundary = float(u.pieces[-1].value(np.array(inst.domain_radius)))
    return ResidualReport(sign, negate, worst, where, tuple(per), samples, interface_report(u), boundary)


# ---------------------------------------------------------------------------
# sweeps

SWEEP_PARAM = {"n3": "d", "n2": "K", "small": "k"}


@dataclass
class SweepRow:
    param: float
    closed_form: float | None
    quadrature: float | None
    bound: float | None
    valid: bool
    note: str = ""


@dataclass
class SweepTable:
    family: str
    param_name: str
    exponent: float
    rows: list[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> list[float | None]:
        return [getattr(r, name) for r in self.rows]

    def strictly_decreasing(self, name: str = "closed_form") -> bool | None:
        vals = [v for v in self.column(name) if v is not None]
        if len(vals) < 2:
            return None
        return all(b < a for a, b in zip(vals, vals[1:]))

    def loglog_slope(self, name: str = "closed_form") -> float | None:
        pts = [(r.param, getattr(r, name)) for r in self.rows if getattr(r, name) is not None]
        if len(pts) < 2:
            return None
        x = np.log([p for p, _ in pts])
        y = np.log([v for _, v in pts])
        return float(np.polyfit(x, y, 1)[0])

    def to_csv(self) -> str:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "true" if v else "false"
            return "%.17g" % v

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "closed_form", "quadrature", "bound", "valid"])
        for r in self.rows:
            w.writerow([fmt(r.param), fmt(r.closed_form), fmt(r.quadrature), fmt(r.bound), fmt(r.valid)])
        if self.family == "small":
            w.writerow(["loglog_slope", fmt(self.loglog_slope("closed_form")),
                        fmt(self.loglog_slope("quadrature")), "", ""])
        return buf.getvalue()


def _family_bound(dim: int, radius: float, exponent: float, C1: float | None) -> float | None:
    if C1 is None:
        return None
    rep = lyapunov_bounds(DomainBall(dim, radius), BoundConfig(C1, exponent))
    return rep.lower_p if rep.lower_p is not None else rep.tilde_lower


def _sweep_row(family: str, base: dict, value: float, exponent: float, C1: float | None) -> SweepRow:
    e = EllipticityPair(float(base["lam"]), float(base["Lam"]))
    if family == "n3":
        p = ParamsN3.from_d(int(base["N"]), e, float(value), float(base["epsilon"]))
        valid = 1 <= exponent < p.N / 2
        closed = closed_norm_n3(p, exponent) if valid else None
        quad, note = None, ""
        try:
            inst = build(p)
            quad = lp_norm(positive_part(inst.a), exponent, region=(p.epsilon, 1.0))
        except InducedCoefficientError as err:
            note = str(err)
        return SweepRow(float(value), closed, quad, _family_bound(p.N, 2.0, exponent, C1), valid, note)
    if family == "n2":
        K = float(value)
        log_eps = math.log(float(base["epsilon"])) if "epsilon" in base else -K
        alpha = e.alpha(2)
        valid = exponent == 1
        closed = n2_l1_bound_log(e.Lam, alpha, K, log_eps) if valid else None
        quad = None
        if log_eps >= math.log(QUAD_MIN_EPS):
            inst = build(ParamsN2(e, K, math.exp(log_eps)))
            quad = lp_norm(positive_part(inst.a), exponent)
        return SweepRow(K, closed, quad, _family_bound(2, 2.0, exponent, C1), valid)
    if family == "small":
        p = ParamsSmallNorm(int(base["N"]), e, int(value))
        valid = 1 <= exponent < p.N
        closed = closed_norm_small_bound(p, exponent) if valid else None
        inst = build(p)
        quad = lp_norm(positive_part(inst.a), exponent)
        return SweepRow(float(value), closed, quad, _family_bound(p.N, 2 * p.rbar, exponent, C1), valid)
    raise ValueError(f"unknown family {family!r}")


def sweep(family: str, grid: Sequence[float], exponent: float, base: dict, C1: float | None = None) -> SweepTable:
    """One row per grid value of the family's limit parameter (d, K, or k).

    ``base`` holds the fixed parameters (``N``, ``lam``, ``Lam`` and, for n3,
    ``epsilon``; for n2 an optional fixed ``epsilon``, else ``epsilon = e^-K``).
    """
    if family not in SWEEP_PARAM:
        raise ValueError(f"unknown family {family!r}")
    vals = list(grid)
    if len(vals) > 1 and not (all(b > a for a, b in zip(vals, vals[1:]))
                              or all(b < a for a, b in zip(vals, vals[1:]))):
        raise ValueError("sweep grid must be strictly monotone")
    table = SweepTable(family, SWEEP_PARAM[family], exponent)
    table.rows = [_sweep_row(family, base, v, exponent, C1) for v in vals]
    return table


__all__ = [
    "BoundConfig", "BoundReport", "DomainBall", "PowerTransformReport", "QuadratureError", "ResidualReport",
    "SweepRow", "SweepTable", "closed_norm_n3", "closed_norm_n3_limit", "closed_norm_small_bound",
    "holder_gap", "lp_norm", "lyapunov_bounds", "lyapunov_bounds_from", "n2_l1_bound", "n2_l1_bound_log",
    "power_transform_check", "radial_integral", "residual_verify", "sweep",
]
