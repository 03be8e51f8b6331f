"""Piecewise closed-form radial profiles and the coefficients they induce.

A profile is a list of pieces on consecutive radial intervals; each piece is a
sum of basis terms (powers, log, exponentials, shifted squares, constants)
with exact first and second derivatives.  Internally every basis term is
expanded into generalized monomials ``c * r**p * exp(s*r) * log(r)**m`` so
that ``u'/r``, ``u''`` and the Pucci numerator stay closed under the algebra.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .pucci import EllipticityPair, RadialJet, Sign, _check_sign, pucci_radial_array

ORIGIN_EPS = 1e-10
CANCEL_RTOL = 1e-12
SIGN_SAMPLES = 64


class ProfileError(ValueError):
    pass


class InducedCoefficientError(ValueError):
    """``u`` vanishes inside a piece where the Pucci numerator does not."""

    def __init__(self, message: str, radius: float):
        super().__init__(message)
        self.radius = radius


# ---------------------------------------------------------------------------
# monomial algebra


def as_real(r) -> np.ndarray:
    """Array view of ``r`` keeping float64 or extended precision if given."""
    r = np.asarray(r)
    return r if r.dtype.kind == "f" else r.astype(float)


@dataclass(frozen=True)
class Monomial:
    coef: float
    power: float = 0.0
    rate: float = 0.0
    log: int = 0

    def __call__(self, r):
        r = as_real(r)
        out = self.coef * np.ones_like(r)
        if self.power != 0.0:
            out = out * r**self.power
        if self.rate != 0.0:
            out = out * np.exp(self.rate * r)
        if self.log:
            out = out * np.log(r) ** self.log
        return out

    def key(self) -> tuple:
        return (round(self.power, 12), round(self.rate, 12), self.log)

    def derivative(self) -> list["Monomial"]:
        c, p, s, m = self.coef, self.power, self.rate, self.log
        out = []
        if p != 0.0:
            out.append(Monomial(c * p, p - 1.0, s, m))
        if s != 0.0:
            out.append(Monomial(c * s, p, s, m))
        if m:
            out.append(Monomial(c * m, p - 1.0, s, m - 1))
        return out

    def times(self, other: "Monomial") -> "Monomial":
        return Monomial(self.coef * other.coef, self.power + other.power,
                        self.rate + other.rate, self.log + other.log)

    def scaled_argument(self, factor: float) -> list["Monomial"]:
        """Monomials of ``r -> self(r / factor)``."""
        c = self.coef * factor ** (-self.power)
        s = self.rate / factor
        if self.log == 0:
            return [Monomial(c, self.power, s, 0)]
        # log(r/f)^m expanded binomially
        lf = math.log(factor)
        return [Monomial(c * math.comb(self.log, j) * (-lf) ** (self.log - j), self.power, s, j)
                for j in range(self.log + 1)]


class TermSum:
    """Sum of monomials with like terms combined and cancelled sums dropped."""

    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[Monomial] = ()):
        groups: dict[tuple, list[Monomial]] = {}
        for t in terms:
            if t.coef != 0.0:
                groups.setdefault(t.key(), []).append(t)
        out = []
        for items in groups.values():
            total = math.fsum(t.coef for t in items)
            scale = sum(abs(t.coef) for t in items)
            if abs(total) > CANCEL_RTOL * scale:
                t0 = items[0]
                out.append(Monomial(total, t0.power, t0.rate, t0.log))
        out.sort(key=lambda t: t.key())
        self.terms = tuple(out)

    def __call__(self, r):
        r = as_real(r)
        if not self.terms:
            return np.zeros_like(r)
        return sum(t(r) for t in self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "TermSum") -> "TermSum":
        return TermSum(self.terms + other.terms)

    def __neg__(self) -> "TermSum":
        return self.scale(-1.0)

    def scale(self, c: float) -> "TermSum":
        return TermSum([Monomial(c * t.coef, t.power, t.rate, t.log) for t in self.terms])

    def shift_power(self, dp: float) -> "TermSum":
        return TermSum([Monomial(t.coef, t.power + dp, t.rate, t.log) for t in self.terms])

    def derivative(self) -> "TermSum":
        return TermSum([d for t in self.terms for d in t.derivative()])

    def scaled_argument(self, factor: float) -> "TermSum":
        return TermSum([m for t in self.terms for m in t.scaled_argument(factor)])

    def singular_at_origin(self) -> bool:
        return any(t.power < 0 or t.log for t in self.terms)

    def divide(self, other: "TermSum") -> "TermSum | None":
        """Quotient ``self / other`` if ``other`` divides ``self`` exactly, else None.

        Exact when ``other`` is a single monomial; otherwise only monomial
        quotients are searched for.
        """
        if not other:
            return None
        if not self:
            return TermSum()
        if len(other) == 1:
            d = other.terms[0]
            if any(t.log < d.log for t in self.terms):
                return None
            return TermSum([Monomial(t.coef / d.coef, t.power - d.power, t.rate - d.rate, t.log - d.log)
                            for t in self.terms])
        if len(self) != len(other):
            return None
        d0 = other.terms[0]
        for t in self.terms:
            if t.log < d0.log:
                continue
            q = Monomial(t.coef / d0.coef, t.power - d0.power, t.rate - d0.rate, t.log - d0.log)
            prod = TermSum([q.times(o) for o in other.terms])
            if _termsums_close(prod, self):
                return TermSum([q])
        return None

    def to_json(self) -> list:
        return [[t.coef, t.power, t.rate, t.log] for t in self.terms]

    def __repr__(self) -> str:
        return f"TermSum({list(self.terms)!r})"


def _termsums_close(a: TermSum, b: TermSum, rtol: float = 1e-10) -> bool:
    if len(a) != len(b):
        return False
    for x, y in zip(a.terms, b.terms):
        if x.key() != y.key():
            return False
        if abs(x.coef - y.coef) > rtol * max(abs(x.coef), abs(y.coef)):
            return False
    return True


# ---------------------------------------------------------------------------
# basis terms and profiles

BASIS_KINDS = ("power", "log", "exp", "shifted_square", "constant")


@dataclass(frozen=True)
class BasisTerm:
    """One closed-form term: ``power`` c*r^p, ``log`` c*log r, ``exp`` c*e^{s r},
    ``shifted_square`` c*(center - r)^2, ``constant`` c."""

    kind: str
    coef: float
    param: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in BASIS_KINDS:
            raise ProfileError(f"unknown basis kind {self.kind!r}")

    @classmethod
    def power(cls, coef: float, exponent: float) -> "BasisTerm":
        return cls("power", coef, exponent)

    @classmethod
    def log(cls, coef: float) -> "BasisTerm":
        return cls("log", coef)

    @classmethod
    def exp(cls, coef: float, rate: float) -> "BasisTerm":
        return cls("exp", coef, rate)

    @classmethod
    def shifted_square(cls, coef: float, center: float) -> "BasisTerm":
        return cls("shifted_square", coef, center)

    @classmethod
    def constant(cls, coef: float) -> "BasisTerm":
        return cls("constant", coef)

    def monomials(self) -> list[Monomial]:
        c, q = self.coef, self.param
        if self.kind == "power":
            return [Monomial(c, q)]
        if self.kind == "log":
            return [Monomial(c, 0.0, 0.0, 1)]
        if self.kind == "exp":
            return [Monomial(c, 0.0, q)]
        if self.kind == "shifted_square":
            return [Monomial(c * q * q), Monomial(-2.0 * c * q, 1.0), Monomial(c, 2.0)]
        return [Monomial(c)]

    def jet(self, r: float) -> tuple[float, float, float]:
        """Exact ``(value, first, second)`` derivatives at r."""
        c, q = self.coef, self.param
        if self.kind == "power":
            if q == 0.0:
                return c, 0.0, 0.0
            return c * r**q, c * q * r ** (q - 1), c * q * (q - 1) * r ** (q - 2)
        if self.kind == "log":
            return c * math.log(r), c / r, -c / (r * r)
        if self.kind == "exp":
            v = c * math.exp(q * r)
            return v, q * v, q * q * v
        if self.kind == "shifted_square":
            return c * (q - r) ** 2, -2.0 * c * (q - r), 2.0 * c
        return c, 0.0, 0.0

    def scaled_argument(self, factor: float) -> list["BasisTerm"]:
        """Terms of ``r -> self(r / factor)``."""
        c, q = self.coef, self.param
        if self.kind == "power":
            return [BasisTerm.power(c * factor ** (-q), q)]
        if self.kind == "log":
            return [BasisTerm.log(c), BasisTerm.constant(-c * math.log(factor))]
        if self.kind == "exp":
            return [BasisTerm.exp(c, q / factor)]
        if self.kind == "shifted_square":
            return [BasisTerm.shifted_square(c / factor**2, q * factor)]
        return [BasisTerm.constant(c)]

    def to_json(self) -> dict:
        params = {"power": {"exponent": self.param}, "exp": {"rate": self.param},
                  "shifted_square": {"center": self.param}}.get(self.kind, {})
        return {"kind": self.kind, "params": params, "coef": self.coef}

    @classmethod
    def from_json(cls, d: dict) -> "BasisTerm":
        kind = d["kind"]
        params = d.get("params", {})
        key = {"power": "exponent", "exp": "rate", "shifted_square": "center"}.get(kind)
        return cls(kind, float(d["coef"]), float(params[key]) if key else 0.0)


@dataclass(frozen=True)
class Piece:
    terms: tuple[BasisTerm, ...]

    @property
    def value(self) -> TermSum:
        return TermSum([m for t in self.terms for m in t.monomials()])

    def jet(self, r: float) -> tuple[float, float, float]:
        parts = [t.jet(r) for t in self.terms]
        return tuple(math.fsum(p[i] for p in parts) for i in range(3))  # type: ignore[return-value]


class RadialPiecewise:
    """Radial profile ``u(r)`` on ``[0, outer_radius]`` with one piece per interval."""

    def __init__(self, dim: int, breakpoints: Sequence[float], pieces: Sequence[Sequence[BasisTerm]]):
        bps = tuple(float(b) for b in breakpoints)
        if dim < 2:
            raise ProfileError(f"dimension must be at least 2, got {dim}")
        if len(bps) < 2 or bps[0] != 0.0:
            raise ProfileError("breakpoints must start at 0 and contain at least one interval")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise ProfileError("breakpoints must be strictly increasing")
        if len(pieces) != len(bps) - 1:
            raise ProfileError(f"need {len(bps) - 1} pieces, got {len(pieces)}")
        self.dim = int(dim)
        self.breakpoints = bps
        self.pieces = tuple(Piece(tuple(p)) for p in pieces)
        if self.pieces[0].value.singular_at_origin():
            raise ProfileError("the piece covering r=0 contains log or negative-power terms")

    @property
    def outer_radius(self) -> float:
        return self.breakpoints[-1]

    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def piece_index(self, r: float) -> int:
        if not (0.0 < r <= self.outer_radius):
            raise ProfileError(f"radius {r} outside (0, {self.outer_radius}]")
        if r == self.outer_radius:
            return len(self.pieces) - 1
        return int(np.searchsorted(self.breakpoints, r, side="right")) - 1

    def __call__(self, r):
        """Vectorized value; at a breakpoint the right-hand piece is used."""
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(self.breakpoints, r, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(r)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                out[mask] = piece.value(r[mask])
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, RadialPiecewise) and self.dim == other.dim
                and self.breakpoints == other.breakpoints and self.pieces == other.pieces)

    def scaled(self, factor: float) -> "RadialPiecewise":
        """Profile of ``x -> u(x / factor)``."""
        if not factor > 0:
            raise ProfileError("scale factor must be positive")
        if factor == 1.0:
            return self
        pieces = [[s for t in p.terms for s in t.scaled_argument(factor)] for p in self.pieces]
        return RadialPiecewise(self.dim, [b * factor for b in self.breakpoints], pieces)

    def to_json(self) -> dict:
        return {"dim": self.dim, "breakpoints": list(self.breakpoints),
                "pieces": [[t.to_json() for t in p.terms] for p in self.pieces]}

    @classmethod
    def from_json(cls, d: dict) -> "RadialPiecewise":
        return cls(int(d["dim"]), [float(b) for b in d["breakpoints"]],
                   [[BasisTerm.from_json(t) for t in p] for p in d["pieces"]])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, s: str) -> "RadialPiecewise":
        return cls.from_json(json.loads(s))


def _is_breakpoint(f: RadialPiecewise, r: float) -> bool:
    return r in f.breakpoints[1:-1]


def _jet_from_piece(f: RadialPiecewise, i: int, r: float) -> RadialJet:
    u, du, d2u = f.pieces[i].jet(r)
    return RadialJet(r, u, du, d2u, f.dim)


def eval_jet(f: RadialPiecewise, r: float) -> RadialJet:
    if _is_breakpoint(f, r):
        raise ProfileError(f"r={r} is a breakpoint; use eval_jet_left or eval_jet_right")
    return _jet_from_piece(f, f.piece_index(r), r)


def eval_jet_left(f: RadialPiecewise, r: float) -> RadialJet:
    if not (0.0 < r <= f.outer_radius):
        raise ProfileError(f"radius {r} outside (0, {f.outer_radius}]")
    i = int(np.searchsorted(f.breakpoints, r, side="left")) - 1
    return _jet_from_piece(f, i, r)


def eval_jet_right(f: RadialPiecewise, r: float) -> RadialJet:
    if not (0.0 < r < f.outer_radius):
        raise ProfileError(f"radius {r} outside (0, {f.outer_radius})")
    i = int(np.searchsorted(f.breakpoints, r, side="right")) - 1
    return _jet_from_piece(f, i, r)


def radial_eigenvalues(f: RadialPiecewise, r, piece: int | None = None):
    """``(u'/r, u'')`` evaluated from the closed forms; finite at r=0 for smooth centers."""
    r = np.asarray(r, dtype=float)
    if piece is None:
        piece = f.piece_index(float(np.max(r)))
    v = f.pieces[piece].value
    d1 = v.derivative()
    return d1.shift_power(-1.0)(r), d1.derivative()(r)


# ---------------------------------------------------------------------------
# interfaces


@dataclass(frozen=True)
class InterfaceRecord:
    radius: float
    value_gap: float
    derivative_left: float
    derivative_right: float
    kink_class: str
    relative_gap: float = 0.0  # value_gap / (1 + max |u| on either side)


@dataclass(frozen=True)
class InterfaceReport:
    records: tuple[InterfaceRecord, ...]
    tol: float

    @property
    def max_value_gap(self) -> float:
        return max((rec.value_gap for rec in self.records), default=0.0)

    @property
    def max_relative_gap(self) -> float:
        return max((rec.relative_gap for rec in self.records), default=0.0)

    def kinks(self) -> list[InterfaceRecord]:
        return [rec for rec in self.records if rec.kink_class != "C1"]

    def to_json(self) -> list[dict]:
        return [rec.__dict__.copy() for rec in self.records]


def interface_report(f: RadialPiecewise, tol: float = 1e-9) -> InterfaceReport:
    """One-sided values and derivatives at every interior breakpoint.

    Geometry only: a concave or convex kink is recorded, never judged.
    """
    records = []
    for i, b in enumerate(f.breakpoints[1:-1], start=1):
        ul, dl, _ = f.pieces[i - 1].jet(b)
        ur, dr, _ = f.pieces[i].jet(b)
        jump = dr - dl
        if abs(jump) <= tol * max(1.0, abs(dl), abs(dr)):
            cls = "C1"
        elif jump > 0:
            cls = "convex"
        else:
            cls = "concave"
        gap = abs(ul - ur)
        records.append(InterfaceRecord(b, gap, dl, dr, cls, gap / (1.0 + max(abs(ul), abs(ur)))))
    return InterfaceReport(tuple(records), tol)


# ---------------------------------------------------------------------------
# sign analysis


def _sample_radii(lo: float, hi: float, n: int = SIGN_SAMPLES) -> np.ndarray:
    t = np.concatenate(([1e-9], np.linspace(0.0, 1.0, n + 2)[1:-1], [1.0 - 1e-9]))
    r = lo + (hi - lo) * t
    return r[r > 0]


def _two_term_root(ts: TermSum) -> float | None | bool:
    """Explicit root of ``c1 r^p1 + c2 r^p2``; False when the form is not covered."""
    a, b = ts.terms
    if a.rate != b.rate or a.log or b.log:
        return False
    ratio = -b.coef / a.coef
    if ratio <= 0:
        return None
    return ratio ** (1.0 / (a.power - b.power))


def sign_on_interval(ts: TermSum | Callable, lo: float, hi: float) -> int | None:
    """Sign (+1, -1, 0) of a function on the open interval, or None if it changes.

    Term sums with at most two terms use the explicit root; everything else
    is sampled at 64 interior points plus points next to both endpoints.
    """
    if isinstance(ts, TermSum):
        if not ts:
            return 0
        if len(ts) == 1:
            t = ts.terms[0]
            if t.log and lo < 1.0 < hi:
                return None
        elif len(ts) == 2:
            root = _two_term_root(ts)
            if root is not False and root is not None and lo < root < hi:
                rel = abs(root - lo) / hi, abs(hi - root) / hi
                if min(rel) > 1e-12:
                    return None
    r = _sample_radii(lo, hi)
    with np.errstate(all="ignore"):
        vals = np.asarray(ts(r), dtype=float)
    vals = vals[np.isfinite(vals)]
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    nz = vals[np.abs(vals) > 1e-13 * scale] if scale > 0 else vals[:0]
    if nz.size == 0:
        return 0
    if np.all(nz > 0):
        return 1
    if np.all(nz < 0):
        return -1
    return None


def _sign_change_radius(fn: Callable, lo: float, hi: float) -> float | None:
    r = _sample_radii(lo, hi)
    with np.errstate(all="ignore"):
        v = np.asarray(fn(r), dtype=float)
    s = np.sign(v)
    for k in range(len(r) - 1):
        if s[k] != 0 and s[k + 1] != 0 and s[k] != s[k + 1]:
            return brentq(lambda x: float(fn(np.array(x))), r[k], r[k + 1], xtol=1e-15, rtol=1e-15)
        if s[k] == 0 and 0 < k:
            return float(r[k])
    return None


# ---------------------------------------------------------------------------
# coefficient fields


class Ratio:
    """Closed-form quotient ``num / den``."""

    __slots__ = ("num", "den")

    def __init__(self, num: TermSum, den: TermSum):
        self.num = num
        self.den = den

    def __call__(self, r):
        return self.num(r) / self.den(r)

    def scaled_argument(self, factor: float) -> "Ratio":
        return Ratio(self.num.scaled_argument(factor), self.den.scaled_argument(factor))

    def scale(self, c: float) -> "Ratio":
        return Ratio(self.num.scale(c), self.den)


class Pointwise:
    """Coefficient piece known only through an evaluator."""

    __slots__ = ("fn", "splits")

    def __init__(self, fn: Callable, splits: Sequence[float] = ()):
        self.fn = fn
        self.splits = tuple(splits)

    def __call__(self, r):
        return self.fn(np.asarray(r, dtype=float))

    def scaled_argument(self, factor: float) -> "Pointwise":
        fn = self.fn
        return Pointwise(lambda r: fn(np.asarray(r) / factor), [s * factor for s in self.splits])

    def scale(self, c: float) -> "Pointwise":
        fn = self.fn
        return Pointwise(lambda r: c * fn(r), self.splits)


CoefficientPiece = TermSum | Ratio | Pointwise


class CoefficientField:
    """Piecewise coefficient ``a(r)`` on the same breakpoints as its profile."""

    def __init__(self, dim: int, breakpoints: Sequence[float], pieces: Sequence[CoefficientPiece]):
        self.dim = int(dim)
        self.breakpoints = tuple(float(b) for b in breakpoints)
        self.pieces = tuple(pieces)
        if len(self.pieces) != len(self.breakpoints) - 1:
            raise ProfileError("one coefficient piece per interval is required")

    @property
    def outer_radius(self) -> float:
        return self.breakpoints[-1]

    @classmethod
    def from_profile(cls, f: RadialPiecewise) -> "CoefficientField":
        return cls(f.dim, f.breakpoints, [p.value for p in f.pieces])

    @classmethod
    def constant(cls, value: float, dim: int, radius: float) -> "CoefficientField":
        return cls(dim, (0.0, radius), [TermSum([Monomial(float(value))])])

    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def split_points(self, i: int) -> tuple[float, ...]:
        piece = self.pieces[i]
        return piece.splits if isinstance(piece, Pointwise) else ()

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(self.breakpoints, r, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(r)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                out[mask] = piece(r[mask])
        return out

    def is_closed_form(self) -> bool:
        return all(not isinstance(p, Pointwise) for p in self.pieces)

    def scaled(self, factor: float) -> "CoefficientField":
        """Coefficient ``x -> factor**-2 * a(x / factor)``."""
        if factor == 1.0:
            return self
        pieces = [p.scaled_argument(factor).scale(factor**-2.0) for p in self.pieces]
        return CoefficientField(self.dim, [b * factor for b in self.breakpoints], pieces)


def positive_part(a: CoefficientField) -> CoefficientField:
    """``max(a, 0)``; sign-stable pieces keep their closed form."""
    pieces: list[CoefficientPiece] = []
    for i, ((lo, hi), piece) in enumerate(zip(a.intervals(), a.pieces)):
        s = sign_on_interval(piece, lo, hi)
        if s == 1:
            pieces.append(piece)
        elif s in (0, -1):
            pieces.append(TermSum())
        else:
            zeros = _all_sign_changes(piece, lo, hi)
            pieces.append(Pointwise(lambda r, base=piece: np.maximum(base(r), 0.0),
                                    sorted(set(zeros) | set(a.split_points(i)))))
    return CoefficientField(a.dim, a.breakpoints, pieces)


def _all_sign_changes(fn: Callable, lo: float, hi: float, n: int = 4096) -> list[float]:
    r = _sample_radii(lo, hi, n)
    with np.errstate(all="ignore"):
        v = np.asarray(fn(r), dtype=float)
    out = []
    for k in range(len(r) - 1):
        if v[k] == 0.0:
            out.append(float(r[k]))
        elif v[k] * v[k + 1] < 0:
            out.append(brentq(lambda x: float(fn(np.array(x))), r[k], r[k + 1], xtol=1e-15, rtol=1e-15))
    return out


@dataclass
class PieceDiagnostics:
    """Per-piece record of how an induced coefficient was obtained."""

    interval: tuple[float, float]
    tangential_sign: int | None
    radial_sign: int | None
    mode: str  # "zero", "closed", "ratio", "pointwise"
    u_zero: float | None = None


@dataclass
class InducedCoefficient:
    field: CoefficientField
    diagnostics: list[PieceDiagnostics] = field(default_factory=list)


def _pucci_numerator(e: EllipticityPair, dim: int, d1: TermSum, d2: TermSum,
                     s1: int, s2: int, sign: Sign) -> TermSum:
    w1 = e.weight(s1 > 0, sign)
    w2 = e.weight(s2 > 0, sign)
    return d1.scale((dim - 1) * w1) + d2.scale(w2)


def induced_coefficient_report(u: RadialPiecewise, e: EllipticityPair, sign: Sign = "plus") -> InducedCoefficient:
    """``a = -M^sign(D^2 u) / u`` piece by piece, with a diagnostic per piece."""
    _check_sign(sign)
    pieces: list[CoefficientPiece] = []
    diags = []
    for i, ((lo, hi), piece) in enumerate(zip(u.intervals(), u.pieces)):
        val = piece.value
        d1 = val.derivative()
        tangential = d1.shift_power(-1.0)
        radial = d1.derivative()
        s1 = sign_on_interval(tangential, lo, hi)
        s2 = sign_on_interval(radial, lo, hi)
        zero = _sign_change_radius(val, lo, hi) if sign_on_interval(val, lo, hi) is None else None
        if s1 is not None and s2 is not None:
            num = _pucci_numerator(e, u.dim, tangential, radial, s1, s2, sign)
            if not num:
                pieces.append(TermSum())
                diags.append(PieceDiagnostics((lo, hi), s1, s2, "zero", zero))
                continue
            q = num.divide(val)
            if q is not None:
                pieces.append(-q)
                diags.append(PieceDiagnostics((lo, hi), s1, s2, "closed", zero))
                continue
            if zero is not None:
                raise InducedCoefficientError(
                    f"u vanishes at r={zero:.17g} inside piece {i} while M^{sign}(D^2u) does not", zero)
            pieces.append(Ratio(-num, val))
            diags.append(PieceDiagnostics((lo, hi), s1, s2, "ratio", None))
        else:
            if zero is not None:
                raise InducedCoefficientError(
                    f"u vanishes at r={zero:.17g} inside sign-indefinite piece {i}", zero)

            def fn(r, tangential=tangential, radial=radial, val=val):
                return -pucci_radial_array(e, u.dim, tangential(r), radial(r), sign) / val(r)

            pieces.append(Pointwise(fn))
            diags.append(PieceDiagnostics((lo, hi), s1, s2, "pointwise", None))
    return InducedCoefficient(CoefficientField(u.dim, u.breakpoints, pieces), diags)


def induced_coefficient(u: RadialPiecewise, e: EllipticityPair, sign: Sign = "plus") -> CoefficientField:
    return induced_coefficient_report(u, e, sign).field
