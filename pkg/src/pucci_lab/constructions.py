"""The three radial counterexample families, their validity checks, the
P_g / P_l classification of coefficients, and the dilation transform."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.optimize import brentq

from .pucci import EllipticityPair
from .radial import (
    BasisTerm,
    CoefficientField,
    InducedCoefficientError,
    RadialPiecewise,
    TermSum,
    induced_coefficient,
    induced_coefficient_report,
    positive_part,
    sign_on_interval,
)

ALPHA_TWO_TOL = 1e-12


def unit_sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim, ``2 pi^{N/2} / Gamma(N/2)``."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


def shell_volume(dim: int, lo: float, hi: float) -> float:
    return unit_sphere_area(dim) / dim * (hi**dim - lo**dim)


# ---------------------------------------------------------------------------
# parameter types


@dataclass(frozen=True)
class ParamsN3:
    """Family for N >= 3: ``c > d > 0`` with ``c + d = (Lam/lam)(N-1) - 1``."""

    N: int
    e: EllipticityPair
    c: float
    d: float
    epsilon: float

    def __post_init__(self) -> None:
        if self.N < 3:
            raise ValueError(f"this family needs N >= 3, got N={self.N}")
        if not self.e.strict:
            raise ValueError("this family needs lam < Lam")
        if not (self.c > self.d > 0):
            raise ValueError(f"need c > d > 0, got c={self.c}, d={self.d}")
        if abs(self.c + self.d - self.cd_sum) > 1e-12 * max(1.0, self.cd_sum):
            raise ValueError(f"need c + d = {self.cd_sum!r}, got {self.c + self.d!r}")
        if not (0 < self.epsilon < 1):
            raise ValueError(f"need 0 < epsilon < 1, got {self.epsilon}")

    @property
    def cd_sum(self) -> float:
        return (self.e.Lam / self.e.lam) * (self.N - 1) - 1.0

    @classmethod
    def from_d(cls, N: int, e: EllipticityPair, d: float, epsilon: float) -> "ParamsN3":
        s = (e.Lam / e.lam) * (N - 1) - 1.0
        return cls(N, e, s - d, d, epsilon)

    @property
    def k1(self) -> float:
        c, d, eps = self.c, self.d, self.epsilon
        return c * d / 2.0 * (eps ** (-c - 2) - eps ** (-d - 2))

    @property
    def k2(self) -> float:
        c, d, eps = self.c, self.d, self.epsilon
        return c * eps ** (-d) * (1 + d / 2) - d * eps ** (-c) * (1 + c / 2)

    def to_dict(self) -> dict:
        return {"N": self.N, "lam": self.e.lam, "Lam": self.e.Lam, "c": self.c, "d": self.d,
                "epsilon": self.epsilon}


@dataclass(frozen=True)
class ParamsN2:
    """Planar family: ``K > log(alpha^2)`` and ``log(epsilon^2) + K < 0``."""

    e: EllipticityPair
    K: float
    epsilon: float

    def __post_init__(self) -> None:
        if not self.e.strict:
            raise ValueError("this family needs lam < Lam")
        if not self.K > math.log(self.alpha**2):
            raise ValueError(f"need K > log(alpha^2) = {math.log(self.alpha ** 2)!r}, got K={self.K}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 2.0 * math.log(self.epsilon) + self.K < 0:
            raise ValueError("need log(epsilon^2) + K < 0")

    N = 2

    @property
    def alpha(self) -> float:
        return self.e.alpha(2)

    @property
    def beta(self) -> float:
        return self.e.beta(2)

    @property
    def L(self) -> float:
        """``log(eps^2) + K - 1``; always below -1."""
        return 2.0 * math.log(self.epsilon) + self.K - 1.0

    def to_dict(self) -> dict:
        return {"N": 2, "lam": self.e.lam, "Lam": self.e.Lam, "K": self.K, "epsilon": self.epsilon}


@dataclass(frozen=True)
class ParamsSmallNorm:
    """Ball of radius ``2 rbar``, ``rbar = lam (N-1)``, indexed by the integer k."""

    N: int
    e: EllipticityPair
    k: int

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError(f"need N >= 2, got {self.N}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k}")

    @property
    def rbar(self) -> float:
        return self.e.lam * (self.N - 1)

    @property
    def ktilde(self) -> int:
        """Smallest integer k with ``Lam/k < 1`` and ``k/Lam >= 3/2``."""
        k = 1
        while not (self.e.Lam / k < 1 and k / self.e.Lam >= 1.5):
            k += 1
        return k

    def to_dict(self) -> dict:
        return {"N": self.N, "lam": self.e.lam, "Lam": self.e.Lam, "k": self.k}


Params = ParamsN3 | ParamsN2 | ParamsSmallNorm

FAMILIES = {"n3": ParamsN3, "n2": ParamsN2, "small": ParamsSmallNorm}


def family_of(p: Params) -> str:
    return {ParamsN3: "n3", ParamsN2: "n2", ParamsSmallNorm: "small"}[type(p)]


def params_from_dict(family: str, d: dict[str, Any], oracle: bool = False) -> Params:
    """Parameters from a plain mapping (as stored in instance provenance)."""
    e = EllipticityPair(float(d["lam"]), float(d["Lam"]), oracle=oracle)
    if family == "n3":
        if "c" in d:
            return ParamsN3(int(d["N"]), e, float(d["c"]), float(d["d"]), float(d["epsilon"]))
        return ParamsN3.from_d(int(d["N"]), e, float(d["d"]), float(d["epsilon"]))
    if family == "n2":
        eps = float(d["epsilon"]) if "epsilon" in d else math.exp(-float(d["K"]))
        return ParamsN2(e, float(d["K"]), eps)
    if family == "small":
        return ParamsSmallNorm(int(d["N"]), e, int(d["k"]))
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# profiles


def profile_n3(p: ParamsN3) -> RadialPiecewise:
    c, d, eps = p.c, p.d, p.epsilon
    alpha = p.e.alpha(p.N)
    if abs(alpha - 2.0) <= ALPHA_TWO_TOL:
        g = (d - c) / math.log(2.0)
        outer = [BasisTerm.log(g), BasisTerm.constant(-g * math.log(2.0))]
    elif alpha < 2:
        q = 2.0 - alpha
        A = (c - d) / (2.0**q - 1.0)
        outer = [BasisTerm.constant(A * 2.0**q), BasisTerm.power(-A, q)]
    else:
        q = 2.0 - alpha
        B = (c - d) / (1.0 - 2.0**q)
        outer = [BasisTerm.power(B, q), BasisTerm.constant(-B * 2.0**q)]
    pieces = [
        [BasisTerm.power(p.k1, 2.0), BasisTerm.constant(p.k2)],
        [BasisTerm.power(c, -d), BasisTerm.power(-d, -c)],
        outer,
    ]
    return RadialPiecewise(p.N, [0.0, eps, 1.0, 2.0], pieces)


def profile_n2(p: ParamsN2) -> RadialPiecewise:
    eps, K, a, b = p.epsilon, p.K, p.alpha, p.beta
    log_eps2 = 2.0 * math.log(eps)
    log_a2 = 2.0 * math.log(a)
    den = eps ** (2.0 - b) - a ** (b - 2.0)
    middle = [
        BasisTerm.power((log_eps2 + log_a2) / den, 2.0 - b),
        BasisTerm.constant((eps ** (2.0 - b) * (K - log_a2) - a ** (b - 2.0) * (K + log_eps2)) / den),
    ]
    top = 1.0 + K - log_a2
    third = [BasisTerm.shifted_square(-1.0 / (1.0 - 1.0 / a) ** 2, 1.0), BasisTerm.constant(top)]
    q = 2.0 - a
    fourth = [BasisTerm.constant(top * 2.0**q / (2.0**q - 1.0)), BasisTerm.power(-top / (2.0**q - 1.0), q)]
    pieces = [
        [BasisTerm.power(eps**-2.0, 2.0), BasisTerm.constant(p.L)],
        middle,
        third,
        fourth,
    ]
    return RadialPiecewise(2, [0.0, eps, 1.0 / a, 1.0, 2.0], pieces)


def profile_small(p: ParamsSmallNorm) -> RadialPiecewise:
    rb, k = p.rbar, p.k
    alpha = p.e.alpha(p.N)
    top = math.exp(-3.0 * rb / (2.0 * k))
    if abs(alpha - 2.0) <= ALPHA_TWO_TOL:
        g = top / math.log(4.0 / 3.0)
        outer = [BasisTerm.constant(g * math.log(2.0 * rb)), BasisTerm.log(-g)]
    else:
        q = 2.0 - alpha
        den = 2.0**q - 1.5**q
        outer = [BasisTerm.constant(top * 2.0**q / den), BasisTerm.power(-top / den * rb**-q, q)]
    pieces = [
        [BasisTerm.constant(math.exp(-rb / (k * (k + 1))))],
        [BasisTerm.exp(1.0, -1.0 / k)],
        outer,
    ]
    return RadialPiecewise(p.N, [0.0, rb / (k + 1), 1.5 * rb, 2.0 * rb], pieces)


def build_profile(p: Params) -> RadialPiecewise:
    return {ParamsN3: profile_n3, ParamsN2: profile_n2, ParamsSmallNorm: profile_small}[type(p)](p)


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class ConstructionInstance:
    """A profile ``u`` vanishing on the boundary of ``B(0, domain_radius)`` and
    the coefficient ``a`` with ``M^+(D^2 u) + a u = 0`` on every piece."""

    family: str
    params: Params
    u: RadialPiecewise
    a: CoefficientField
    domain_radius: float
    scale: float = 1.0

    @property
    def dim(self) -> int:
        return self.u.dim

    @property
    def e(self) -> EllipticityPair:
        return self.params.e

    def provenance(self) -> dict:
        return {"family": self.family, "params": self.params.to_dict(), "scale": self.scale}

    def to_json(self) -> dict:
        return {**self.u.to_json(), "provenance": self.provenance()}


def _build(p: Params) -> ConstructionInstance:
    u = build_profile(p)
    a = induced_coefficient(u, p.e, "plus")
    return ConstructionInstance(family_of(p), p, u, a, u.outer_radius)


def build_n3(p: ParamsN3) -> ConstructionInstance:
    """Breakpoints ``eps, 1, 2`` on ``B(0, 2)``.

    Raises ``InducedCoefficientError`` in the parameter window where ``u``
    has an interior zero on the quadratic core.
    """
    return _build(p)


def build_n2(p: ParamsN2) -> ConstructionInstance:
    return _build(p)


def build_small_norm(p: ParamsSmallNorm) -> ConstructionInstance:
    return _build(p)


def build(p: Params) -> ConstructionInstance:
    return _build(p)


def instance_from_json(d: dict) -> ConstructionInstance:
    """Rebuild an instance from its profile JSON plus provenance block.

    The coefficient is re-derived from the stored profile, so a round trip
    reproduces the residual report exactly.
    """
    prov = d["provenance"]
    p = params_from_dict(prov["family"], prov["params"])
    u = RadialPiecewise.from_json(d)
    a = induced_coefficient(u, p.e, "plus")
    return ConstructionInstance(prov["family"], p, u, a, u.outer_radius, float(prov.get("scale", 1.0)))


def scale_instance(inst: ConstructionInstance, factor: float) -> ConstructionInstance:
    """Dilate: ``u_r(x) = u(x/r)`` and ``a_r(x) = r^-2 a(x/r)`` on ``B(0, r R)``."""
    if not factor > 0:
        raise ValueError("scale factor must be positive")
    if factor == 1.0:
        return inst
    return replace(inst, u=inst.u.scaled(factor), a=inst.a.scaled(factor),
                   domain_radius=inst.domain_radius * factor, scale=inst.scale * factor)


# ---------------------------------------------------------------------------
# validity


@dataclass
class ValidityReport:
    family: str
    fatal: bool
    checks: dict[str, Any] = field(default_factory=dict)
    findings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"family": self.family, "fatal": self.fatal, "checks": self.checks, "findings": self.findings}


def _region_signs(u: RadialPiecewise) -> list[int | None]:
    return [sign_on_interval(piece.value, lo, hi) for (lo, hi), piece in zip(u.intervals(), u.pieces)]


def _sign_patterns(u: RadialPiecewise, e: EllipticityPair) -> tuple[list, bool, str | None]:
    try:
        rep = induced_coefficient_report(u, e, "plus")
    except InducedCoefficientError as err:
        return [], True, str(err)
    patterns = [{"interval": list(d.interval), "d2u": d.radial_sign, "du_over_r": d.tangential_sign,
                 "mode": d.mode} for d in rep.diagnostics]
    return patterns, False, None


def _validate_n3(p: ParamsN3) -> ValidityReport:
    c, d, eps = p.c, p.d, p.epsilon
    u = profile_n3(p)
    k1, k2 = p.k1, p.k2
    reference_bound = (c / d) ** (1.0 / (d - c))
    k2_threshold = (c * (1 + d / 2) / (d * (1 + c / 2))) ** (1.0 / (d - c))
    middle_zero = (d / c) ** (1.0 / (c - d))
    signs = _region_signs(u)
    patterns, fatal, err = _sign_patterns(u, p.e)
    rep = ValidityReport("n3", fatal)
    inner_a = None if fatal else float(induced_coefficient(u, p.e)(np.array([0.5 * eps]))[0])
    rep.checks.update({
        "k1": k1, "k2": k2, "k1_positive": k1 > 0, "k2_nonnegative": k2 >= 0,
        "reference_eps_bound": reference_bound, "reference_eps_bound_holds": eps < reference_bound,
        "reference_k2_threshold": k2_threshold,
        "reference_k2_claim_holds": (k2 >= 0) if eps <= k2_threshold else None,
        "middle_u_zero_radius": middle_zero,
        "u_sign_by_region": signs,
        "sign_patterns": patterns,
        "inner_coefficient_sample": inner_a,
        "reference_inner_positive_part_zero": (inner_a is not None and inner_a <= 0),
        "alpha": p.e.alpha(p.N),
    })
    if err:
        rep.findings.append(f"fatal: {err}")
    if eps <= k2_threshold and k2 < 0:
        rep.findings.append(
            f"k2 = {k2:.6g} < 0 although epsilon <= reference threshold {k2_threshold:.6g}; "
            "direct evaluation gives k2 >= 0 only for epsilon >= threshold")
    if eps >= reference_bound and k2 > 0:
        rep.findings.append(
            f"bound-direction anomaly: reference epsilon bound {reference_bound:.6g} violated yet k2 = {k2:.6g} > 0")
    if eps < middle_zero:
        rep.findings.append(
            f"u changes sign at r = {middle_zero:.6g} inside (epsilon, 1); the quotient stays exact there")
    if inner_a is not None and inner_a > 0:
        rep.findings.append("induced coefficient is positive on |x| <= epsilon, so the reference a+ = 0 there fails")
    return rep


def reference_n2_third_row(p: ParamsN2, r):
    """The third row of the reference planar coefficient, read literally with
    ``(1 lam/Lam)`` as ``1 + lam/Lam`` and the ``(1 + 1/alpha)^2`` denominator."""
    lam, Lam, a, K = p.e.lam, p.e.Lam, p.alpha, p.K
    r = np.asarray(r, dtype=float)
    return (2 * Lam * ((1 + lam / Lam) - 1 / r)
            / ((1 - 1 / a) ** 2 * (-(1 - r) ** 2 / (1 + 1 / a) ** 2 + K + 1 - math.log(a**2))))


def _validate_n2(p: ParamsN2) -> ValidityReport:
    u = profile_n2(p)
    patterns, fatal, err = _sign_patterns(u, p.e)
    rep = ValidityReport("n2", fatal)
    signs = _region_signs(u)
    rep.checks.update({"alpha": p.alpha, "beta": p.beta, "L": p.L, "u_sign_by_region": signs,
                       "sign_patterns": patterns})
    if err:
        rep.findings.append(f"fatal: {err}")
        return rep
    a = induced_coefficient(u, p.e)
    lo, hi = 1.0 / p.alpha, 1.0
    r = np.linspace(lo, hi, 66)[1:-1]
    induced = a(r)
    reference = reference_n2_third_row(p, r)
    mismatch = float(np.max(np.abs(reference - induced) / np.maximum(np.abs(induced), 1e-300)))
    nonneg = all(sign_on_interval(piece, l, h) in (0, 1) for (l, h), piece in zip(a.intervals(), a.pieces))
    rep.checks.update({"coefficient_nonnegative": nonneg,
                       "reference_third_row_max_rel_mismatch": mismatch})
    if mismatch > 1e-9:
        rep.findings.append(
            f"reference coefficient on 1/alpha < r < 1 differs from the induced one by up to {mismatch:.3g} "
            "(relative); induced value 2 Lam (alpha - 1/r) / ((1 - 1/alpha)^2 u) is used")
    rep.findings.append(
        f"reference zero row is given for eps < r < 1/2; the harmonic piece actually ends at 1/alpha = {1 / p.alpha:.6g}")
    if not nonneg:
        rep.findings.append("induced coefficient takes negative values")
    return rep


def _validate_small(p: ParamsSmallNorm) -> ValidityReport:
    u = profile_small(p)
    patterns, fatal, err = _sign_patterns(u, p.e)
    rep = ValidityReport("small", fatal)
    Lam, k = p.e.Lam, p.k
    rep.checks.update({
        "rbar": p.rbar, "ktilde": p.ktilde,
        "cond_i_Lam_over_k_lt_1": Lam / k < 1, "cond_ii_k_over_Lam_ge_3_2": k / Lam >= 1.5,
        "alpha": p.e.alpha(p.N), "u_sign_by_region": _region_signs(u), "sign_patterns": patterns,
    })
    if err:
        rep.findings.append(f"fatal: {err}")
        return rep
    a = induced_coefficient(u, p.e)
    lo, hi = p.rbar / (k + 1), 1.5 * p.rbar
    r = np.linspace(lo, hi, 66)[1:-1]
    reference = p.rbar / (k * r) - Lam / k**2
    mismatch = float(np.max(np.abs(a(r) - reference)))
    ap = positive_part(a)
    rep.checks["reference_coefficient_max_abs_mismatch"] = mismatch
    rep.checks["positive_part_equals_coefficient"] = bool(np.all(ap(r) == a(r)))
    if k < p.ktilde:
        rep.findings.append(f"k = {k} < ktilde = {p.ktilde}: a+ may differ from a on the middle annulus")
    return rep


def validate_params(p: Params) -> ValidityReport:
    if isinstance(p, ParamsN3):
        return _validate_n3(p)
    if isinstance(p, ParamsN2):
        return _validate_n2(p)
    return _validate_small(p)


# ---------------------------------------------------------------------------
# classification


@dataclass
class ClassificationReport:
    cls: str
    g1_measure: float
    l1_measure: float
    domain_measure: float
    g1_intervals: list[tuple[float, float]]
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"class": self.cls, "g1_measure": self.g1_measure, "l1_measure": self.l1_measure,
                "domain_measure": self.domain_measure,
                "g1_intervals": [list(iv) for iv in self.g1_intervals], "warnings": self.warnings}


def _closed_level_crossing(piece: TermSum, level: float, lo: float, hi: float) -> list[float] | None:
    """Solve ``c r^p + b = level`` exactly when the piece has that form."""
    consts = [t for t in piece.terms if t.power == 0 and t.rate == 0 and t.log == 0]
    others = [t for t in piece.terms if t not in consts]
    if len(others) > 1 or any(t.rate or t.log for t in others):
        return None
    b = consts[0].coef if consts else 0.0
    if not others:
        return []
    c, q = others[0].coef, others[0].power
    ratio = (level - b) / c
    if ratio <= 0:
        return []
    r = ratio ** (1.0 / q)
    return [r] if lo < r < hi else []


def _level_crossings(piece, level: float, lo: float, hi: float, notes: list[str]) -> list[float]:
    if isinstance(piece, TermSum):
        closed = _closed_level_crossing(piece, level, lo, hi)
        if closed is not None:
            return closed

    def g(r):
        return piece(np.asarray(r, dtype=float)) - level

    start = lo if lo > 0 else hi * 1e-12
    r = np.linspace(start, hi, 258)[1:-1]
    v = g(r)
    dv = np.diff(v)
    monotone = np.all(dv >= 0) or np.all(dv <= 0)
    if not monotone:
        msg = f"non-monotone coefficient on ({lo:.6g}, {hi:.6g}); level set located from 1e4 samples"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        notes.append(msg)
        r = np.linspace(start, hi, 10002)[1:-1]
        v = g(r)
    out = []
    for i in range(len(r) - 1):
        if v[i] == 0:
            out.append(float(r[i]))
        elif v[i] * v[i + 1] < 0:
            out.append(brentq(lambda x: float(g(x)), r[i], r[i + 1], xtol=1e-12 * hi, rtol=1e-15))
    return out


def classify_coefficient(a: CoefficientField, tol: float = 1e-9) -> ClassificationReport:
    """Measures of ``{a+ > 1}`` and ``{0 <= a+ <= 1}`` on the ball of radius ``a.outer_radius``."""
    ap = positive_part(a)
    dim = ap.dim
    notes: list[str] = []
    g1_iv: list[tuple[float, float]] = []
    l1_iv: list[tuple[float, float]] = []
    for (lo, hi), piece in zip(ap.intervals(), ap.pieces):
        cuts = [lo] + sorted(_level_crossings(piece, 1.0, lo, hi, notes)) + [hi]
        for x, y in zip(cuts, cuts[1:]):
            if y <= x:
                continue
            mid = 0.5 * (x + y)
            (g1_iv if float(piece(np.array(mid))) > 1.0 else l1_iv).append((x, y))
    g1 = math.fsum(shell_volume(dim, x, y) for x, y in g1_iv)
    l1 = math.fsum(shell_volume(dim, x, y) for x, y in l1_iv)
    total = shell_volume(dim, 0.0, ap.outer_radius)
    if l1 <= tol * total:
        cls = "P_g"
    elif g1 <= tol * total:
        cls = "P_l"
    else:
        cls = "neither"
    return ClassificationReport(cls, g1, l1, total, _merge(g1_iv), notes)


def _merge(ivs: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for x, y in sorted(ivs):
        if out and x <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], y))
        else:
            out.append((x, y))
    return out


def reference_g1_measure(p: ParamsSmallNorm) -> float:
    """The reference ``|G_1|`` display, with omega(N) read as the sphere area."""
    k, Lam, N = p.k, p.e.Lam, p.N
    return p.rbar**N * unit_sphere_area(N) * ((k + Lam / k) ** -N - (k + 1.0) ** -N)


def g1_annulus(p: ParamsSmallNorm) -> tuple[float, float]:
    """Symbolic level-set annulus ``rbar/(k+1) <= r < rbar/(k + Lam/k)``."""
    return p.rbar / (p.k + 1), p.rbar / (p.k + p.e.Lam / p.k)
