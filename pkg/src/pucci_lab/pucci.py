"""Pucci extremal operators on symmetric matrices and radial jets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

Sign = Literal["plus", "minus"]

MAX_DIM = 16
JACOBI_TOL = 1e-13


def _check_sign(sign: str) -> None:
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


@dataclass(frozen=True)
class EllipticityPair:
    """Ellipticity constants ``0 < lam <= Lam``.

    ``lam == Lam`` collapses both operators to ``lam * trace`` and is only
    accepted with ``oracle=True``; it is used to cross-check against the
    Laplacian.
    """

    lam: float
    Lam: float
    oracle: bool = False

    def __post_init__(self) -> None:
        if not (self.lam > 0 and self.Lam > 0):
            raise ValueError(f"ellipticity constants must be positive, got {self.lam}, {self.Lam}")
        if self.lam > self.Lam:
            raise ValueError(f"need lam <= Lam, got lam={self.lam} > Lam={self.Lam}")
        if self.lam == self.Lam and not self.oracle:
            raise ValueError("lam == Lam is only admitted with oracle=True")

    @property
    def strict(self) -> bool:
        return self.lam < self.Lam

    def alpha(self, dim: int) -> float:
        return (self.lam / self.Lam) * (dim - 1) + 1.0

    def beta(self, dim: int) -> float:
        return (self.Lam / self.lam) * (dim - 1) + 1.0

    def weight(self, positive: bool, sign: Sign) -> float:
        """Weight applied to a positive (or negative) eigenvalue by M^sign."""
        if sign == "plus":
            return self.Lam if positive else self.lam
        return self.lam if positive else self.Lam


class SymMatrix:
    """Real symmetric matrix of dimension 2..16, stored read-only.

    Inputs that are symmetric up to ``1e-12 * (1 + max|entry|)`` are
    symmetrized by averaging; anything further off is rejected.
    """

    __slots__ = ("entries",)

    def __init__(self, entries) -> None:
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        n = a.shape[0]
        if n < 2:
            raise ValueError(f"dimension must be at least 2, got {n}")
        if n > MAX_DIM:
            raise ValueError(f"dimension capped at {MAX_DIM}, got {n}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")
        asym = np.max(np.abs(a - a.T))
        if asym > 1e-12 * (1.0 + np.max(np.abs(a))):
            raise ValueError(f"matrix is not symmetric (max |a_ij - a_ji| = {asym:.3e})")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self.entries = a

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __neg__(self) -> "SymMatrix":
        return SymMatrix(-self.entries)

    def __repr__(self) -> str:
        return f"SymMatrix({self.entries.tolist()!r})"


@dataclass(frozen=True)
class Spectrum:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValueError("spectrum must be nonempty")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("spectrum values must be sorted nondecreasing")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Spectrum":
        return cls(tuple(sorted(float(v) for v in values)))

    def __len__(self) -> int:
        return len(self.values)

    def scaled(self, t: float) -> "Spectrum":
        return Spectrum.from_values([t * v for v in self.values])


@dataclass(frozen=True)
class RadialJet:
    """Second-order jet ``(r, u, u', u'')`` of a radial profile in dimension ``dim``."""

    r: float
    u: float
    du: float
    d2u: float
    dim: int

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError(f"radial jets need r > 0, got r={self.r}")
        if self.dim < 2:
            raise ValueError(f"dimension must be at least 2, got {self.dim}")

    def __neg__(self) -> "RadialJet":
        return RadialJet(self.r, -self.u, -self.du, -self.d2u, self.dim)


def _jacobi_eigenvalues(a: list[list[float]], tol: float) -> list[float]:
    # cyclic-by-row Jacobi; a is modified in place
    n = len(a)
    for _ in range(100):
        off = 0.0
        for i in range(n - 1):
            row = a[i]
            for j in range(i + 1, n):
                off += row[j] * row[j]
        if math.sqrt(off) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                app = a[p][p]
                aqq = a[q][q]
                theta = (aqq - app) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p][p] = app - t * apq
                a[q][q] = aqq + t * apq
                a[p][q] = a[q][p] = 0.0
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = a[k][p]
                    akq = a[k][q]
                    nkp = akp - s * (akq + tau * akp)
                    nkq = akq + s * (akp - tau * akq)
                    a[k][p] = a[p][k] = nkp
                    a[k][q] = a[q][k] = nkq
    else:
        raise RuntimeError("Jacobi iteration did not converge in 100 sweeps")
    return [a[i][i] for i in range(n)]


def sym_eigenvalues(m: SymMatrix | np.ndarray) -> Spectrum:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted."""
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    a = m.entries
    scale = max(1.0, float(np.sqrt(np.sum(a * a))))
    vals = _jacobi_eigenvalues(a.tolist(), JACOBI_TOL * scale)
    return Spectrum.from_values(vals)


def pucci(e: EllipticityPair, s: Spectrum | Sequence[float], sign: Sign) -> float:
    """M^+ or M^- evaluated on a list of eigenvalues; zeros contribute nothing."""
    _check_sign(sign)
    values = s.values if isinstance(s, Spectrum) else tuple(s)
    if len(values) == 0:
        raise ValueError("spectrum must be nonempty")
    pos = math.fsum(v for v in values if v > 0)
    neg = math.fsum(v for v in values if v < 0)
    if sign == "plus":
        return e.Lam * pos + e.lam * neg
    return e.lam * pos + e.Lam * neg


def radial_hessian_spectrum(j: RadialJet) -> Spectrum:
    """Hessian eigenvalues of ``x -> u(|x|)``: ``u'/r`` (N-1 times) and ``u''``."""
    tangential = j.du / j.r
    return Spectrum.from_values([tangential] * (j.dim - 1) + [j.d2u])


def hessian_from_jet(j: RadialJet, direction) -> SymMatrix:
    """Full Hessian ``(u'/r)(I - x x^T) + u'' x x^T`` at the point ``r * direction``."""
    x = np.asarray(direction, dtype=float)
    if x.shape != (j.dim,):
        raise ValueError(f"direction must have length {j.dim}, got shape {x.shape}")
    if abs(float(np.linalg.norm(x)) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    proj = np.outer(x, x)
    h = (j.du / j.r) * (np.eye(j.dim) - proj) + j.d2u * proj
    return SymMatrix(h)


def pucci_radial(e: EllipticityPair, j: RadialJet, sign: Sign) -> float:
    return pucci(e, radial_hessian_spectrum(j), sign)


def pucci_radial_array(e: EllipticityPair, dim: int, tangential, d2u, sign: Sign) -> np.ndarray:
    """Vectorized M^sign from the radial eigenvalues ``u'/r`` and ``u''``."""
    _check_sign(sign)
    t = np.asarray(tangential)
    d = np.asarray(d2u)
    hi, lo = (e.Lam, e.lam) if sign == "plus" else (e.lam, e.Lam)
    wt = np.where(t > 0, hi, lo)
    wd = np.where(d > 0, hi, lo)
    return (dim - 1) * wt * t + wd * d
