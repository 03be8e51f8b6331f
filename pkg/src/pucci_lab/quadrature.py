"""Adaptive composite Gauss-Legendre quadrature on radial intervals."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(15)
MAX_DEPTH = 48


class QuadratureError(RuntimeError):
    def __init__(self, message: str, radius: float):
        super().__init__(message)
        self.radius = radius


def _gl(f: Callable, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    with np.errstate(all="ignore"):
        y = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(y)):
        raise QuadratureError(f"integrand not finite on [{a:.17g}, {b:.17g}]", float(x[~np.isfinite(y)][0]))
    return half * float(np.dot(_WEIGHTS, y))


def geometric_panels(lo: float, hi: float, ratio: float = 2.0) -> list[float]:
    """Panel edges, graded geometrically toward ``lo`` when ``hi/lo`` is large.

    Endpoint blow-ups like ``r^-2`` become smooth on each ``[x, 2x]`` panel.
    """
    if lo <= 0 or hi / lo <= ratio:
        return [lo, hi]
    n = int(math.ceil(math.log(hi / lo) / math.log(ratio)))
    edges = [lo * (hi / lo) ** (j / n) for j in range(n + 1)]
    edges[0], edges[-1] = lo, hi
    return edges


def integrate(f: Callable, edges: Sequence[float], rtol: float = 1e-10, atol: float = 1e-14) -> tuple[float, float]:
    """Integral of ``f`` over ``[edges[0], edges[-1]]`` with panels aligned to ``edges``.

    Returns ``(value, error_estimate)``.  Raises ``QuadratureError`` naming the
    radius where bisection fails to converge.
    """
    panels: list[tuple[float, float]] = []
    for a, b in zip(edges, edges[1:]):
        if b > a:
            g = geometric_panels(a, b)
            panels.extend(zip(g[:-1], g[1:]))
    if not panels:
        return 0.0, 0.0
    coarse = [_gl(f, a, b) for a, b in panels]
    scale = max(abs(math.fsum(coarse)), sum(abs(c) for c in coarse) * 1e-3)
    tol = max(atol, rtol * scale)
    total_len = edges[-1] - edges[0]

    parts: list[float] = []
    errs: list[float] = []
    stack = [(a, b, whole, 0) for (a, b), whole in zip(panels, coarse)]
    while stack:
        a, b, whole, depth = stack.pop()
        m = 0.5 * (a + b)
        left, right = _gl(f, a, m), _gl(f, m, b)
        err = abs(left + right - whole)
        local = max(tol * (b - a) / total_len, 1e-15 * abs(left + right))
        if err <= local or depth >= MAX_DEPTH:
            if depth >= MAX_DEPTH and err > 1e3 * local:
                raise QuadratureError(f"quadrature diverges near r={m:.17g}", m)
            parts.append(left + right)
            errs.append(err)
        else:
            stack.append((a, m, left, depth + 1))
            stack.append((m, b, right, depth + 1))
    return math.fsum(parts), math.fsum(errs)
