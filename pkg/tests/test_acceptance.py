"""Acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible even with
captured output) and then asserts.  Run directly with
``python tests/test_acceptance.py`` for the summary lines alone.
"""

import json
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
from scipy.special import jn_zeros

from pucci_lab.constructions import (
    ParamsN2,
    ParamsN3,
    ParamsSmallNorm,
    build,
    classify_coefficient,
    g1_annulus,
    reference_g1_measure,
    scale_instance,
    shell_volume,
)
from pucci_lab.eigen import principal_eigenvalue
from pucci_lab.norms import (
    BoundConfig,
    DomainBall,
    closed_norm_n3,
    holder_gap,
    lp_norm,
    lyapunov_bounds,
    n2_l1_bound,
    power_transform_check,
    residual_verify,
    sweep,
)
from pucci_lab.pucci import (
    EllipticityPair,
    RadialJet,
    SymMatrix,
    hessian_from_jet,
    pucci,
    radial_hessian_spectrum,
    sym_eigenvalues,
)
from pucci_lab.radial import BasisTerm, RadialPiecewise, eval_jet, positive_part

SEED = 20240611
E = EllipticityPair(1.0, 2.0)
LAPLACE = EllipticityPair(1.0, 1.0, oracle=True)

# regression baselines for lam=1, Lam=2 on the unit ball, recorded from this solver
MU1_BASELINE = {2: 5.73311488959007}


def report(capsys, number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def family_grids():
    n3 = [ParamsN3.from_d(3, EllipticityPair(1.0, Lam), frac * (2 * Lam - 1), eps)
          for Lam in (1.5, 2.0, 3.0) for frac in (0.1, 0.25, 0.4) for eps in (0.01, 0.05, 0.1)]
    n2 = [ParamsN2(EllipticityPair(1.0, Lam), K, eps)
          for Lam in (1.5, 2.0, 3.0) for K in (2.0, 3.0, 5.0) for eps in (1e-3, 1e-2, 0.05)]
    small = [ParamsSmallNorm(N, EllipticityPair(1.0, Lam), k)
             for N in (2, 3, 4) for Lam in (1.5, 2.0, 3.0) for k in (1, 10, 100)]
    return {"n3": n3, "n2": n2, "small": small}


REPRESENTATIVE = {
    "n3": ParamsN3.from_d(3, E, 1.0, 0.25),
    "n2": ParamsN2(E, 10.0, 1e-3),
    "small": ParamsSmallNorm(3, E, 10),
}


# ---------------------------------------------------------------------------


def check_operator(capsys=None):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    trace_exact = True
    for n in range(2, 7):
        for _ in range(1000):
            lam = rng.uniform(0.1, 1.0)
            e = EllipticityPair(lam, lam + rng.uniform(0.1, 3.0))
            b = rng.standard_normal((n, n))
            m = SymMatrix(0.5 * (b + b.T))
            c = rng.standard_normal((n, n))
            psd = SymMatrix(c @ c.T)
            t = rng.uniform(0.1, 10.0)
            s = sym_eigenvalues(m)
            s_neg = sym_eigenvalues(-m)
            s_sum = sym_eigenvalues(SymMatrix(m.entries + psd.entries))
            plus, minus = pucci(e, s, "plus"), pucci(e, s, "minus")
            worst = max(worst,
                        abs(minus + pucci(e, s_neg, "plus")),
                        max(0.0, minus - plus),
                        abs(pucci(e, s.scaled(t), "plus") - t * plus) / t,
                        max(0.0, plus - pucci(e, s_sum, "plus")),
                        max(0.0, minus - pucci(e, s_sum, "minus")))
            if n == 2 or _ % 10 == 0:
                tr = pucci(LAPLACE, s, "plus")
                trace_exact &= abs(tr - math.fsum(np.diag(m.entries))) <= 1e-12
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and trace_exact and elapsed < 10.0
    return report(capsys, 1, ok, f"operator identities on 5000 matrices, worst violation {worst:.2e}, "
                                 f"trace collapse {trace_exact}, {elapsed:.1f}s")


def _fd_hessian(f, x, h=1e-4):
    n = len(x)
    out = np.empty((n, n))
    eye = np.eye(n) * h
    for i in range(n):
        for j in range(n):
            out[i, j] = (f(x + eye[i] + eye[j]) - f(x + eye[i] - eye[j])
                         - f(x - eye[i] + eye[j]) + f(x - eye[i] - eye[j])) / (4 * h * h)
    return 0.5 * (out + out.T)


def check_hessian(capsys=None):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        j = RadialJet(rng.uniform(0.01, 5.0), rng.standard_normal(), 3 * rng.standard_normal(),
                      3 * rng.standard_normal(), n)
        got = sym_eigenvalues(hessian_from_jet(j, x)).values
        worst = max(worst, float(np.max(np.abs(np.array(got) - radial_hessian_spectrum(j).values))))
    profiles = [
        [BasisTerm.constant(1.0), BasisTerm.power(-0.5, 2.0), BasisTerm.power(0.25, 4.0)],
        [BasisTerm.exp(1.0, -1.5), BasisTerm.power(0.3, 3.0)],
        [BasisTerm.shifted_square(0.8, 2.0), BasisTerm.exp(-0.2, 0.7)],
    ]
    fd_worst = 0.0
    for terms in profiles:
        f = RadialPiecewise(3, [0.0, 3.0], [terms])
        for x in (np.array([0.4, -0.7, 0.5]), np.array([1.1, 0.2, -0.3])):
            h = _fd_hessian(lambda y: float(f(np.linalg.norm(y))), x)
            spectrum = radial_hessian_spectrum(eval_jet(f, float(np.linalg.norm(x)))).values
            fd_worst = max(fd_worst, float(np.max(np.abs(np.array(sym_eigenvalues(h).values) - spectrum))))
    ok = worst <= 1e-10 and fd_worst <= 1e-5
    return report(capsys, 2, ok, f"Hessian spectra on 1000 jets, worst {worst:.2e}; "
                                 f"finite-difference Hessians worst {fd_worst:.2e}")


def check_residuals(capsys=None):
    t0 = time.perf_counter()
    worst = {"residual": 0.0, "gap": 0.0, "boundary": 0.0}
    count = 0
    for fam, grid in family_grids().items():
        for p in grid:
            inst = build(p)
            plus = residual_verify(inst, samples=200)
            minus = residual_verify(inst, samples=200, sign="minus", negate=True)
            worst["residual"] = max(worst["residual"], plus.max_residual, minus.max_residual)
            worst["gap"] = max(worst["gap"], plus.interfaces.max_relative_gap)
            worst["boundary"] = max(worst["boundary"], abs(plus.boundary_value))
            count += 1
    elapsed = time.perf_counter() - t0
    ok = (worst["residual"] <= 1e-9 and worst["gap"] <= 1e-10 and worst["boundary"] <= 1e-12
          and elapsed < 30.0)
    return report(capsys, 3, ok, f"{count} instances, residual {worst['residual']:.2e} (plus and negated minus), "
                                 f"C0 gap {worst['gap']:.2e} relative, boundary {worst['boundary']:.1e}, "
                                 f"{elapsed:.1f}s")


def check_annulus_norm(capsys=None):
    worst = 0.0
    for c, d in ((2.0, 1.0), (2.9, 0.1)):
        for eps in (0.25, 1e-3, 1e-6):
            p = ParamsN3(3, E, c, d, eps)
            q = lp_norm(positive_part(build(p).a), 1, region=(eps, 1.0))
            cf = closed_norm_n3(p, 1)
            worst = max(worst, abs(q - cf) / cf)
    ref = closed_norm_n3(ParamsN3(3, E, 2.0, 1.0, 0.25), 1)
    ok = worst <= 1e-8 and abs(ref - 6 * math.pi) <= 1e-12 * 6 * math.pi
    return report(capsys, 4, ok, f"quadrature vs closed form worst rel {worst:.2e}; reference {ref:.10f} vs 6*pi")


def check_n3_limit(capsys=None):
    t = sweep("n3", [0.5, 0.1, 0.01], 1, {"N": 3, "lam": 1, "Lam": 2, "epsilon": 1e-6})
    final = t.rows[-1].closed_form
    ok = bool(t.strictly_decreasing()) and final <= 0.376
    return report(capsys, 5, ok, f"closed norms {[round(v, 6) for v in t.column('closed_form')]}, "
                                 f"strictly decreasing {t.strictly_decreasing()}")


def check_n2_limit(capsys=None):
    t = sweep("n2", [10, 100, 300], 1, {"lam": 1, "Lam": 2})
    final = t.rows[-1].closed_form
    q = ParamsN2(E, 10.0, 1e-3)
    quad = lp_norm(build(q).a, 1)
    ok = bool(t.strictly_decreasing()) and 0.19 <= final <= 0.25 and quad <= 9.96 and quad <= n2_l1_bound(q) + 1e-6
    return report(capsys, 6, ok, f"bounds {[round(v, 5) for v in t.column('closed_form')]}, "
                                 f"||a||_1 at K=10, eps=1e-3: {quad:.6f} <= {n2_l1_bound(q):.6f}")


def check_small_decay(capsys=None):
    t0 = time.perf_counter()
    ks = [10, 31, 100, 316, 1000]
    slopes, excess = {}, -math.inf
    for p in (1, 2):
        t = sweep("small", ks, p, {"N": 3, "lam": 1, "Lam": 2})
        slopes[p] = t.loglog_slope("quadrature")
        excess = max(excess, max(r.quadrature - r.closed_form for r in t.rows))
    elapsed = time.perf_counter() - t0
    ok = all(-1.05 <= s <= -0.95 for s in slopes.values()) and excess <= 1e-9 and elapsed < 20.0
    return report(capsys, 7, ok, f"log-log slopes of ||a+||_p: p=1 {slopes[1]:.4f}, p=2 {slopes[2]:.4f}; "
                                 f"max(quadrature - bound) {excess:.3e}; {elapsed:.1f}s")


def check_classification(capsys=None):
    p = ParamsSmallNorm(3, E, 10)
    rep = classify_coefficient(build(p).a)
    lo, hi = g1_annulus(p)
    exact = (p.rbar / (p.k + 1), p.rbar / (p.k + p.e.Lam / p.k))
    endpoint_err = max(abs(rep.g1_intervals[0][0] - exact[0]), abs(rep.g1_intervals[0][1] - exact[1]),
                       abs(lo - exact[0]), abs(hi - exact[1]))
    total = shell_volume(3, 0.0, 2 * p.rbar)
    measure_err = abs(rep.g1_measure + rep.l1_measure - total) / total
    ratio = rep.g1_measure / reference_g1_measure(p)
    ok = len(rep.g1_intervals) == 1 and endpoint_err <= 1e-12 and measure_err <= 1e-8
    return report(capsys, 8, ok, f"G1 = [{rep.g1_intervals[0][0]:.12f}, {rep.g1_intervals[0][1]:.12f}], "
                                 f"endpoint err {endpoint_err:.1e}, measure err {measure_err:.1e}; "
                                 f"computed/reference |G1| = {ratio:.6f} (reported, N-fold discrepancy)")


def check_scaling(capsys=None):
    worst = 0.0
    for fam, params in REPRESENTATIVE.items():
        inst = build(params)
        N = inst.dim
        for p in sorted({1, 2, N}):
            base = lp_norm(positive_part(inst.a), p)
            for r in (0.5, 2.0):
                scaled = lp_norm(positive_part(scale_instance(inst, r).a), p)
                expected = r ** (N / p - 2)
                worst = max(worst, abs(scaled / base - expected) / expected)
    return report(capsys, 9, worst <= 1e-9, f"scaling law worst rel deviation {worst:.2e} over 3 families")


def check_bound_machinery(capsys=None):
    transform_worst, holder_worst = 0.0, -math.inf
    pointwise = True
    for fam, params in REPRESENTATIVE.items():
        a = build(params).a
        N = a.dim
        for p in range(1, N):
            rep = power_transform_check(a, p)
            transform_worst = max(transform_worst, rep.rel_err)
            pointwise &= rep.pointwise_ok
        for p in (N + 1, 2 * N):
            lhs, rhs = holder_gap(a, p)
            holder_worst = max(holder_worst, lhs - rhs)
    tilde_ok = True
    for N, R, C1, p in ((3, 1.0, 1.0, 2), (2, 0.5, 3.0, 1), (4, 2.0, 0.1, 6), (3, 1.0, 0.01, 3)):
        ball = DomainBall(N, R)
        rep = lyapunov_bounds(ball, BoundConfig(C1, p))
        direct = min(ball.volume ** (1.0 / p), (1.0 / (C1 * ball.diam)) ** (N / p))
        tilde_ok &= rep.tilde_lower == direct
    ok = transform_worst <= 1e-9 and pointwise and holder_worst <= 1e-9 and tilde_ok
    return report(capsys, 10, ok, f"power transform worst rel {transform_worst:.1e}, pointwise {pointwise}; "
                                  f"Holder max(lhs - rhs) {holder_worst:.3e}; tilde_lower exact {tilde_ok}")


def check_eigen(capsys=None):
    t0 = time.perf_counter()
    j01 = jn_zeros(0, 1)[0] ** 2
    mu2 = principal_eigenvalue(LAPLACE, 2).mu1
    mu3 = principal_eigenvalue(LAPLACE, 3).mu1
    scaled = [principal_eigenvalue(E, 2, R).mu1 * R * R for R in (0.5, 1.0, 2.0, 4.0)]
    spread = (max(scaled) - min(scaled)) / scaled[1]
    again = principal_eigenvalue(E, 2).mu1
    repro = abs(again - scaled[1]) <= 1e-6 and abs(again - MU1_BASELINE[2]) <= 1e-6
    elapsed = time.perf_counter() - t0
    ok = abs(mu2 - j01) <= 1e-3 and abs(mu3 - math.pi**2) <= 1e-3 and spread <= 1e-6 and repro and elapsed < 30
    return report(capsys, 11, ok, f"mu1(N=2) {mu2:.8f}, mu1(N=3) {mu3:.8f}, R^2 spread {spread:.1e}, "
                                  f"lam=1/Lam=2 baseline {again:.10f}, {elapsed:.1f}s")


DETERMINISM_RUNS = [
    ("verify", {"family": "small", "params": {"N": 3, "lam": 1, "Lam": 2, "k": 10}, "p": 1, "seed": SEED}),
    ("verify", {"family": "n3", "params": {"N": 3, "lam": 1, "Lam": 2, "d": 1, "epsilon": 0.25}, "p": 1, "seed": SEED}),
    ("sweep", {"family": "small", "params": {"N": 3, "lam": 1, "Lam": 2}, "grid": [10, 31, 100, 316, 1000],
               "p": 1, "C1": 1, "seed": SEED}),
    ("sweep", {"family": "n2", "params": {"lam": 1, "Lam": 2}, "grid": [10, 100, 300], "p": 1, "seed": SEED}),
    ("bounds", {"ball": {"N": 3, "R": 1}, "C1": 1, "p": 3, "seed": SEED}),
    ("eigen", {"ball": {"N": 2, "R": 1}, "params": {"lam": 1, "Lam": 2}, "p": 2, "seed": SEED}),
    ("classify", {"family": "small", "params": {"N": 3, "lam": 1, "Lam": 2, "k": 10}, "seed": SEED}),
]


def _run_all(root: Path, hash_seed: str) -> tuple[dict[str, bytes], list[int]]:
    env = dict(os.environ, PYTHONHASHSEED=hash_seed, TOOL_LOG="quiet")
    out: dict[str, bytes] = {}
    codes = []
    for i, (command, cfg) in enumerate(DETERMINISM_RUNS):
        cfg_path = root / f"cfg{i}.json"
        cfg_path.write_text(json.dumps(cfg))
        out_dir = root / f"run{i}"
        args = [sys.executable, "-m", "pucci_lab.cli", command, "--config", str(cfg_path), "--out", str(out_dir)]
        if command == "eigen":
            args.append("--trajectory")
        codes.append(subprocess.run(args, env=env, check=False, capture_output=True).returncode)
        for f in sorted(out_dir.iterdir()):
            out[f"{i}/{f.name}"] = f.read_bytes()
    return out, codes


def check_determinism(tmp_root: Path, capsys=None):
    (tmp_root / "a").mkdir()
    (tmp_root / "b").mkdir()
    a, codes_a = _run_all(tmp_root / "a", "1")
    b, codes_b = _run_all(tmp_root / "b", "12345")
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    clean = not any(codes_a + codes_b)
    ok = same and clean and len(a) >= len(DETERMINISM_RUNS)
    return report(capsys, 12, ok, f"{len(a)} CSV/JSON artifacts from two separate process runs, "
                                  f"byte-identical {same}, all exit 0 {clean}")


# ---------------------------------------------------------------------------


class TestAcceptance:
    def test_01_operator_identities(self, capsys):
        assert check_operator(capsys)

    def test_02_radial_hessian(self, capsys):
        assert check_hessian(capsys)

    def test_03_construction_residuals(self, capsys):
        assert check_residuals(capsys)

    def test_04_annulus_norm_formula(self, capsys):
        assert check_annulus_norm(capsys)

    def test_05_n3_limit(self, capsys):
        assert check_n3_limit(capsys)

    def test_06_n2_limit(self, capsys):
        assert check_n2_limit(capsys)

    def test_07_small_norm_decay(self, capsys):
        assert check_small_decay(capsys)

    def test_08_classification(self, capsys):
        assert check_classification(capsys)

    def test_09_scaling_law(self, capsys):
        assert check_scaling(capsys)

    def test_10_power_transform_and_holder(self, capsys):
        assert check_bound_machinery(capsys)

    def test_11_eigen_oracles(self, capsys):
        assert check_eigen(capsys)

    def test_12_determinism(self, tmp_path, capsys):
        assert check_determinism(tmp_path, capsys)


if __name__ == "__main__":
    import tempfile

    checks = [check_operator, check_hessian, check_residuals, check_annulus_norm, check_n3_limit, check_n2_limit,
              check_small_decay, check_classification, check_scaling, check_bound_machinery, check_eigen]
    results = [c() for c in checks]
    with tempfile.TemporaryDirectory() as d:
        results.append(check_determinism(Path(d)))
    sys.exit(0 if all(results) else 1)
