from __future__ import annotations

import csv
import io
import math
import time
from fractions import Fraction

import numpy as np

from coarsegrain import closedform, integral
from coarsegrain.cli import SweepSpec, cmd_sweep, verify_sandwich
from coarsegrain.closedform import ShapeParams, c_hat, c_hat_bound, interval_factor
from coarsegrain.exact import GrainParams, grain_primes, kappa_exact, pi_exact
from coarsegrain.hills import hill_build, hill_eval, identity_rhs, mean_operator
from coarsegrain.integral import QuadratureConfig, main_bound
from coarsegrain.multiplicity import bell_asymptotic_ratio, nonsquarefree_bound, ordered_bell
from coarsegrain.primes import verify_pnt
from coarsegrain.sturmverify import build_g, divide_out_root_at_one, min_s, nested_g34_reduced

B_SMALL = 3000
C_SMALL = math.floor(B_SMALL**1.25)
THETAS = (math.log(2), 2.0, 5.0)


def small(k: int) -> GrainParams:
    return GrainParams(B_SMALL, C_SMALL, k)


def test_criterion_01_sandwich(acceptance_report):
    start = time.perf_counter()
    cfg = QuadratureConfig(rel_tol=1e-8)
    failures, total, cases = 0, 0, set()
    for k in (2, 3):
        checks = verify_sandwich(small(k), points=60, mode="riemann", cfg=cfg)
        total += len(checks)
        failures += sum(not c.ok for c in checks)
        cases |= {(k, c.case) for c in checks}
    elapsed = time.perf_counter() - start
    ok = failures == 0 and total >= 100 and len(cases) == (2 + 2) + (3 + 2) and elapsed < 300
    acceptance_report(1, ok, f"{total} points, {failures} outside, {len(cases)} cases, {elapsed:.1f}s")
    assert ok


def test_criterion_02_interval_factors(acceptance_report):
    alpha = 0.2327
    got = {m: interval_factor(m, alpha, 4) for m in ("lambda", "nu", "eta")}
    want = {"lambda": 0.434, "nu": 0.957, "eta": 0.978}
    ok = all(abs(got[m] - want[m]) <= 1e-3 for m in want)
    acceptance_report(2, ok, ", ".join(f"{m}={got[m]:.4f}" for m in want))
    assert ok


def test_criterion_03_sturm_table(acceptance_report):
    start = time.perf_counter()
    ss = [min_s(k) for k in range(3, 8)]
    degs = [build_g(k, s).degree for k, s in zip(range(3, 8), ss)]
    reduced, mult = divide_out_root_at_one(build_g(3, 4))
    elapsed = time.perf_counter() - start
    ok = (
        ss == [4, 3, 4, 5, 6]
        and degs == [11, 13, 21, 31, 43]
        and mult == 3
        and reduced == nested_g34_reduced()
        and elapsed < 600
    )
    acceptance_report(3, ok, f"s={ss} degrees={degs} {elapsed:.1f}s")
    assert ok


def test_criterion_04_three_forms(acceptance_report):
    worst, worst_end = 0.0, 0.0
    for k in range(1, 8):
        for theta in THETAS:
            for xi in np.linspace(0, k, 200):
                a = closedform.norm_cutexp_sum(k, theta, xi)
                b = closedform.norm_derivative_sum(k, theta, xi)
                c = closedform.norm_integral(k, theta, xi)
                if a > 0:
                    worst = max(worst, abs(a - b) / a, abs(a - c) / a)
            end = closedform.norm_cutexp_sum(k, theta, k)
            worst_end = max(worst_end, abs(end / closedform.endpoint_value(k, theta) - 1))
    ok = worst <= 1e-9 and worst_end <= 1e-12
    acceptance_report(4, ok, f"max rel diff {worst:.2e}, endpoint {worst_end:.2e}")
    assert ok


def test_criterion_05_hills(acceptance_report):
    problems = []
    for k in range(1, 8):
        h = hill_build(k)
        if h.integral() != 1:
            problems.append(f"mass k={k}")
        for n in range(1, 8 * k):
            xi = Fraction(n, 8)
            if h(xi) != h(k - xi):
                problems.append(f"symmetry k={k}")
            if k >= 2 and h(xi) != mean_operator(hill_build(k - 1), xi):
                problems.append(f"recursion k={k}")
            if k >= 2 and h(xi) != identity_rhs(k, xi):
                problems.append(f"identity k={k}")
        d = h.derivative(k - 1)
        if any(d(Fraction(2 * j + 1, 2)) != (-1) ** j * math.comb(k - 1, j) for j in range(k)):
            problems.append(f"top derivative k={k}")
        if k >= 2 and max(abs(h(float(t)) - identity_rhs(k, float(t))) for t in np.linspace(-0.5, k + 0.5, 301)) > 1e-12:
            problems.append(f"identity grid k={k}")
        if k >= 3:
            xi = 0.37 + (k - 1) / 2
            exact = hill_eval(k, 1, xi)
            errs = [abs((hill_eval(k, 0, xi + s) - hill_eval(k, 0, xi - s)) / (2 * s) - exact) for s in (1e-2, 5e-3)]
            if errs[1] > errs[0] / 3.5 + 1e-13:
                problems.append(f"finite differences k={k}")
    ok = not problems
    acceptance_report(5, ok, "all hill checks" if ok else "; ".join(sorted(set(problems))))
    assert ok


def test_criterion_06_bounds(acceptance_report):
    problems = []
    for k in range(1, 8):
        for theta in THETAS:
            grid = np.linspace(0, k + 1, 500)
            vals = [closedform.norm_cutexp_sum(k, theta, t) for t in grid]
            if max(vals) > closedform.upper_bound(theta):
                problems.append(f"1/theta k={k}")
            if k >= 2 and theta >= math.log(16) / k:
                for t in np.linspace(0, 1, 200):
                    if closedform.left_lower_bound(k, theta, t) > closedform.norm_cutexp_sum(k, theta, t) * (1 + 1e-12):
                        problems.append(f"left k={k}")
            if k >= 3:
                for t in np.linspace(k - 1, k, 200):
                    if closedform.right_lower_bound(k, theta, t) > closedform.norm_cutexp_sum(k, theta, t) * (1 + 1e-12):
                        problems.append(f"right k={k}")
    B, a = 1e6, 0.25
    for k in range(2, 7):
        if c_hat(k, B, a) > c_hat_bound(k, B, a):
            problems.append(f"c_hat k={k}")
    for k in range(1, 5):
        sp = ShapeParams(B, a, k)
        if integral.lambda_hat_norm(sp, k, np.linspace(0, k + 0.5, 60)).max() > c_hat(k, B, a):
            problems.append(f"lambda_hat k={k}")
    ok = not problems
    acceptance_report(6, ok, "all bounds hold" if ok else "; ".join(sorted(set(problems))))
    assert ok


def test_criterion_07_nonsquarefree(acceptance_report):
    problems = []
    for k in (2, 3):
        p = small(k)
        P = grain_primes(p)
        # the strict inequality needs room for two distinct tuples; below 1.5 B^k
        # only p^k may fit and then kappa = pi
        for x in np.geomspace(1.5 * B_SMALL**k, float(C_SMALL) ** k, 12 if k == 2 else 6):
            x = int(x)
            kap, pi = kappa_exact(p, x, primes=P), pi_exact(p, x, primes=P)
            if not pi < kap <= math.factorial(k) * pi:
                problems.append(f"order k={k} x={x}")
            if abs(pi - kap / math.factorial(k)) > nonsquarefree_bound(k, x, B_SMALL).tight:
                problems.append(f"bound k={k} x={x}")
    if [ordered_bell(k) for k in range(6)] != [1, 1, 3, 13, 75, 541]:
        problems.append("ordered Bell numbers")
    ratios = [bell_asymptotic_ratio(k) for k in range(8, 15)]
    if not all(0.99 <= r <= 1.01 for r in ratios):
        problems.append("Bell asymptotics")
    ok = not problems
    acceptance_report(7, ok, "order, bound and Bell checks" if ok else "; ".join(problems))
    assert ok


def test_criterion_08_pnt(acceptance_report):
    start = time.perf_counter()
    report = verify_pnt(1e7, "riemann")
    elapsed = time.perf_counter() - start
    ok = report.all_pass and elapsed < 60 and all(c.x >= 2657 for c in report.checkpoints)
    acceptance_report(8, ok, f"{len(report.checkpoints)} checkpoints, max ratio {report.max_ratio:.3f}, {elapsed:.1f}s")
    assert ok


def test_criterion_09_sweep(acceptance_report):
    start = time.perf_counter()
    p = GrainParams(1100 * 10**6, 2**37 - 1, 4)
    spec = SweepSpec(p, 0.0, 4.0, 4.0 / 99, methods=("lambda", "eta", "kappa"))
    text = cmd_sweep(spec)
    elapsed = time.perf_counter() - start
    rows = list(csv.DictReader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#")))))
    problems = []
    for r in rows:
        if r["note"]:
            problems.append(f"xi={r['xi']}: {r['note']}")
            continue
        ll, lu = float(r["lambda_lower"]), float(r["lambda_upper"])
        el, eu = float(r["eta_lower"]), float(r["eta_upper"])
        kt = float(r["kappa_tilde"])
        if not (ll <= el <= eu <= lu):
            problems.append(f"nesting xi={r['xi']}")
        if not (ll <= kt <= lu and el <= kt <= eu):
            problems.append(f"containment xi={r['xi']}")
    ok = len(rows) == 100 and not problems and elapsed < 600
    acceptance_report(9, ok, f"{len(rows)} rows, {len(problems)} violations, {elapsed:.1f}s")
    assert ok, problems[:5]


def test_criterion_10_main_bound(acceptance_report):
    eps = 0.5
    problems, n = [], 0
    for k, count in ((2, 12), (3, 5)):
        p = small(k)
        P = grain_primes(p)
        lo, hi = B_SMALL**k * (1 + eps), C_SMALL**k * (1 - eps)
        for x in np.geomspace(lo, hi, count):
            x = int(x)
            mb = main_bound(p, x, eps)
            pe = pi_exact(p, x, primes=P)
            a = min(max(pe * math.log(B_SMALL) / x, mb.a_lo), mb.a_hi)
            n += 1
            if abs(pe - a * x / math.log(B_SMALL)) > mb.err:
                problems.append(f"k={k} x={x}")
    ok = not problems
    acceptance_report(10, ok, f"{n} points, {len(problems)} violations")
    assert ok
