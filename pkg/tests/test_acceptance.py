"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py`` or as a script.
"""

import itertools
import time

import numpy as np
import pytest

from cohosoliton.contact import (
    MODEL_KINDS,
    acms_residual,
    compose_deform,
    compose_deform_direct,
    framed_orbit,
    homothety,
    induce_level_set,
    model_space,
    pm_deform,
)
from cohosoliton.curvature import (
    curvature_table,
    ricci_ansatz,
    ricci_from_shape,
    shape_operator,
    slice_ricci,
)
from cohosoliton.profiles import (
    AnalyticProfile,
    AnsatzParams,
    build_grid,
    from_s,
    gaussian_profile,
    to_s,
)
from cohosoliton.soliton import (
    closure_check,
    hyperbolic_solve,
    oracle_integrate,
    profile_from_quadrature,
    residual_full,
    residual_hyperbolic,
    residual_table,
    smoothness_defects,
    solve_quadrature,
)

MODEL_K = {"flat-sasakian": 0.0, "sphere-sasakian": 4.0, "hyperbolic-sasakian": -3.0, "hyperbolic": 0.0, "product": 2.0}


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def _sup_rel(a, b):
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))


def test_c01_gaussian_flat_and_exact(report):
    start = time.perf_counter()
    worst = 0.0
    for n, lam in itertools.product(range(2, 7), (-1.0, 0.0, 1.0)):
        params = AnsatzParams(n, 2 * n, lam)
        grid = build_grid(gaussian_profile(lam), (0.1, 10.0), 10_000)
        ricci = curvature_table(params, grid)[:, 1:4]
        res = residual_table(params, grid)[:, 1:]
        worst = max(worst, np.max(np.abs(ricci)), np.max(np.abs(res)))
    elapsed = time.perf_counter() - start
    report(1, worst < 1e-10 and elapsed < 2.0, f"max |Ricci|,|residual| = {worst:.2e}, runtime {elapsed:.2f}s")


def test_c02_hyperbolic_branch(report):
    cases = [((1.0, 1.0, 2), -2.0), ((2.0, 2.0, 3), -4.0), ((3.0, 1.0, 4), -54.0)]
    ok, worst = True, 0.0
    for (a, H0, n), lam in cases:
        branch = hyperbolic_solve(AnsatzParams(n, 0.0, 0.0, q=0), a, H0, 0.3, 0.2, (0.0, 2.0), 41)
        ok &= branch.lam == lam
        for t in branch.grid.t[1:-1]:
            r = residual_hyperbolic(branch, n, float(t))
            worst = max(worst, abs(r.r_normal), abs(r.r_fiber), abs(r.r_base))
    report(2, ok and worst < 1e-12, f"lambda exact: {ok}, max residual {worst:.2e}")


def test_c03_quadrature_matches_rk4(report):
    worst = 0.0
    for n, lam, B in itertools.product((2, 3), (-1.0, 0.0, 1.0), (-1.0, 0.0, 1.0)):
        for k in (0.0, 2.0, -2.0, 2.0 * n):
            params = AnsatzParams(n, k, lam)
            quad = solve_quadrature(params, 1.0, B, 0.0, (0.0, 1.0), 1.0, 101)
            rk4 = oracle_integrate(params, 1.0, B, (0.0, 1.0), 1.0, 0.01)
            worst = max(worst, _sup_rel(rk4.alpha, quad.alpha))

    params = AnsatzParams(2, 3.0, 1.0)
    ref = solve_quadrature(params, 1.0, 1.0, 0.0, (0.0, 0.5), 2.0, 5, rtol=1e-13)
    errs = [
        abs(oracle_integrate(params, 1.0, 1.0, (0.0, 0.5), 2.0, h, halving_tol=1.0).alpha[-1] - ref.alpha[-1])
        for h in (0.125, 0.0625)
    ]
    ratio = errs[0] / errs[1]
    report(3, worst < 1e-6 and 12.8 <= ratio <= 19.2, f"lattice disagreement {worst:.2e}, halving ratio {ratio:.2f}")


def test_c04_closed_forms(report):
    gauss = solve_quadrature(AnsatzParams(2, 4.0, 1.0), 0.0, 1.0, 0.0, (0.0, 0.0), 3.0, 100)
    e1 = float(np.max(np.abs(gauss.alpha - 2 * gauss.s)))
    c = 1.7
    decay = solve_quadrature(AnsatzParams(2, 0.0, 0.0), 1.0, 0.0, 0.0, (0.0, c), 3.0, 100)
    e2 = float(np.max(np.abs(decay.alpha - c / (2 * decay.s + 1))))
    report(4, max(e1, e2) < 1e-9, f"|alpha - 2s| = {e1:.1e}, |alpha - c/(2s+1)| = {e2:.1e}")


def _round_trip(sp, q):
    g = from_s(sp, q, 0.0)
    sp2 = to_s(g, q, float(sp.s[0]))
    g2 = from_s(sp2, q, 0.0)
    e_s = max(_abs(sp2.s, sp.s), _abs(sp2.alpha, sp.alpha), _abs(sp2.beta, sp.beta), _abs(sp2.phi, sp.phi))
    e_t = max(_abs(g2.t, g.t), _abs(g2.H, g.H), _abs(g2.F, g.F), _abs(g2.f, g.f))
    return e_s, e_t


def _abs(a, b):
    return float(np.max(np.abs(a - b)))


def test_c05_coordinate_round_trip(report):
    gauss = build_grid(gaussian_profile(1.0), (0.1, 3.0), 2001)
    sp = to_s(gauss, 1, 0.005)
    back = from_s(sp, 1, 0.1)
    e_gauss = max(_abs(back.t, gauss.t), _abs(back.H, gauss.H), _abs(back.F, gauss.F), _abs(back.f, gauss.f))
    e_gs, e_gt = _round_trip(sp, 1)
    generic = solve_quadrature(AnsatzParams(2, 3.0, 1.0), 1.0, 0.5, 0.1, (0.0, 0.5), 1.0, 4001)
    e_qs, e_qt = _round_trip(generic, 1)
    worst = max(e_gauss, e_gs, e_gt, e_qs, e_qt)
    report(5, worst < 1e-8, f"gaussian {max(e_gauss, e_gs, e_gt):.1e}, quadrature run {max(e_qs, e_qt):.1e}")


def test_c06_closure_constraint(report):
    passes, mismatches = [], []
    for k, lam, beta0 in itertools.product((2.0, 3.0, 4.0), (-1.0, 0.0, 1.0), (1.0, 2.0, 3.0)):
        params = AnsatzParams(2, k, lam)
        expected = abs(k - lam * beta0 - 2) < 1e-8
        sp = solve_quadrature(params, beta0, 0.0, 0.0, (0.0, 0.0), 0.2, 401)
        got = closure_check(sp, params, "fiber-collapse").passed
        if got:
            passes.append((k, lam, beta0))
        if got != expected:
            mismatches.append((k, lam, beta0))
    report(6, not mismatches and len(passes) == 5, f"{len(passes)} passing cells {passes}, mismatches {mismatches}")


def test_c07_smoothness_parity(report):
    t = np.linspace(0.0, 1.0, 1001)
    good = smoothness_defects(t, np.sin(t), 1 + t**2, "fiber-collapse")
    cases = {"H'(0)": (2 * t, 1 + t**2), "H''(0)": (t + t**2, 1 + t**2), "F'''(0)": (np.sin(t), 1 + t**3)}
    named = {}
    for name, (H, F) in cases.items():
        named[name] = [d.name for d in smoothness_defects(t, H, F, "fiber-collapse") if not d.ok]
    ok = all(d.ok for d in good) and all(v == [k] for k, v in named.items())
    report(7, ok, f"sin t passes: {all(d.ok for d in good)}; failures {named}")


def test_c08_acms_axioms(report):
    worst = 0.0
    for kind, n in itertools.product(MODEL_KINDS, (2, 3, 4)):
        m = model_space(kind, n, MODEL_K[kind])
        worst = max(worst, *acms_residual(m.orbit, m.cs))
    structures = []
    for t in np.linspace(0.5, 9.5, 10):
        orbit = framed_orbit(3, t, t)
        cs = induce_level_set(orbit, t, 1.0 * t)
        structures.append((orbit, cs))
        worst = max(worst, *acms_residual(orbit, cs))
    rng = np.random.default_rng(20261016)
    for _ in range(20):
        a, b = rng.uniform(0.05, 10.0, 2)
        sign = int(rng.choice([-1, 1]))
        orbit, cs = structures[int(rng.integers(len(structures)))]
        o1, c1 = homothety(orbit, cs, a)
        o2, c2 = pm_deform(o1, c1, b, sign)
        o3, c3 = compose_deform(o2, c2, b, a, -sign)
        for o, c in ((o1, c1), (o2, c2), (o3, c3)):
            worst = max(worst, *acms_residual(o, c))
    report(8, worst < 1e-12, f"max ACMS residual {worst:.1e}")


def test_c09_deformation_algebra(report):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        a, b = 10.0 * (1.0 - rng.random(2))
        H, F = rng.uniform(0.1, 5.0, 2)
        orbit = framed_orbit(3, H, F)
        cs = induce_level_set(orbit, H, 1.0)
        o1, c1 = compose_deform(orbit, cs, a, b, 1)
        o2, c2 = compose_deform_direct(orbit, cs, a, b, 1)
        for x, y in ((o1.metric, o2.metric), (c1.zeta, c2.zeta), (c1.eta, c2.eta), (c1.phi, c2.phi)):
            scale = np.maximum(np.abs(y), np.finfo(float).tiny)
            rel = np.where(y == 0, np.abs(x), np.abs(x - y) / scale)
            worst = max(worst, float(np.max(rel)))
    report(9, worst < 1e-15, f"max relative gap {worst:.1e}")


def test_c10_killing_discrimination(report):
    worst = 0.0
    runs = [
        (AnsatzParams(2, 4.0, 1.0), 0.0, 1.0, 0.0, 2.0),
        (AnsatzParams(2, 3.0, 1.0), 1.0, 0.0, 0.0, 0.5),
        (AnsatzParams(3, 2.0, -1.0), 1.0, 0.7, 0.4, 1.0),
        (AnsatzParams(2, 0.0, 0.0), 2.0, -1.0, 1.0, 1.0),
    ]
    for params, beta0, B, alpha0, s_end in runs:
        sp = solve_quadrature(params, beta0, B, 0.0, (0.0, alpha0), s_end, 801)
        table = residual_table(params, profile_from_quadrature(sp, params))
        worst = max(worst, float(np.max(np.abs(table[:, 5]))))
    branch = hyperbolic_solve(AnsatzParams(2, 0.0, 0.0, q=0), 1.5, 1.2, 0.0, 0.0, (0.0, 1.0), 11)
    killing = abs(residual_hyperbolic(branch, 2, 0.5).r_killing)
    expected = abs(branch.lam) * 1.2
    ok = worst < 1e-8 and killing > 0 and abs(killing - expected) <= 1e-12 * expected
    report(10, ok, f"Kahler-branch max r_killing {worst:.1e}; hyperbolic {killing:.4f} vs |lam| H0 {expected:.4f}")


def _random_profile(rng):
    a, b, c, d = rng.uniform(0.2, 1.0, 4)
    w1, w2 = rng.uniform(0.5, 2.0, 2)
    return AnalyticProfile(
        H=lambda t: 1.5 + a * np.sin(w1 * t),
        F=lambda t: 2.0 + b * np.cos(w2 * t) + c * t,
        f=lambda t: d * t**2,
        derivatives={
            "H": (lambda t: a * w1 * np.cos(w1 * t), lambda t: -a * w1**2 * np.sin(w1 * t)),
            "F": (lambda t: -b * w2 * np.sin(w2 * t) + c, lambda t: -b * w2**2 * np.cos(w2 * t)),
            "f": (lambda t: 2 * d * t, lambda t: 2 * d + 0 * t),
        },
    )


def test_c11_two_path_ricci(report):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(5):
        n, q = int(rng.integers(2, 6)), int(rng.choice([1, 2, 3]))
        params = AnsatzParams(n, float(rng.uniform(-5, 5)), 0.0, q=q)
        grid = build_grid(_random_profile(rng), (0.0, 3.0), 11)
        for t in rng.uniform(0.0, 3.0, 200):
            direct = ricci_ansatz(params, grid, t)
            H, F = grid.functions["H"](t), grid.functions["F"](t)
            via_shape = ricci_from_shape(slice_ricci(params, H, F), shape_operator(grid, t, n))
            for x, y in zip(direct, via_shape):
                worst = max(worst, abs(x - y) / max(1.0, abs(y)))
    report(11, worst < 1e-9, f"max relative gap {worst:.1e} over 1000 points")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
