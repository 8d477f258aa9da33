"""Acceptance criteria, one test each, at the stated tolerances and runtime budgets.

Each test prints a single ``ACCEPTANCE k ...: PASS|FAIL`` line before asserting.
"""
import time

import numpy as np

from goodbsq.cli import main
from goodbsq.dynamics import (
    integrate_decomposed,
    integrate_direct,
    nonlinearity_N,
    smoothing_scan,
)
from goodbsq.estimates import (
    _QUAD_SIGNS,
    _factored,
    analytic_verdict,
    counterexample_fit,
    region_map,
    t_boundedness_trials,
)
from goodbsq.normal_form import assemble_h, free_minus, free_plus
from goodbsq.spectral_core import (
    Gauge,
    L,
    Linv,
    ModelParams,
    apply_multiplier,
    mu,
    random_sobolev_field,
)

from conftest import random_complex, smooth_field

GRID = [round(0.05 * k, 2) for k in range(1, 10)]


def report(capsys, k, name, ok, detail, elapsed=None, budget=None):
    timing = "" if elapsed is None else f" [{elapsed:.1f}s / {budget:.0f}s]"
    with capsys.disabled():
        print(f"\nACCEPTANCE {k} {name}: {'PASS' if ok else 'FAIL'} ({detail}){timing}")


def rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_1_cross_solver(capsys):
    t0 = time.perf_counter()
    N, alpha = 64, 0.3
    data = [("smooth", smooth_field(N, 1, mean=0.3), smooth_field(N, 2, mean=-0.2))]
    for seed in (0, 1, 2):
        u0 = random_sobolev_field(-alpha, N, seed)
        u0 = u0.with_coeffs(np.where(u0.n == 0, 0.3, u0.coeffs))
        u1 = random_sobolev_field(-alpha - 1, N, seed + 100)
        u1 = u1.with_coeffs(np.where(u1.n == 0, -0.2, u1.coeffs))
        data.append((f"rough{seed}", u0, u1))
    p = ModelParams(alpha=alpha, trunc=N, dt=1e-4, horizon=0.25)
    worst_01, worst_25 = 0.0, 0.0
    for _, u0, u1 in data:
        a = integrate_direct(u0, u1, p, n_out=10)
        b = integrate_decomposed(u0, u1, p, n_out=10)[1]
        i = int(np.argmin(np.abs(a.times - 0.1)))
        assert abs(a.times[i] - 0.1) < 1e-12
        worst_01 = max(worst_01, rel(b.states[i].coeffs, a.states[i].coeffs))
        worst_25 = max(worst_25, rel(b.states[-1].coeffs, a.states[-1].coeffs))
    elapsed = time.perf_counter() - t0
    ok = worst_01 <= 1e-6 and worst_25 <= 1e-4 and elapsed <= 120
    report(capsys, 1, "cross-solver", ok,
           f"max rel l2 {worst_01:.2e} at t=0.1, {worst_25:.2e} at t=0.25", elapsed, 120)
    assert ok


def test_2_normal_form_identity(capsys):
    t0 = time.perf_counter()
    N, alpha, t = 32, 0.25, 0.3
    f, g = smooth_field(N, 1), smooth_field(N, 2)
    p = ModelParams(alpha=alpha, trunc=N)
    Lp, Lm = free_plus(f, g, t), free_minus(f, g, t)
    Q = (nonlinearity_N(Lp, Lp, alpha) + nonlinearity_N(Lp, Lm, alpha) * 2.0
         + nonlinearity_N(Lm, Lm, alpha)).coeffs
    m = mu(f.n)
    ratios = []
    for eps in (1, -1):
        errs = []
        for dt in (2e-4, 1e-4):
            dh = (assemble_h(f, g, t + dt, eps, p).coeffs - assemble_h(f, g, t - dt, eps, p).coeffs) / (2 * dt)
            errs.append(np.linalg.norm(dh - 1j * eps * m * assemble_h(f, g, t, eps, p).coeffs - 0.5j * Q))
        ratios.append(errs[0] / errs[1])
    elapsed = time.perf_counter() - t0
    ok = all(3.5 <= r <= 4.5 for r in ratios) and elapsed <= 30
    report(capsys, 2, "normal-form identity", ok,
           "residual ratio per dt halving " + ", ".join(f"{r:.3f}" for r in ratios), elapsed, 30)
    assert ok


def test_3_smoothing(capsys):
    t0 = time.perf_counter()
    alpha, beta = 0.3, 0.05
    p = ModelParams(alpha=alpha, trunc=32, dt=1e-3, horizon=0.25)
    rep = smoothing_scan(p, [32, 64, 128, 256], [beta], seed=0)
    zs, fs = rep.z_slope[beta], rep.free_slope[beta]
    elapsed = time.perf_counter() - t0
    ok = zs <= 0.1 and fs >= beta + alpha - 0.1 and elapsed <= 900
    report(capsys, 3, "smoothing", ok, f"z slope {zs:.4f} (<= 0.1), free slope {fs:.4f} (>= 0.25)",
           elapsed, 900)
    assert ok


def test_4_sharpness_exponent(capsys):
    t0 = time.perf_counter()
    fits = [counterexample_fit(a, g) for a, g in ((0.3, 0.45), (0.35, 0.4), (0.2, 0.7))]
    elapsed = time.perf_counter() - t0
    ok = all(abs(r.slope - r.theory) <= 0.02 for r in fits) and elapsed <= 10
    detail = ", ".join(f"({r.alpha}, {r.gamma}): {r.slope:.4f} vs {r.theory:.2f}" for r in fits)
    report(capsys, 4, "sharpness exponent", ok, detail, elapsed, 10)
    assert ok


def _margin_rows(kind, rows):
    kept = []
    for r in rows:
        a, g = r["alpha"], r["gamma"]
        line = 2 * a - 0.5 if kind == "M1" else min(1 - 2 * a, 0.5)
        if abs(g - line) >= 0.05 - 1e-9:
            kept.append(r)
    return kept


def test_5_region_map(capsys):
    t0 = time.perf_counter()
    bad, counts = [], {}
    for kind in ("M1", "M3"):
        rows = _margin_rows(kind, region_map(kind, GRID, GRID, N_list=(32, 64, 128, 256)))
        counts[kind] = len(rows)
        for r in rows:
            assert r["expected"] == analytic_verdict(kind, r["alpha"], r["gamma"])
            if r["verdict"] != r["expected"]:
                bad.append((kind, r["alpha"], r["gamma"], r["verdict"]))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed <= 1800
    detail = f"M1 {counts['M1']} points, M3 {counts['M3']} points, mismatches {bad or 'none'}"
    report(capsys, 5, "region map", ok, detail, elapsed, 1800)
    assert ok


def test_6_T_boundedness(capsys):
    t0 = time.perf_counter()
    slopes = {}
    for alpha in (0.1, 0.25, 0.375):
        slopes[alpha] = t_boundedness_trials(alpha, trials=100, N_list=(16, 64, 256, 1024), seed=0).slope
    elapsed = time.perf_counter() - t0
    ok = all(abs(s) <= 0.05 for s in slopes.values()) and elapsed <= 600
    detail = ", ".join(f"alpha={a}: slope {s:.3f}" for a, s in slopes.items())
    report(capsys, 6, "T-boundedness", ok, detail, elapsed, 600)
    assert ok


def test_7_exact_invariants(capsys):
    t0 = time.perf_counter()
    worst = {}
    # evolved states: zero-mode law and Hermitian symmetry (1e-10)
    N = 32
    u0 = smooth_field(N, 3, mean=0.4)
    u1 = smooth_field(N, 4, mean=-0.3)
    p = ModelParams(alpha=0.3, trunc=N, dt=1e-3, horizon=0.25)
    zero, herm = 0.0, 0.0
    for traj in (integrate_direct(u0, u1, p, n_out=10), integrate_decomposed(u0, u1, p, n_out=10)[1]):
        zero = max(zero, float(np.abs(traj.zero_mode - (0.4 - 0.3 * traj.times)).max()))
        for u in traj.states:
            c = u.coeffs
            herm = max(herm, float(np.abs(c - np.conj(c[::-1])).max() / np.abs(c).max()))
    worst["zero-mode"] = (zero, 1e-10)
    worst["hermitian"] = (herm, 1e-10)
    # gauge inversion and L o L^{-1} (1e-12)
    gauge, lid = 0.0, 0.0
    for seed in range(20):
        u = random_complex(256, seed, mean_zero=True)
        back = apply_multiplier(apply_multiplier(u, Gauge(0.7, 1.5, -2.0, -1)), Gauge(0.7, 1.5, -2.0, 1))
        gauge = max(gauge, rel(back.coeffs, u.coeffs))
        back = apply_multiplier(apply_multiplier(u, L), Linv)
        lid = max(lid, rel(back.coeffs, u.coeffs))
    worst["gauge inversion"] = (gauge, 1e-12)
    worst["L Linv"] = (lid, 1e-12)
    # resonance identities, exact integers
    r = np.arange(-48, 49, dtype=np.int64)
    x1, x2, x3 = np.meshgrid(r, r, r, indexing="ij")
    x4 = -(x1 + x2 + x3)
    res = 0
    for (case, e3), s in _QUAD_SIGNS.items():
        expanded = s[0] * x1 ** 2 + s[1] * x2 ** 2 + s[2] * x3 ** 2 + s[3] * x4 ** 2
        res = max(res, int(np.abs(_factored(x1, x2, x3, x4, case, e3) - expanded).max()))
    worst["resonance"] = (float(res), 0.0)
    elapsed = time.perf_counter() - t0
    ok = all(v <= tol for v, tol in worst.values()) and elapsed <= 60
    detail = ", ".join(f"{k} {v:.1e}" for k, (v, _) in worst.items())
    report(capsys, 7, "exact invariants", ok, detail, elapsed, 60)
    assert ok


DETERMINISM = {
    "simulate": ["--alpha", "0.3", "--n", "32", "--horizon", "0.05", "--mean0", "0.2", "--mean1", "0.1"],
    "decompose": ["--alpha", "0.3", "--n", "32", "--horizon", "0.05", "--beta", "0.05", "--mean0", "0.2"],
    "smoothing-scan": ["--alpha", "0.3", "--beta", "0.05", "--n", "16", "--n", "32", "--n", "64",
                       "--horizon", "0.05"],
    "symbol-scan": ["--kind", "M3", "--alpha", "0.3", "--gamma", "0.45", "--n", "16", "--n", "32", "--n", "48"],
    "counterexample": ["--alpha", "0.3", "--gamma", "0.45"],
    "t-bound": ["--alpha", "0.25", "--n", "16", "--n", "64", "--trials", "20", "--seed", "7"],
}


def test_8_determinism(capsys, tmp_path):
    differing = []
    for cmd, args in DETERMINISM.items():
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / cmd / tag
            assert main([cmd, *args, "--out", str(out)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
        if not outs[0] or outs[0] != outs[1]:
            differing.append(cmd)
    capsys.readouterr()
    ok = not differing
    report(capsys, 8, "determinism", ok,
           f"{len(DETERMINISM)} subcommands rerun, differing: {differing or 'none'}")
    assert ok
