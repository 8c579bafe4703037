"""End-to-end acceptance of the laboratory's headline capabilities.

One test per capability. Each measures its figure of merit, appends a
single PASS/FAIL line (echoed in the terminal summary by conftest), and
asserts both the tolerance and the wall-clock budget, so a regression in
accuracy or speed fails loudly and visibly.
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from ldlab import (
    AnnealConfig,
    Kernel,
    anneal,
    ball_energy,
    cut_inequality_probe,
    equipartition_check,
    fission_scan,
    fraenkel_to_ball,
    make_ball,
    make_ball_chain,
    nonlocal_energy,
    random_blob,
    total_energy,
)
from ldlab.cli import _CHECKS
from ldlab.config import defaults
from ldlab.grid import component_count, embed, refine
from ldlab.metrics import BallOracle
from ldlab.riesz import ball_potential, fit_profile_exponent

K31 = Kernel(3, 1.0)
MSTAR = 1.7560359598


def record(log, num: int, name: str, ok: bool, detail: str) -> bool:
    line = f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'} | {detail}"
    log.append(line)
    print(line, flush=True)
    return ok


def test_criterion_1_ball_interaction_energy(acceptance_log):
    t0 = time.monotonic()
    s = make_ball(3, 4 * np.pi / 3, 1.0 / 32)
    V = nonlocal_energy(s, K31)
    exact = 32 * np.pi**2 / 15
    rel = abs(V - exact) / exact
    dt = time.monotonic() - t0
    ok = rel <= 0.02 and dt <= 60
    assert record(acceptance_log, 1, "unit-ball interaction energy", ok,
                  f"grid V {V:.6f} vs {exact:.6f}, rel {rel:.3%} <= 2%, "
                  f"{dt:.1f}s <= 60s")


def test_criterion_2_boundary_profile_exponents(acceptance_log):
    t0 = time.monotonic()
    ds = np.array([1e-3, 2e-3, 4e-3, 8e-3])
    p1 = fit_profile_exponent(Kernel(3, 1.0), ds)
    p25 = fit_profile_exponent(Kernel(3, 2.5), ds)
    # at alpha = n - 1 the drop follows delta*log(1/delta); the compensated
    # ratio must be flat across the ladder
    k2 = Kernel(3, 2.0)
    v0 = ball_potential(k2, 1.0)
    ratios = np.array([(v0 - ball_potential(k2, 1.0 + d))
                       / (d * np.log(1.0 / d)) for d in ds])
    drift = float(ratios.max() / ratios.min() - 1.0)
    dt = time.monotonic() - t0
    ok = (abs(p1 - 1.0) <= 0.05 and abs(p25 - 0.5) <= 0.05
          and drift <= 0.10 and dt <= 60)
    assert record(acceptance_log, 2, "boundary potential exponents", ok,
                  f"p(alpha=1) {p1:.3f} (want 1 +- 0.05), "
                  f"p(alpha=2.5) {p25:.3f} (want 0.5 +- 0.05), "
                  f"alpha=2 log-ratio drift {drift:.2%} <= 10%, {dt:.1f}s")


def test_criterion_3_fission_crossover_two_routes(acceptance_log):
    t0 = time.monotonic()
    scan = fission_scan(3, 1.0, [0.5, 1.0, 2.0, 4.0, 8.0], 1.0 / 8)
    m_bis = scan["crossover_bisection"]
    h = 1.0 / 16

    def gap(m):
        e1 = total_energy(make_ball(3, m, h), K31).E
        e2 = total_energy(make_ball_chain(3, 1.0, m, h), K31).E
        return e1 - e2

    g_lo, g_hi = gap(1.5), gap(2.0)
    assert g_lo < 0 < g_hi, "grid energy gap does not bracket the crossover"
    m_grid = brentq(gap, 1.5, 2.0, xtol=2e-3)
    rel_bis = abs(m_bis - MSTAR) / MSTAR
    rel_grid = abs(m_grid - MSTAR) / MSTAR
    dt = time.monotonic() - t0
    ok = rel_bis <= 0.03 and rel_grid <= 0.03 and dt <= 300
    assert record(acceptance_log, 3, "one-to-two ball crossover", ok,
                  f"bisection {m_bis:.6f} (rel {rel_bis:.2%}), grid at "
                  f"h=1/16 {m_grid:.4f} (rel {rel_grid:.2%}) vs {MSTAR}, "
                  f"both <= 3%, {dt:.0f}s <= 300s")


def test_criterion_4_scaling_law_slopes(acceptance_log):
    from ldlab import scaling_sweep

    t0 = time.monotonic()
    small = np.geomspace(1e-3, 0.1 * MSTAR, 7)
    large = np.geomspace(10 * MSTAR, 1e3 * MSTAR, 7)
    out = scaling_sweep(3, 1.0, list(small) + list(large), 1.0 / 8)
    dt = time.monotonic() - t0
    ok = (abs(out["slope_small"] - 2 / 3) <= 0.05
          and abs(out["slope_large"] - 1.0) <= 0.05 and dt <= 300)
    assert record(acceptance_log, 4, "energy scaling slopes", ok,
                  f"small-mass slope {out['slope_small']:.4f} "
                  f"(want 2/3 +- 0.05), large-mass slope "
                  f"{out['slope_large']:.4f} (want 1 +- 0.05), {dt:.0f}s")


def test_criterion_5_interpolation_inequality(acceptance_log):
    t0 = time.monotonic()
    ok_scan, header, rows, extra = _CHECKS["interpolation"](
        defaults(), 100, np.random.default_rng(0))
    balls = [r[3] for r in rows if r[0] == "ball"]
    spread = (max(balls) - min(balls)) / np.mean(balls)
    n_cand = sum(1 for r in rows if r[0] != "ball")
    dt = time.monotonic() - t0
    ok = ok_scan and spread <= 0.02 and n_cand >= 100 and dt <= 600
    assert record(acceptance_log, 5, "interpolation inequality", ok,
                  f"ball ratio spread {spread:.3%} <= 2% over 3 decades, "
                  f"constant {extra['constant']:.6f}, "
                  f"{n_cand} candidates none exceeding, "
                  f"{dt:.0f}s <= 600s")


def _two_stage_ball_run(seed: int):
    """Coarse anneal at h=1/12, snug re-box, refine to h=1/24, re-anneal."""
    h1, h2 = 1.0 / 12, 1.0 / 24
    blob = random_blob(3, 0.5, h1, seed)
    c1 = AnnealConfig(kernel=K31, target_cells=blob.count(),
                      budget=800 * blob.count(), t0=2 * h1**2, decay=0.991,
                      w_boundary=0.8, w_far=0.2, seed=seed,
                      snapshot_every=100 * blob.count())
    r1 = anneal(blob, c1)
    occ = np.argwhere(r1.final.cells)
    span = occ.max(axis=0) - occ.min(axis=0) + 1
    s2 = refine(embed(r1.final, tuple(max(18, int(d) + 6) for d in span)), 2)
    c2 = AnnealConfig(kernel=K31, target_cells=s2.count(),
                      budget=220 * s2.count(), t0=1.5 * h2**2, decay=0.9846,
                      w_boundary=0.85, w_far=0.15, seed=seed + 1000,
                      snapshot_every=44 * s2.count())
    return anneal(s2, c2).final


def test_criterion_6_ball_recovery_by_annealing(acceptance_log):
    t0 = time.monotonic()
    m = 0.5
    oracle_E = ball_energy(3, 1.0, m).E
    # estimator tolerance: the grid bias measured on the known shape
    est_tol = abs(total_energy(make_ball(3, m, 1.0 / 24), K31).E
                  - oracle_E) / oracle_E
    passes, worst = 0, []
    for seed in range(10):
        final = _two_stage_ball_run(seed)
        fr = fraenkel_to_ball(final)
        rel = total_energy(final, K31).E / oracle_E - 1.0
        good = fr <= 0.1 and rel <= 0.02 + est_tol
        passes += good
        worst.append((fr, rel))
    dt = time.monotonic() - t0
    fr_max = max(w[0] for w in worst)
    rel_max = max(w[1] for w in worst)
    ok = passes >= 8 and dt <= 1800
    assert record(acceptance_log, 6, "ball recovery by annealing", ok,
                  f"{passes}/10 seeds with Fraenkel <= 0.1 and E within "
                  f"{0.02 + est_tol:.2%} of oracle (worst fraenkel "
                  f"{fr_max:.3f}, worst rel {rel_max:+.2%}), "
                  f"{dt:.0f}s <= 1800s")


def _fission_run(seed: int):
    m, h = 8.0, 1.0 / 6
    blob = random_blob(3, m, h, seed)
    box = tuple(max(36, int(d)) for d in blob.shape)
    blob = embed(blob, box)
    N = blob.count()
    cfg = AnnealConfig(kernel=K31, target_cells=N, budget=1200 * N,
                       t0=2 * h * h, decay=0.99426,
                       w_boundary=0.75, w_far=0.25, seed=seed,
                       snapshot_every=300 * N)
    return anneal(blob, cfg).final


def test_criterion_7_fission_mechanism(acceptance_log):
    t0 = time.monotonic()
    probe = cut_inequality_probe(make_ball(3, 8.0, 1.0 / 6), K31)
    prof = probe["profitable"]
    probe_ok = prof is not None and prof["dE"] < 0
    split_counts = []
    for seed in range(10):
        final = _fission_run(seed)
        split_counts.append(component_count(final))
    n_split = sum(1 for c in split_counts if c >= 2)
    dt = time.monotonic() - t0
    ok = probe_ok and n_split >= 8 and dt <= 1800
    assert record(acceptance_log, 7, "fission at large mass", ok,
                  f"probe split dE {prof['dE']:.3f} < 0 at R=10d; "
                  f"{n_split}/10 anneal seeds end with >= 2 components "
                  f"(counts {split_counts}), {dt:.0f}s <= 1800s")


def test_criterion_8_equipartition(acceptance_log):
    t0 = time.monotonic()
    beta = 2 * ball_energy(3, 1.0, 1.0).E
    out = equipartition_check(3, 1.0, [2, 4, 8, 16], beta)
    dt = time.monotonic() - t0
    ok = (out["relative_spread"] <= 0.30 and out["c_fit"] > 0
          and not out["upper_violations"] and dt <= 300)
    assert record(acceptance_log, 8, "large-mass equipartition", ok,
                  f"min(P,V)/m in [{out['c_fit']:.4f}, "
                  f"{out['c_fit'] * (1 + out['relative_spread']):.4f}], "
                  f"spread {out['relative_spread']:.1%} <= 30% over "
                  f"m in {{2,4,8,16}}, {dt:.1f}s")


def test_criterion_9_property_suite(acceptance_log):
    t0 = time.monotonic()
    names = ("perimeter", "convolution", "posdef", "scaling", "fuglede",
             "gradient")
    results = {}
    for name in names:
        ok_i, _, rows, _ = _CHECKS[name](defaults(), 100,
                                         np.random.default_rng(0))
        results[name] = ok_i
    dt = time.monotonic() - t0
    ok = all(results.values()) and dt <= 900
    detail = ", ".join(f"{n} {'ok' if v else 'FAIL'}"
                       for n, v in results.items())
    assert record(acceptance_log, 9, "property suite", ok,
                  f"{detail}, {dt:.0f}s <= 900s")
