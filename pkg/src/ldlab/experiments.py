"""Scripted studies: fission crossover, energy scaling, equipartition,
diameter and density bounds, and the profitable-cut probe.

Everything here is a deterministic function of its arguments; the CLI layer
adds CSV/manifest emission on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .competitors import make_ball, make_ball_chain, split_translate
from .errors import EmptyPiece, EmptySet, PreconditionFailed
from .grid import (
    GridSet,
    cross_section_area,
    cross_section_mass,
    essential_diameter,
    facet_perimeter,
    volume,
)
from .metrics import BallOracle, EnergyBreakdown, ball_energy, total_energy
from .riesz import Kernel, nonlocal_energy


@dataclass(frozen=True)
class SweepRecord:
    m: float
    best: str
    breakdowns: dict  # id -> EnergyBreakdown
    kernel: Kernel
    h: float
    optimizer_ref: str | None = None

    def __post_init__(self):
        eb = self.breakdowns[self.best]
        if any(other.E < eb.E - 1e-12 for other in self.breakdowns.values()):
            raise PreconditionFailed("best id is not minimal in the record")


def _chain_oracle(oracle: BallOracle, m: float, N: int) -> EnergyBreakdown:
    """N equal balls, cross-terms at infinite spacing (exactly zero)."""
    per = ball_energy(oracle.n, oracle.alpha, m / N)
    return EnergyBreakdown(P=N * per.P, V=N * per.V, E=N * per.E,
                           m=m, kernel=Kernel(oracle.n, oracle.alpha))


def fission_scan(n: int, alpha: float, masses, h: float) -> dict:
    """Optimal chain length N(m) against the ball, from closed-form oracles.

    Reports per-mass tables, the optimal N(m) (nondecreasing, at most
    ceil(m)+1), and the 1-to-2 ball crossover mass both in closed form and
    by bisection on e(m) - 2 e(m/2).
    """
    masses = list(masses)
    if any(m <= 0 for m in masses) or sorted(masses) != masses:
        raise PreconditionFailed("masses must be positive and ascending")
    oracle = BallOracle(n, alpha)
    k = Kernel(n, alpha)
    records = []
    for m in masses:
        cands = {"ball": ball_energy(n, alpha, m)}
        for N in range(2, math.ceil(m) + 2):
            cands[f"chain{N}"] = _chain_oracle(oracle, m, N)
        best = min(cands, key=lambda c: cands[c].E)
        records.append(SweepRecord(m=m, best=best, breakdowns=cands,
                                   kernel=k, h=h))
    m_star = oracle.two_ball_crossover()
    # independent check: bisection on the same comparison
    lo, hi = 0.05, 50.0
    f = lambda m: ball_energy(n, alpha, m).E - 2 * ball_energy(n, alpha, m / 2).E
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    n_of_m = [1 if r.best == "ball" else int(r.best[5:]) for r in records]
    return {
        "records": records,
        "optimal_N": n_of_m,
        "crossover_closed_form": m_star,
        "crossover_bisection": 0.5 * (lo + hi),
    }


def chain_grid_check(n: int, alpha: float, m: float, h: float,
                     spacing_factor: float = 10.0) -> dict:
    """Grid-evaluated chain energy vs the spaced-chain oracle (finite
    spacing: the oracle adds the exact pairwise 1/r^alpha ball-to-ball
    cross-terms at the construction's center distances)."""
    from .riesz import ball_volume

    k = Kernel(n, alpha)
    N = max(1, math.ceil(m))
    chain = make_ball_chain(n, alpha, m, h, spacing_factor)
    eb = total_energy(chain, k)
    oracle = _chain_oracle(BallOracle(n, alpha), m, N)
    per = m / N
    rad = (per / ball_volume(n)) ** (1.0 / n)
    spacing = spacing_factor * 2 * rad
    cross = 0.0
    for i in range(N):
        for j in range(i + 1, N):
            cross += per * per / ((j - i) * spacing) ** alpha
    oracle_E = oracle.E + 2 * cross
    return {
        "grid": eb,
        "oracle_E": oracle_E,
        "rel_err": abs(eb.E - oracle_E) / oracle_E,
    }


def _interp_ratio(P: float, V: float, m: float, n: int, alpha: float) -> float:
    a = (n - alpha) / (n + 1 - alpha)
    b = 1.0 / (n + 1 - alpha)
    return m / (P**a * V**b)


def scaling_sweep(n: int, alpha: float, masses, h: float) -> dict:
    """Best-competitor energy across masses; slopes of log E vs log m on
    the two branches, and the empirical constants of the two-sided bound
    E comparable to max(m^((n-1)/n), m)."""
    masses = sorted(masses)
    if masses[-1] / masses[0] < 100:
        raise PreconditionFailed("need at least two decades of masses")
    oracle = BallOracle(n, alpha)
    k = Kernel(n, alpha)
    m_star = oracle.two_ball_crossover()
    records = []
    for m in masses:
        cands = {"ball": ball_energy(n, alpha, m)}
        for N in range(2, math.ceil(m) + 2):
            cands[f"chain{N}"] = _chain_oracle(oracle, m, N)
        best = min(cands, key=lambda c: cands[c].E)
        records.append(SweepRecord(m=m, best=best, breakdowns=cands,
                                   kernel=k, h=h))
    ms = np.array([r.m for r in records])
    es = np.array([r.breakdowns[r.best].E for r in records])
    def _slope(mask):
        if mask.sum() < 2:
            return float("nan")
        return float(np.polyfit(np.log(ms[mask]), np.log(es[mask]), 1)[0])
    small = ms <= 0.1 * m_star
    large = ms >= 10 * m_star
    envelope = np.maximum(ms ** ((n - 1) / n), ms)
    interp_max = max(
        _interp_ratio(r.breakdowns[r.best].P, r.breakdowns[r.best].V, r.m,
                      n, alpha)
        for r in records
    )
    return {
        "records": records,
        "slope_small": _slope(small),
        "slope_large": _slope(large),
        "c_lower": float((es / envelope).min()),
        "C_upper": float((es / envelope).max()),
        "interpolation_C": interp_max,
        "m_star": m_star,
    }


def equipartition_check(n: int, alpha: float, masses, beta: float) -> dict:
    """min(P, V) and max(P, V) per unit mass for the best chain competitor
    at each mass; the linear-regime bound requires E <= beta m up front."""
    oracle = BallOracle(n, alpha)
    k = Kernel(n, alpha)
    rows = []
    for m in masses:
        if m < 1:
            raise PreconditionFailed("equipartition regime needs m >= 1")
        cands = {"ball": ball_energy(n, alpha, m)}
        for N in range(2, math.ceil(m) + 2):
            cands[f"chain{N}"] = _chain_oracle(oracle, m, N)
        best = min(cands, key=lambda c: cands[c].E)
        eb = cands[best]
        if eb.E > beta * m:
            raise PreconditionFailed(
                f"E({best}, m={m}) = {eb.E:.3f} exceeds beta*m = {beta * m:.3f}")
        rows.append({
            "m": m, "best": best, "P": eb.P, "V": eb.V,
            "min_over_m": min(eb.P, eb.V) / m,
            "max_over_m": max(eb.P, eb.V) / m,
        })
    c_fit = min(r["min_over_m"] for r in rows)
    spread = (max(r["min_over_m"] for r in rows) /
              max(c_fit, 1e-300) - 1.0)
    return {"rows": rows, "c_fit": c_fit, "relative_spread": spread,
            "upper_violations": [r for r in rows if r["max_over_m"] > beta]}


def diameter_bounds_check(sets, n: int, alpha: float) -> dict:
    """Fit c, C with c m^(1/alpha) <= diam <= C m over candidate sets."""
    rows = []
    for s in sets:
        m = volume(s)
        d = essential_diameter(s)
        rows.append({"m": m, "diam": d,
                     "lower_ratio": d / m ** (1.0 / alpha),
                     "upper_ratio": d / m})
    if not rows:
        return {"rows": [], "c_fit": float("nan"), "C_fit": float("nan")}
    return {
        "rows": rows,
        "c_fit": min(r["lower_ratio"] for r in rows),
        "C_fit": max(r["upper_ratio"] for r in rows),
    }


def density_bound_check(s: GridSet, k: Kernel, max_samples: int = 200) -> dict:
    """Minimum mass of s inside unit balls centered on occupied cells.

    Near-minimizers keep this above a positive fraction of min(1, m);
    a stray filament or dust shows up as a center with tiny local mass.
    """
    pts = s.cell_centers()
    if len(pts) == 0:
        return {"samples": 0, "min_local_mass": float("nan"), "ratio": float("nan")}
    m = volume(s)
    step = max(1, len(pts) // max_samples)
    centers = pts[::step]
    cell_mass = s.h**s.n
    vals = []
    for c in centers:
        d2 = ((pts - c) ** 2).sum(axis=1)
        vals.append(float((d2 <= 1.0).sum()) * cell_mass)
    vmin = min(vals)
    return {
        "samples": len(centers),
        "min_local_mass": vmin,
        "ratio": vmin / min(1.0, m),
        "argmin": centers[int(np.argmin(vals))].tolist(),
    }


def cut_inequality_probe(s: GridSet, k: Kernel, R_schedule=None) -> dict:
    """Profitable-split scan driven by the one-dimensional slice profile.

    Orients the longest axis so the light half comes first (U(d/2) <= m/2),
    measures rho(t) (section area) and U(t) (cumulative mass), evaluates
    the slice differential inequality 2 rho(t) >= (m / (2 d^alpha)) U(t)
    on t in (d/4, d/2), and tests actual splits: for each lattice cut plane
    in that window and each R in the schedule, compares
    E(split_translate(s, t, R)) with E(s) under the facet perimeter (exact
    additivity under cuts) and the convolution interaction sum.
    """
    if not s.cells.any():
        raise EmptySet("probe of empty set")
    occ = np.argwhere(s.cells)
    extents = occ.max(axis=0) - occ.min(axis=0) + 1
    axis = int(np.argmax(extents))
    d = float(extents[axis]) * s.h
    m = volume(s)
    if cross_section_mass(s, axis, d / 2) > m / 2:
        cells = np.flip(s.cells, axis=axis)
        s = GridSet(cells.copy(), s.h, s.origin)
    E0 = facet_perimeter(s) + nonlocal_energy(s, k)
    if R_schedule is None:
        R_schedule = [10.0 * d]
    ts = []
    t = d / 4
    while t < d / 2:
        ts.append(t)
        t += s.h
    ineq_rows = []
    for t in ts:
        rho = cross_section_area(s, axis, t)
        U = cross_section_mass(s, axis, t)
        lhs = 2 * rho
        rhs = m / (2 * d**k.alpha) * U
        ineq_rows.append({"t": t, "rho": rho, "U": U,
                          "lhs": lhs, "rhs": rhs, "holds": lhs >= rhs})
    split_rows = []
    best = None
    for t in ts:
        for R in R_schedule:
            try:
                g = split_translate(s, axis, t, R)
            except (EmptySet, EmptyPiece):
                continue
            if g.count() != s.count():
                continue
            V1 = nonlocal_energy(g, k)
            E1 = facet_perimeter(g) + V1
            row = {"t": t, "R": R, "E_split": E1, "dE": E1 - E0,
                   "V_split": V1}
            split_rows.append(row)
            if row["dE"] < 0 and (best is None or row["dE"] < best["dE"]):
                best = row
    return {
        "axis": axis,
        "diameter": d,
        "mass": m,
        "E": E0,
        "inequality": ineq_rows,
        "failure_ts": [r["t"] for r in ineq_rows if not r["holds"]],
        "splits": split_rows,
        "profitable": best,
    }
