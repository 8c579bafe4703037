"""Comparison constructions: balls, ball chains, rescalings, hyperplane
split-and-translate, truncation, and the non-optimality decision that picks
a strictly better competitor when a small far piece is present."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoxTooSmall,
    EmptyPiece,
    EmptySet,
    LdlabError,
    NotDisjoint,
)
from .grid import GridSet, facet_perimeter, volume
from .metrics import BallOracle, total_energy
from .riesz import Kernel, ball_volume, interaction_energy

_MAX_CELLS = 3 * 10**8  # refuse constructions beyond desk scale


@dataclass(frozen=True)
class CompetitorSpec:
    """Declarative competitor description, serializable in run configs."""

    variant: str  # ball | ball_chain | rescaled | split_translate | truncated_ball
    params: dict = field(default_factory=dict)


def _closest_cells(n: int, count: int, h: float, shape, center) -> np.ndarray:
    """Occupy the `count` cells whose centers are closest to `center`
    (deterministic tie-break by lattice order)."""
    axes = [np.arange(s) * h for s in shape]
    grids = np.meshgrid(*axes, indexing="ij")
    d2 = sum((g - c) ** 2 for g, c in zip(grids, center))
    flat = d2.ravel()
    order = np.lexsort((np.arange(flat.size), flat))
    cells = np.zeros(flat.size, dtype=bool)
    cells[order[:count]] = True
    return cells.reshape(shape)


def make_ball(n: int, m: float, h: float, margin: int = 2) -> GridSet:
    """Rasterized ball of volume exactly round(m / h^n) cells.

    The closest-to-center cell selection makes the volume exact and the
    shape the best lattice approximation of a ball.
    """
    count = int(round(m / h**n))
    if count < 1:
        raise BoxTooSmall("mass below one cell")
    r = (m / ball_volume(n)) ** (1.0 / n)
    half = int(np.ceil(r / h)) + margin
    side = 2 * half + 1
    if side**n > _MAX_CELLS:
        raise BoxTooSmall(f"ball raster would need {side}^{n} cells")
    center = (half * h,) * n
    cells = _closest_cells(n, count, h, (side,) * n, center)
    origin = tuple(-c for c in center)
    return GridSet(cells, h, origin)


def make_ball_chain(n: int, alpha: float, m: float, h: float,
                    spacing_factor: float = 10.0) -> GridSet:
    """N = ceil(m) disjoint equal balls on the e1 axis (per-ball mass <= 1),
    spaced spacing_factor x ball diameter apart, on one lattice."""
    N = max(1, int(np.ceil(m)))
    per = m / N
    count = int(round(per / h**n))
    if count < 1:
        raise BoxTooSmall("per-ball mass below one cell")
    r = (per / ball_volume(n)) ** (1.0 / n)
    spacing = spacing_factor * 2 * r
    half = int(np.ceil(r / h)) + 2
    step = int(round(spacing / h))
    if step <= 2 * half:
        raise BoxTooSmall("spacing below ball diameter")
    len0 = (N - 1) * step + 2 * half + 1
    side = 2 * half + 1
    shape = (len0,) + (side,) * (n - 1)
    if np.prod(shape) > _MAX_CELLS:
        raise BoxTooSmall(f"chain raster would need {np.prod(shape)} cells")
    cells = np.zeros(shape, dtype=bool)
    ball = _closest_cells(n, count, h, (side,) * n, (half * h,) * n)
    for j in range(N):
        sl = (slice(j * step, j * step + side),) + (slice(None),) * (n - 1)
        cells[sl] |= ball
    return GridSet(cells, h, tuple(-half * h for _ in range(n)))


def random_blob(n: int, m: float, h: float, seed: int) -> GridSet:
    """Connected random blob of volume round(m/h^n) cells (Eden growth:
    repeatedly occupy a uniformly random frontier cell)."""
    count = int(round(m / h**n))
    if count < 1:
        raise BoxTooSmall("mass below one cell")
    rng = np.random.default_rng(seed)
    # generous box: Eden clusters are compact, ~2x ball radius suffices
    r = (m / ball_volume(n)) ** (1.0 / n)
    half = int(np.ceil(2.5 * r / h)) + 2
    side = 2 * half + 1
    if side**n > _MAX_CELLS:
        raise BoxTooSmall("blob raster too large")
    cells = np.zeros((side,) * n, dtype=bool)
    c0 = (half,) * n
    cells[c0] = True
    steps = []
    for ax in range(n):
        for d in (-1, 1):
            e = [0] * n
            e[ax] = d
            steps.append(tuple(e))
    frontier = {tuple(np.add(c0, e)) for e in steps}
    for _ in range(count - 1):
        order = sorted(frontier)
        cell = order[int(rng.integers(len(order)))]
        frontier.discard(cell)
        cells[cell] = True
        for e in steps:
            nb = tuple(np.add(cell, e))
            if all(0 < x < side - 1 for x in nb) and not cells[nb]:
                frontier.add(nb)
    return GridSet(cells, h, tuple(-half * h for _ in range(n)))


def rescale_set(s: GridSet, ell: float) -> GridSet:
    """Rasterization of ell * s by nearest-cell resampling, with a
    deterministic boundary adjustment to hit volume ell^n |s| exactly."""
    if ell <= 0:
        raise LdlabError("scale must be positive")
    if ell == 1.0:
        return s.copy()
    n = s.n
    target = int(round(s.count() * ell**n))
    shape = tuple(int(np.ceil(d * ell)) + 2 for d in s.shape)
    if np.prod(shape) > _MAX_CELLS:
        raise BoxTooSmall("rescaled raster too large")
    # target cell centers pulled back into the source lattice
    axes = [(np.arange(d) - 1.0) / ell for d in shape]
    grids = np.meshgrid(*axes, indexing="ij")
    idx = [np.clip(np.rint(g).astype(int), 0, d - 1)
           for g, d in zip(grids, s.shape)]
    inside = np.ones(shape, dtype=bool)
    for g, d in zip(grids, s.shape):
        inside &= (g > -0.5) & (g < d - 0.5)
    cells = s.cells[tuple(idx)] & inside
    cells = _adjust_count(cells, target)
    origin = tuple(o * ell for o in s.origin)
    return GridSet(cells, s.h, origin)


def _adjust_count(cells: np.ndarray, target: int) -> np.ndarray:
    """Add or remove boundary cells (deterministic order) until the
    occupied count equals target."""
    from scipy import ndimage

    cells = cells.copy()
    cur = int(cells.sum())
    rng = np.random.default_rng(0)
    while cur != target:
        if cur < target:
            cand = ndimage.binary_dilation(cells) & ~cells
            need = target - cur
        else:
            cand = cells & ~ndimage.binary_erosion(cells)
            need = cur - target
        flat = np.flatnonzero(cand.ravel())
        if len(flat) == 0:
            raise LdlabError("cannot adjust volume: no boundary candidates")
        pick = rng.permutation(flat)[:need]
        cells.ravel()[pick] = cur < target
        cur = int(cells.sum())
    return cells


def split_translate(s: GridSet, axis: int, t: float, R: float) -> GridSet:
    """Cut at the lattice plane nearest t (from the bounding-box minimum
    along axis) and translate the upper piece by R along the same axis.

    Volume is preserved exactly; under the facet perimeter the increase is
    exactly twice the cut section area when the translated piece is clear.
    """
    if not s.cells.any():
        raise EmptySet("split of empty set")
    occ = np.argwhere(s.cells)
    i0 = int(occ[:, axis].min())
    k = i0 + int(np.floor(t / s.h + 0.5))
    idx_hi = occ[occ[:, axis] >= k]
    idx_lo = occ[occ[:, axis] < k]
    if len(idx_hi) == 0 or len(idx_lo) == 0:
        if len(idx_lo) == 0:
            raise EmptyPiece("cut below the set")
        return s.copy()  # cut beyond the set: identity
    shift = int(round(R / s.h))
    new_len = int(occ[:, axis].max()) + shift + 3
    shape = list(s.shape)
    shape[axis] = max(shape[axis], new_len)
    if np.prod(shape) > _MAX_CELLS:
        raise BoxTooSmall("translated piece does not fit at desk scale")
    cells = np.zeros(shape, dtype=bool)
    cells[tuple(idx_lo.T)] = True
    idx_hi = idx_hi.copy()
    idx_hi[:, axis] += shift
    cells[tuple(idx_hi.T)] = True
    if int(cells.sum()) != len(occ):
        raise NotDisjoint("translated piece landed on the lower piece")
    return GridSet(cells, s.h, s.origin)


@dataclass(frozen=True)
class NonOptimalityRecord:
    triggered: bool
    sigma: float
    E_piece: float
    gamma: float
    variant: str  # "rescaled" | "ball_chain" | ""
    energy_before: float
    energy_after: float
    better: GridSet | None


def _union(F1: GridSet, F2: GridSet) -> GridSet:
    if F1.h != F2.h or F1.shape != F2.shape or F1.origin != F2.origin:
        raise LdlabError("non_optimality_check expects a common lattice")
    if (F1.cells & F2.cells).any():
        raise NotDisjoint("pieces overlap")
    return GridSet(F1.cells | F2.cells, F1.h, F1.origin)


def non_optimality_check(F1: GridSet, F2: GridSet, k: Kernel,
                         eps: float = 0.05) -> NonOptimalityRecord:
    """Decision of the small-far-piece criterion.

    Computes Sigma = P(F1) + P(F2) - P(F) (facet method: exact additivity)
    and checks Sigma <= E(F2)/2 together with the mass gate
    |F2| <= eps * min(1, |F1|). When both hold, builds the rescaled set
    ell * F1 with ell = (1 + gamma)^(1/n), gamma = |F2|/|F1|, and the
    ceil(m)-ball chain, and returns whichever has lower energy; its energy
    is strictly below E(F1 u F2) whenever the criterion is sound at the
    current resolution.
    """
    F = _union(F1, F2)
    sigma = facet_perimeter(F1) + facet_perimeter(F2) - facet_perimeter(F)
    eb2 = total_energy(F2, k)
    m1, m2 = volume(F1), volume(F2)
    gamma = m2 / m1
    gate = (m2 <= eps * min(1.0, m1)) and (sigma <= 0.5 * eb2.E)
    ebF = total_energy(F, k)
    if not gate:
        return NonOptimalityRecord(False, sigma, eb2.E, gamma, "",
                                   ebF.E, ebF.E, None)
    ell = (1.0 + gamma) ** (1.0 / k.n)
    tilde = rescale_set(F1, ell)
    chain = make_ball_chain(k.n, k.alpha, m1 + m2, F1.h)
    e_tilde = total_energy(tilde, k).E
    e_chain = total_energy(chain, k).E
    if e_tilde <= e_chain:
        variant, better, e_after = "rescaled", tilde, e_tilde
    else:
        variant, better, e_after = "ball_chain", chain, e_chain
    return NonOptimalityRecord(True, sigma, eb2.E, gamma, variant,
                               ebF.E, e_after, better)


def truncated_competitor(s: GridSet, k: Kernel, radius_factor: float = 2.0):
    """Bounded-support competitor with energy <= E(s) + tolerance.

    If the same-mass ball already beats s, return the ball. Otherwise scan
    lattice radii rho around the barycenter, split s into (s n B_rho,
    s \\ B_rho) and run the non-optimality decision on each candidate;
    return the best improvement found, else s unchanged.
    """
    if not s.cells.any():
        raise EmptySet("truncation of empty set")
    m = volume(s)
    eb = total_energy(s, k)
    ball = make_ball(k.n, m, s.h)
    eb_ball = total_energy(ball, k)
    if eb.E > eb_ball.E:
        return ball
    pts = np.argwhere(s.cells).astype(float)
    bary = pts.mean(axis=0)
    d = np.linalg.norm(pts - bary, axis=1) * s.h
    dmax = d.max()
    r_ball = (m / ball_volume(k.n)) ** (1.0 / k.n)
    if dmax <= radius_factor * r_ball:
        return s.copy()  # already compactly supported at the target radius
    best = s
    best_E = eb.E
    for rho in np.linspace(radius_factor * r_ball, dmax, 8)[:-1]:
        inner_mask = np.zeros_like(s.cells)
        inner_mask[tuple(pts[d <= rho].astype(int).T)] = True
        outer_mask = s.cells & ~inner_mask
        if not inner_mask.any() or not outer_mask.any():
            continue
        F1 = GridSet(inner_mask, s.h, s.origin)
        F2 = GridSet(outer_mask, s.h, s.origin)
        rec = non_optimality_check(F1, F2, k)
        if rec.triggered and rec.better is not None and rec.energy_after < best_E:
            best = rec.better
            best_E = rec.energy_after
    return best


def chain_cross_terms(chain: GridSet, k: Kernel):
    """Pairwise interaction energies between the chain's components
    (direct method, exact for the superadditivity identity)."""
    from .grid import components

    comps = components(chain)
    out = []
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            out.append(interaction_energy(comps[i], comps[j], k))
    return out
