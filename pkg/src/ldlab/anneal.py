"""Mass-preserving simulated annealing on cell sets.

Moves swap one occupied boundary cell with one empty boundary-adjacent
cell, so the occupied count is exactly conserved. The interaction part of
each move cost comes from a cached potential field (kernel-table units,
updated in place on every accepted move), which keeps the bookkeeping
exact: the telescoped energy of the final state matches a fresh direct
evaluation to ~1e-13.

The perimeter objective is the mean of two estimators, a 2^n-block
configuration-weight area and a smoothed-indicator total-variation area.
Either one alone has a blind spot (single detached cells are invisible to
a marching estimator, dense sponges to a TV one); the blend charges both
and has ~2% lattice anisotropy. Use `blend_perimeter` to re-evaluate the
objective of a finished set.

RNG: xorshift64* with splitmix64 seeding, one stream per run. The stream
is owned by the run state, so results are reproducible regardless of any
other random-number use in the process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage
from scipy.fft import next_fast_len, rfftn, irfftn

from ._area_weights import AREA_W2, AREA_W3
from .errors import BoxTooSmall, LdlabError, MassMismatch
from .grid import GridSet, component_count
from .metrics import EnergyBreakdown, fraenkel_to_ball
from .riesz import Kernel, self_energy

PAD = 3  # halo so every core cell has full code/TV windows
_MAX_BOX = 5 * 10**7

_W3 = np.asarray(AREA_W3, dtype=np.float64)
_W2 = np.asarray(AREA_W2, dtype=np.float64)


@dataclass(frozen=True)
class AnnealConfig:
    """Run parameters.

    budget counts proposed moves; one sweep is target_cells proposals and
    the temperature decays by `decay` once per sweep. t0 = None selects
    the default 0.5 * h^(n-1), one facet's worth of energy.
    """

    kernel: Kernel
    target_cells: int
    budget: int
    t0: float | None = None
    decay: float = 0.999
    w_boundary: float = 0.95
    w_far: float = 0.05
    seed: int = 0
    snapshot_every: int | None = None

    def __post_init__(self):
        if not (0.0 < self.decay < 1.0):
            raise LdlabError("decay must lie in (0, 1)")
        if self.budget < 0:
            raise LdlabError("budget must be >= 0")
        if self.target_cells < 1:
            raise LdlabError("target_cells must be >= 1")
        if self.w_boundary < 0 or self.w_far < 0 or self.w_boundary + self.w_far <= 0:
            raise LdlabError("move weights must be nonnegative with positive sum")


@dataclass
class MinimizeResult:
    final: GridSet
    trace: list  # EnergyBreakdown per snapshot (best-so-far is non-increasing)
    best_energy: float
    fraenkel: float
    components: int
    accept_ratio: float
    manifest: str | None = None


@njit(cache=True, inline="always")
def _xs_next(state):
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= (x << np.uint64(25)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(27)
    state[0] = x
    return ((x * np.uint64(0x2545F4914F6CDD1D)) & np.uint64(0xFFFFFFFFFFFFFFFF)) >> np.uint64(11)


@njit(cache=True, inline="always")
def _uniform(state):
    return _xs_next(state) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _flip3(f, occ, code, W, us, g, L2, L3, h, gold):
    """Toggle cell f (flat index); returns blended dP. g window overwritten,
    previous values stashed in gold (5x5x5) for _unflip3."""
    x = f // (L2 * L3)
    y = (f // L3) % L2
    z = f % L3
    b1 = (L2 - 1) * (L3 - 1)
    b2 = L3 - 1
    s = -1.0 if occ[f] else 1.0
    dc = 0.0
    for dx in range(2):
        for dy in range(2):
            for dz in range(2):
                j = (x - dx) * b1 + (y - dy) * b2 + (z - dz)
                bit = 1 << (dx * 4 + dy * 2 + dz)
                old = code[j]
                new = old - bit if s < 0 else old + bit
                code[j] = new
                dc += W[new] - W[old]
    occ[f] = not occ[f]
    bump = s / 27.0
    for i in range(x - 1, x + 2):
        for j in range(y - 1, y + 2):
            for k in range(z - 1, z + 2):
                us[i, j, k] += bump
    dtv = 0.0
    for i in range(5):
        for j in range(5):
            for k in range(5):
                xi = x - 2 + i
                yj = y - 2 + j
                zk = z - 2 + k
                gx = us[xi + 1, yj, zk] - us[xi - 1, yj, zk]
                gy = us[xi, yj + 1, zk] - us[xi, yj - 1, zk]
                gz = us[xi, yj, zk + 1] - us[xi, yj, zk - 1]
                gn = math.sqrt(gx * gx + gy * gy + gz * gz)
                gold[i, j, k] = g[xi, yj, zk]
                dtv += gn - gold[i, j, k]
                g[xi, yj, zk] = gn
    return 0.5 * (dc * h * h + dtv * h * h * 0.5)


@njit(cache=True)
def _unflip3(f, occ, code, us, g, L2, L3, gold):
    x = f // (L2 * L3)
    y = (f // L3) % L2
    z = f % L3
    b1 = (L2 - 1) * (L3 - 1)
    b2 = L3 - 1
    s = -1.0 if occ[f] else 1.0  # inverse of the flip that just happened
    for dx in range(2):
        for dy in range(2):
            for dz in range(2):
                j = (x - dx) * b1 + (y - dy) * b2 + (z - dz)
                bit = 1 << (dx * 4 + dy * 2 + dz)
                code[j] = code[j] - bit if s < 0 else code[j] + bit
    occ[f] = not occ[f]
    bump = s / 27.0
    for i in range(x - 1, x + 2):
        for j in range(y - 1, y + 2):
            for k in range(z - 1, z + 2):
                us[i, j, k] += bump
    for i in range(5):
        for j in range(5):
            for k in range(5):
                g[x - 2 + i, y - 2 + j, z - 2 + k] = gold[i, j, k]


@njit(cache=True)
def _phi_add3(phi, K, xb, yb, zb, sign, L1, L2, L3):
    for i in range(L1):
        ki = L1 - 1 - xb + i
        for j in range(L2):
            kj = L2 - 1 - yb + j
            for k in range(L3):
                phi[i, j, k] += sign * K[ki, kj, L3 - 1 - zb + k]


@njit(cache=True)
def _chunk3(occ, core, phi, K, code, W, us, g, idx, pos, state,
            L1, L2, L3, h, K0, n_prop, move0, T0, decay,
            p_far, E0, best0, golda, goldb):
    """Run n_prop proposals; returns (accepts, E, best). Mutates all state."""
    N = idx.shape[0]
    h2n = h ** (2 * 3)
    E = E0
    best = best0
    acc = 0
    sweep = move0 // N
    T = T0 * decay ** sweep
    for p in range(n_prop):
        mv = move0 + p
        if mv % N == 0:
            T = T0 * decay ** (mv // N)
        # removal candidate: occupied cell with an empty neighbor
        a = np.int64(-1)
        ne = 0
        e0 = np.int64(0); e1 = np.int64(0); e2 = np.int64(0)
        e3 = np.int64(0); e4 = np.int64(0); e5 = np.int64(0)
        for _ in range(64):
            cand = idx[np.int64(_xs_next(state) % np.uint64(N))]
            ne = 0
            for d in range(6):
                if d == 0:
                    o = cand + L2 * L3
                elif d == 1:
                    o = cand - L2 * L3
                elif d == 2:
                    o = cand + L3
                elif d == 3:
                    o = cand - L3
                elif d == 4:
                    o = cand + 1
                else:
                    o = cand - 1
                if core[o] and not occ[o]:
                    if ne == 0:
                        e0 = o
                    elif ne == 1:
                        e1 = o
                    elif ne == 2:
                        e2 = o
                    elif ne == 3:
                        e3 = o
                    elif ne == 4:
                        e4 = o
                    else:
                        e5 = o
                    ne += 1
            if ne > 0:
                a = cand
                break
        if a < 0:
            continue
        # insertion target
        b = np.int64(-1)
        if _uniform(state) < p_far:
            for _ in range(64):
                c = idx[np.int64(_xs_next(state) % np.uint64(N))]
                nf = 0
                f0 = np.int64(0); f1 = np.int64(0); f2 = np.int64(0)
                f3 = np.int64(0); f4 = np.int64(0); f5 = np.int64(0)
                for d in range(6):
                    if d == 0:
                        o = c + L2 * L3
                    elif d == 1:
                        o = c - L2 * L3
                    elif d == 2:
                        o = c + L3
                    elif d == 3:
                        o = c - L3
                    elif d == 4:
                        o = c + 1
                    else:
                        o = c - 1
                    if core[o] and not occ[o]:
                        if nf == 0:
                            f0 = o
                        elif nf == 1:
                            f1 = o
                        elif nf == 2:
                            f2 = o
                        elif nf == 3:
                            f3 = o
                        elif nf == 4:
                            f4 = o
                        else:
                            f5 = o
                        nf += 1
                if nf > 0:
                    r = np.int64(_xs_next(state) % np.uint64(nf))
                    if r == 0:
                        b = f0
                    elif r == 1:
                        b = f1
                    elif r == 2:
                        b = f2
                    elif r == 3:
                        b = f3
                    elif r == 4:
                        b = f4
                    else:
                        b = f5
                    break
        else:
            r = np.int64(_xs_next(state) % np.uint64(ne))
            if r == 0:
                b = e0
            elif r == 1:
                b = e1
            elif r == 2:
                b = e2
            elif r == 3:
                b = e3
            elif r == 4:
                b = e4
            else:
                b = e5
        if b < 0 or b == a:
            continue
        xa = a // (L2 * L3); ya = (a // L3) % L2; za = a % L3
        xb = b // (L2 * L3); yb = (b // L3) % L2; zb = b % L3
        kab = K[xb - xa + L1 - 1, yb - ya + L2 - 1, zb - za + L3 - 1]
        dV = 2.0 * h2n * (phi[xb, yb, zb] - kab - phi[xa, ya, za] + K0)
        dPa = _flip3(a, occ, code, W, us, g, L2, L3, h, golda)
        dPb = _flip3(b, occ, code, W, us, g, L2, L3, h, goldb)
        dE = dPa + dPb + dV
        if dE <= 0.0 or _uniform(state) < math.exp(-dE / T):
            E += dE
            if E < best:
                best = E
            i = pos[a]
            pos[a] = -1
            idx[i] = b
            pos[b] = i
            _phi_add3(phi, K, xb, yb, zb, 1.0, L1, L2, L3)
            _phi_add3(phi, K, xa, ya, za, -1.0, L1, L2, L3)
            acc += 1
        else:
            _unflip3(b, occ, code, us, g, L2, L3, goldb)
            _unflip3(a, occ, code, us, g, L2, L3, golda)
    return acc, E, best


@njit(cache=True)
def _flip2(f, occ, code, W, us, g, L2, h, gold):
    x = f // L2
    y = f % L2
    s = -1.0 if occ[f] else 1.0
    dc = 0.0
    for dx in range(2):
        for dy in range(2):
            j = (x - dx) * (L2 - 1) + (y - dy)
            bit = 1 << (dx * 2 + dy)
            old = code[j]
            new = old - bit if s < 0 else old + bit
            code[j] = new
            dc += W[new] - W[old]
    occ[f] = not occ[f]
    bump = s / 9.0
    for i in range(x - 1, x + 2):
        for j in range(y - 1, y + 2):
            us[i, j] += bump
    dtv = 0.0
    for i in range(5):
        for j in range(5):
            xi = x - 2 + i
            yj = y - 2 + j
            gx = us[xi + 1, yj] - us[xi - 1, yj]
            gy = us[xi, yj + 1] - us[xi, yj - 1]
            gn = math.sqrt(gx * gx + gy * gy)
            gold[i, j] = g[xi, yj]
            dtv += gn - gold[i, j]
            g[xi, yj] = gn
    return 0.5 * (dc * h + dtv * h * 0.5)


@njit(cache=True)
def _unflip2(f, occ, code, us, g, L2, gold):
    x = f // L2
    y = f % L2
    s = -1.0 if occ[f] else 1.0
    for dx in range(2):
        for dy in range(2):
            j = (x - dx) * (L2 - 1) + (y - dy)
            bit = 1 << (dx * 2 + dy)
            code[j] = code[j] - bit if s < 0 else code[j] + bit
    occ[f] = not occ[f]
    bump = s / 9.0
    for i in range(x - 1, x + 2):
        for j in range(y - 1, y + 2):
            us[i, j] += bump
    for i in range(5):
        for j in range(5):
            g[x - 2 + i, y - 2 + j] = gold[i, j]


@njit(cache=True)
def _phi_add2(phi, K, xb, yb, sign, L1, L2):
    for i in range(L1):
        ki = L1 - 1 - xb + i
        for j in range(L2):
            phi[i, j] += sign * K[ki, L2 - 1 - yb + j]


@njit(cache=True)
def _chunk2(occ, core, phi, K, code, W, us, g, idx, pos, state,
            L1, L2, h, K0, n_prop, move0, T0, decay,
            p_far, E0, best0, golda, goldb):
    N = idx.shape[0]
    h2n = h ** 4
    E = E0
    best = best0
    acc = 0
    T = T0 * decay ** (move0 // N)
    for p in range(n_prop):
        mv = move0 + p
        if mv % N == 0:
            T = T0 * decay ** (mv // N)
        a = np.int64(-1)
        ne = 0
        e0 = np.int64(0); e1 = np.int64(0); e2 = np.int64(0); e3 = np.int64(0)
        for _ in range(64):
            cand = idx[np.int64(_xs_next(state) % np.uint64(N))]
            ne = 0
            for d in range(4):
                if d == 0:
                    o = cand + L2
                elif d == 1:
                    o = cand - L2
                elif d == 2:
                    o = cand + 1
                else:
                    o = cand - 1
                if core[o] and not occ[o]:
                    if ne == 0:
                        e0 = o
                    elif ne == 1:
                        e1 = o
                    elif ne == 2:
                        e2 = o
                    else:
                        e3 = o
                    ne += 1
            if ne > 0:
                a = cand
                break
        if a < 0:
            continue
        b = np.int64(-1)
        if _uniform(state) < p_far:
            for _ in range(64):
                c = idx[np.int64(_xs_next(state) % np.uint64(N))]
                nf = 0
                f0 = np.int64(0); f1 = np.int64(0); f2 = np.int64(0); f3 = np.int64(0)
                for d in range(4):
                    if d == 0:
                        o = c + L2
                    elif d == 1:
                        o = c - L2
                    elif d == 2:
                        o = c + 1
                    else:
                        o = c - 1
                    if core[o] and not occ[o]:
                        if nf == 0:
                            f0 = o
                        elif nf == 1:
                            f1 = o
                        elif nf == 2:
                            f2 = o
                        else:
                            f3 = o
                        nf += 1
                if nf > 0:
                    r = np.int64(_xs_next(state) % np.uint64(nf))
                    if r == 0:
                        b = f0
                    elif r == 1:
                        b = f1
                    elif r == 2:
                        b = f2
                    else:
                        b = f3
                    break
        else:
            r = np.int64(_xs_next(state) % np.uint64(ne))
            if r == 0:
                b = e0
            elif r == 1:
                b = e1
            elif r == 2:
                b = e2
            else:
                b = e3
        if b < 0 or b == a:
            continue
        xa = a // L2; ya = a % L2
        xb = b // L2; yb = b % L2
        kab = K[xb - xa + L1 - 1, yb - ya + L2 - 1]
        dV = 2.0 * h2n * (phi[xb, yb] - kab - phi[xa, ya] + K0)
        dPa = _flip2(a, occ, code, W, us, g, L2, h, golda)
        dPb = _flip2(b, occ, code, W, us, g, L2, h, goldb)
        dE = dPa + dPb + dV
        if dE <= 0.0 or _uniform(state) < math.exp(-dE / T):
            E += dE
            if E < best:
                best = E
            i = pos[a]
            pos[a] = -1
            idx[i] = b
            pos[b] = i
            _phi_add2(phi, K, xb, yb, 1.0, L1, L2)
            _phi_add2(phi, K, xa, ya, -1.0, L1, L2)
            acc += 1
        else:
            _unflip2(b, occ, code, us, g, L2, goldb)
            _unflip2(a, occ, code, us, g, L2, golda)
    return acc, E, best


def _config_codes(occ: np.ndarray) -> np.ndarray:
    n = occ.ndim
    shp = tuple(d - 1 for d in occ.shape)
    code = np.zeros(shp, np.int64)
    for bits in range(2**n):
        off = [(bits >> (n - 1 - ax)) & 1 for ax in range(n)]
        sl = tuple(slice(o, d - 1 + o) for o, d in zip(off, occ.shape))
        # bit position of sub-cell (o_0, ..., o_{n-1}) is sum o_ax 2^(n-1-ax),
        # matching the per-flip updates in _flip3/_flip2
        pos = sum(o << (n - 1 - ax) for ax, o in enumerate(off))
        code |= occ[sl].astype(np.int64) << pos
    return code


def _gmag(us: np.ndarray) -> np.ndarray:
    g2 = np.zeros_like(us)
    for ax in range(us.ndim):
        d = np.zeros_like(us)
        lo = [slice(1, -1) if a == ax else slice(None) for a in range(us.ndim)]
        hi = [slice(2, None) if a == ax else slice(None) for a in range(us.ndim)]
        lo2 = [slice(None, -2) if a == ax else slice(None) for a in range(us.ndim)]
        d[tuple(lo)] = us[tuple(hi)] - us[tuple(lo2)]
        g2 += d * d
    return np.sqrt(g2)


def blend_perimeter(s: GridSet) -> float:
    """The annealer's internal perimeter estimator, evaluated from scratch:
    mean of the configuration-weight area and the smoothed-TV area."""
    occ = np.pad(s.cells, 2)
    W = _W3 if s.n == 3 else _W2
    code = _config_codes(occ)
    pc = float(W[code.ravel()].sum()) * s.h ** (s.n - 1)
    us = ndimage.uniform_filter(occ.astype(float), size=3, mode="constant")
    pt = float(_gmag(us).sum()) * s.h ** (s.n - 1) * 0.5
    return 0.5 * (pc + pt)


def anneal_energy(s: GridSet, k: Kernel) -> EnergyBreakdown:
    """Energy with the annealer's own perimeter estimator and the exact
    direct interaction sum; matches the internal trace bookkeeping."""
    from .riesz import nonlocal_energy
    from .grid import volume

    P = blend_perimeter(s)
    V = nonlocal_energy(s, k, method="direct")
    return EnergyBreakdown(P=P, V=V, E=P + V, m=volume(s), kernel=k)


def _kernel_table_full(dims, h: float, alpha: float, K0: float) -> np.ndarray:
    offs = [np.abs(np.arange(-(d - 1), d, dtype=np.float64)) * h for d in dims]
    grids = np.meshgrid(*offs, indexing="ij")
    r2 = sum(g * g for g in grids)
    with np.errstate(divide="ignore"):
        K = np.where(r2 > 0, r2 ** (-alpha / 2.0), 0.0)
    K[tuple(d - 1 for d in dims)] = K0
    return K


def _potential_table_units(occ: np.ndarray, h: float, alpha: float,
                           K0: float) -> np.ndarray:
    dims = occ.shape
    p2 = [next_fast_len(2 * d) for d in dims]
    ks = [np.minimum(np.arange(p), p - np.arange(p)).astype(float) * h for p in p2]
    grids = np.meshgrid(*ks, indexing="ij")
    r2 = sum(g * g for g in grids)
    with np.errstate(divide="ignore"):
        Kf = np.where(r2 > 0, r2 ** (-alpha / 2.0), 0.0)
    Kf[(0,) * occ.ndim] = K0
    u = np.zeros(p2)
    u[tuple(slice(0, d) for d in dims)] = occ
    out = irfftn(rfftn(u) * rfftn(Kf), p2)
    return out[tuple(slice(0, d) for d in dims)].copy()


def anneal(init: GridSet, cfg: AnnealConfig) -> MinimizeResult:
    """Metropolis annealing from `init` at exactly cfg.target_cells cells.

    The array extent of `init` (plus a fixed halo) is the search domain;
    embed the start set in a wide box to leave room for topology changes.
    Deterministic given cfg.seed. budget = 0 returns init unchanged.
    """
    n = init.n
    if n not in (2, 3):
        raise LdlabError("annealing supports n in {2, 3}")
    N = init.count()
    if N != cfg.target_cells:
        raise MassMismatch(
            f"init has {N} cells, config targets {cfg.target_cells}")
    k = cfg.kernel
    if k.n != n:
        raise MassMismatch(f"kernel dimension {k.n} vs set dimension {n}")
    h = init.h
    occ = np.pad(init.cells, PAD)
    dims = occ.shape
    if np.prod(dims) > _MAX_BOX:
        raise BoxTooSmall(f"annealing box {dims} beyond desk scale")
    K0 = self_energy(n, k.alpha) * h ** (-k.alpha)
    W = _W3 if n == 3 else _W2

    code = _config_codes(occ).ravel()
    us = ndimage.uniform_filter(occ.astype(float), size=3, mode="constant")
    g = _gmag(us)
    phi = _potential_table_units(occ, h, k.alpha, K0)
    occf = occ.ravel()
    idx = np.flatnonzero(occf).astype(np.int64)
    pos = np.full(occf.size, -1, dtype=np.int64)
    pos[idx] = np.arange(N)
    core = np.zeros(dims, bool)
    core[(slice(PAD, -PAD),) * n] = True
    coref = core.ravel()

    h2n = h ** (2 * n)
    Pc = float(W[code].sum()) * h ** (n - 1)
    Pt = float(g.sum()) * h ** (n - 1) * 0.5
    V = float(h2n * phi.ravel()[idx].sum())
    E = 0.5 * (Pc + Pt) + V
    best = E

    t0 = cfg.t0 if cfg.t0 is not None else 0.5 * h ** (n - 1)
    p_far = cfg.w_far / (cfg.w_boundary + cfg.w_far)
    snap = cfg.snapshot_every if cfg.snapshot_every is not None else max(N, 1)
    state = np.array([_seed_state(cfg.seed)], dtype=np.uint64)

    def breakdown():
        # P/V from telescoped counters; cheap and exact to ~1e-13
        return EnergyBreakdown(P=E - V, V=V, E=E, m=N * h**n, kernel=k)

    trace = [breakdown()]
    done = 0
    accepts = 0
    golda = np.zeros((5,) * n)
    goldb = np.zeros((5,) * n)
    while done < cfg.budget:
        step = min(snap, cfg.budget - done)
        K = _K_CACHE(dims, h, k.alpha, K0)
        if n == 3:
            acc, E, best = _chunk3(
                occf, coref, phi, K, code, W, us, g, idx, pos, state,
                dims[0], dims[1], dims[2], h, K0,
                step, done, t0, cfg.decay, p_far, E, best, golda, goldb)
        else:
            acc, E, best = _chunk2(
                occf, coref, phi, K, code, W, us, g, idx, pos, state,
                dims[0], dims[1], h, K0,
                step, done, t0, cfg.decay, p_far, E, best, golda, goldb)
        accepts += acc
        done += step
        V = float(h2n * phi.ravel()[idx].sum())
        trace.append(breakdown())

    inner = (slice(PAD, -PAD),) * n
    final = GridSet(occf.reshape(dims)[inner].copy(), h, init.origin)
    result = MinimizeResult(
        final=final,
        trace=trace,
        best_energy=best,
        fraenkel=fraenkel_to_ball(final),
        components=component_count(final),
        accept_ratio=accepts / max(1, cfg.budget),
    )
    return result


def _seed_state(seed: int) -> np.uint64:
    mask = 0xFFFFFFFFFFFFFFFF
    z = (seed + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    z ^= z >> 31
    return np.uint64(z if z != 0 else 0x9E3779B97F4A7C15)


_K_TABLES: dict = {}


def _K_CACHE(dims, h, alpha, K0):
    key = (dims, h, alpha)
    if key not in _K_TABLES:
        if np.prod([2 * d - 1 for d in dims]) > 2 * 10**8:
            raise BoxTooSmall("kernel table beyond desk scale")
        _K_TABLES[key] = _kernel_table_full(dims, h, alpha, K0)
        if len(_K_TABLES) > 4:
            _K_TABLES.pop(next(iter(_K_TABLES)))
    return _K_TABLES[key]
