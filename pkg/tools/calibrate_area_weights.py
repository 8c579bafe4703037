"""Recalibrate the local-configuration surface-area weights.

Pipeline (3D; the 2D case is the same with squares and chords):
  1. group the 256 corner configurations of a 2x2x2 block into orbit
     classes under the 48 cube symmetries plus complement (14 classes);
  2. digitize half-spaces over a mix of special and random orientations,
     count configuration classes, and measure the exact clipped plane
     area in the same window;
  3. least squares, bounded below by 0.25, for the per-class weight so
     that the weighted class counts reproduce the plane areas. Only the
     linearly separable classes ever occur on a half-space boundary;
     the fit determines those.
  4. the non-separable classes (checkerboards, diagonal pairs, opposite
     edges) keep their conventional penalty values from the frozen
     module: they never arise from a clean interface, and their weights
     only need to be positive and roughly patch-sized so that isolated
     cells and sponge textures always pay area (annealing must not
     disperse for free).

Run from the repository root:
    python tools/calibrate_area_weights.py [--write]

Without --write it reports fit quality and the drift against the frozen
arrays in src/ldlab/_area_weights.py; with --write it rewrites that
module in place. Refits of the separable classes drift by a few parts
in 1e3 with the orientation sample.
"""

import argparse
import sys
from itertools import permutations, product
from pathlib import Path

import numpy as np


sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

FLOOR = 0.25


# ---------------------------------------------------------------- classes

def cube_classes():
    corners = np.array(list(product((0, 1), (0, 1), (0, 1))))
    bit = lambda c: c[0] * 4 + c[1] * 2 + c[2]
    rots = []
    for perm in permutations(range(3)):
        for signs in product((1, -1), repeat=3):
            M = np.zeros((3, 3), int)
            for i, (p, s) in enumerate(zip(perm, signs)):
                M[i, p] = s
            rots.append(M)
    class_of = np.full(256, -1, int)
    n_cls = 0
    for cfg in range(256):
        if class_of[cfg] >= 0:
            continue
        orb = set()
        for M in rots:
            mapped = 0
            for c in corners:
                cc = (M @ (2 * c - 1) + 1) // 2
                if (cfg >> bit(c)) & 1:
                    mapped |= 1 << bit(cc)
            orb.add(mapped)
            orb.add(mapped ^ 0xFF)
        for o in orb:
            class_of[o] = n_cls
        n_cls += 1
    return class_of, n_cls, corners


def square_classes():
    corners = np.array(list(product((0, 1), (0, 1))))
    bit = lambda c: c[0] * 2 + c[1]
    rots = []
    for perm in permutations(range(2)):
        for signs in product((1, -1), repeat=2):
            M = np.zeros((2, 2), int)
            for i, (p, s) in enumerate(zip(perm, signs)):
                M[i, p] = s
            rots.append(M)
    class_of = np.full(16, -1, int)
    n_cls = 0
    for cfg in range(16):
        if class_of[cfg] >= 0:
            continue
        orb = set()
        for M in rots:
            mapped = 0
            for c in corners:
                cc = (M @ (2 * c - 1) + 1) // 2
                if (cfg >> bit(c)) & 1:
                    mapped |= 1 << bit(cc)
            orb.add(mapped)
            orb.add(mapped ^ 0xF)
        for o in orb:
            class_of[o] = n_cls
        n_cls += 1
    return class_of, n_cls, corners


# ----------------------------------------------- exact clipped plane area

def plane_box_area(nrm, c, L):
    """Area of the plane {x.nrm = c} clipped to the box [0, L]^3."""
    pts = []
    for a in range(3):
        for u in (0, L):
            for v in (0, L):
                p0 = np.zeros(3)
                p1 = np.zeros(3)
                p0[a], p1[a] = 0, L
                o = [b for b in range(3) if b != a]
                p0[o[0]] = p1[o[0]] = u
                p0[o[1]] = p1[o[1]] = v
                d0, d1 = p0 @ nrm - c, p1 @ nrm - c
                if d0 == d1:
                    continue
                t = d0 / (d0 - d1)
                if 0 <= t <= 1:
                    pts.append(p0 + t * (p1 - p0))
    if len(pts) < 3:
        return 0.0
    P = np.unique(np.round(np.array(pts), 12), axis=0)
    if len(P) < 3:
        return 0.0
    ctr = P.mean(0)
    t1 = P[0] - ctr
    t1 -= (t1 @ nrm) * nrm
    if np.linalg.norm(t1) < 1e-12:
        return 0.0
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(nrm, t1)
    ang = np.arctan2((P - ctr) @ t2, (P - ctr) @ t1)
    P = P[np.argsort(ang)]
    return 0.5 * sum(
        np.linalg.norm(np.cross(P[i] - ctr, P[(i + 1) % len(P)] - ctr))
        for i in range(len(P)))


def chord_box_length(nrm, c, L):
    """Length of the line {x.nrm = c} clipped to the square [0, L]^2."""
    pts = []
    for a in range(2):
        for u in (0, L):
            p0 = np.zeros(2)
            p1 = np.zeros(2)
            p0[a], p1[a] = 0, L
            o = 1 - a
            p0[o] = p1[o] = u
            d0, d1 = p0 @ nrm - c, p1 @ nrm - c
            if d0 == d1:
                continue
            t = d0 / (d0 - d1)
            if 0 <= t <= 1:
                pts.append(p0 + t * (p1 - p0))
    if len(pts) < 2:
        return 0.0
    P = np.unique(np.round(np.array(pts), 12), axis=0)
    if len(P) < 2:
        return 0.0
    return float(np.linalg.norm(P[-1] - P[0]))


# ------------------------------------------------------- half-space rows

def halfspace_rows_3d(class_of, n_cls, corners, rng, L=24, n_orient=240,
                      n_offsets=16):
    special = [(1, 0, 0), (1, 1, 0), (1, 1, 1), (2, 1, 0), (2, 1, 1),
               (2, 2, 1), (3, 1, 0), (3, 1, 1), (3, 2, 0), (3, 2, 1),
               (3, 2, 2), (3, 3, 1), (4, 1, 0), (4, 3, 0), (5, 1, 1),
               (1, 1, 2)]
    g = np.arange(L) + 0.5
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    rows, areas = [], []
    for i in range(n_orient):
        if i < len(special):
            nrm = np.array(special[i], float)
        else:
            nrm = rng.standard_normal(3)
        nrm /= np.linalg.norm(nrm)
        proj = X * nrm[0] + Y * nrm[1] + Z * nrm[2]
        pr = np.array([(u, v, w) for u in (0.5, L - 0.5)
                       for v in (0.5, L - 0.5)
                       for w in (0.5, L - 0.5)]) @ nrm
        for j in range(n_offsets):
            c = pr.min() + (0.3 + 0.4 * (j + rng.random()) / n_offsets) \
                * (pr.max() - pr.min())
            occ = proj < c
            code = np.zeros((L - 1,) * 3, np.int64)
            for dx, dy, dz in corners:
                code |= (occ[dx:L - 1 + dx, dy:L - 1 + dy, dz:L - 1 + dz]
                         .astype(np.int64) << (dx * 4 + dy * 2 + dz))
            A = plane_box_area(nrm, c - 0.5 * nrm.sum(), L - 1.0)
            if A < 30.0:
                continue
            cnt = np.bincount(code.ravel(), minlength=256)
            row = np.zeros(n_cls)
            for cfg in np.nonzero(cnt)[0]:
                row[class_of[cfg]] += cnt[cfg]
            rows.append(row)
            areas.append(A)
    return np.array(rows), np.array(areas)


def halfspace_rows_2d(class_of, n_cls, corners, rng, L=96, n_orient=180,
                      n_offsets=12):
    g = np.arange(L) + 0.5
    X, Y = np.meshgrid(g, g, indexing="ij")
    rows, lens = [], []
    for i in range(n_orient):
        ang = np.pi * (i + rng.random()) / n_orient
        nrm = np.array([np.cos(ang), np.sin(ang)])
        proj = X * nrm[0] + Y * nrm[1]
        pr = np.array([(u, v) for u in (0.5, L - 0.5)
                       for v in (0.5, L - 0.5)]) @ nrm
        for j in range(n_offsets):
            c = pr.min() + (0.3 + 0.4 * (j + rng.random()) / n_offsets) \
                * (pr.max() - pr.min())
            occ = proj < c
            code = np.zeros((L - 1,) * 2, np.int64)
            for dx, dy in corners:
                code |= (occ[dx:L - 1 + dx, dy:L - 1 + dy]
                         .astype(np.int64) << (dx * 2 + dy))
            ln = chord_box_length(nrm, c - 0.5 * nrm.sum(), L - 1.0)
            if ln < 10.0:
                continue
            cnt = np.bincount(code.ravel(), minlength=16)
            row = np.zeros(n_cls)
            for cfg in np.nonzero(cnt)[0]:
                row[class_of[cfg]] += cnt[cfg]
            rows.append(row)
            lens.append(ln)
    return np.array(rows), np.array(lens)


# ------------------------------------------------------------------ main

def _bounded_fit(rows, targets, fit_mask, n_cls):
    from scipy.optimize import lsq_linear

    A = rows[:, fit_mask] / targets[:, None]
    res = lsq_linear(A, np.ones(len(rows)),
                     bounds=(FLOOR, np.inf), tol=1e-12)
    w_class = np.zeros(n_cls)
    w_class[fit_mask] = res.x
    err = rows @ w_class / targets - 1.0
    return w_class, err


def calibrate(write: bool) -> int:
    from ldlab._area_weights import AREA_W2, AREA_W3

    rng = np.random.default_rng(42)

    class3, n3, corners3 = cube_classes()
    rows3, areas3 = halfspace_rows_3d(class3, n3, corners3, rng)
    observed3 = rows3.sum(0) > 0
    fit3 = observed3.copy()
    fit3[class3[0]] = False  # uniform class pays nothing
    w_class3, err3 = _bounded_fit(rows3, areas3, fit3, n3)
    print(f"3D plane fit: {int(fit3.sum())} separable classes, residual "
          f"rms {100 * np.sqrt((err3 ** 2).mean()):.3f}% "
          f"max {100 * np.abs(err3).max():.3f}%")

    W3 = w_class3[class3]
    for cfg in range(256):
        cls = class3[cfg]
        if cls == class3[0]:
            W3[cfg] = 0.0
        elif not observed3[cls]:
            W3[cfg] = AREA_W3[cfg]  # conventional penalty, kept

    class2, n2, corners2 = square_classes()
    rows2, lens2 = halfspace_rows_2d(class2, n2, corners2, rng)
    observed2 = rows2.sum(0) > 0
    fit2 = observed2.copy()
    fit2[class2[0]] = False
    w_class2, err2 = _bounded_fit(rows2, lens2, fit2, n2)
    print(f"2D line fit: {int(fit2.sum())} separable classes, residual "
          f"rms {100 * np.sqrt((err2 ** 2).mean()):.3f}% "
          f"max {100 * np.abs(err2).max():.3f}%")

    W2 = w_class2[class2]
    for cfg in range(16):
        cls = class2[cfg]
        if cls == class2[0]:
            W2[cfg] = 0.0
        elif not observed2[cls]:
            W2[cfg] = AREA_W2[cfg]

    d3 = np.abs(W3 - AREA_W3)
    d2 = np.abs(W2 - AREA_W2)
    print(f"drift vs frozen: 3D max {d3.max():.4f} "
          f"(at code {int(d3.argmax())}), 2D max {d2.max():.4f}")

    if write:
        path = Path(__file__).resolve().parent.parent / "src/ldlab/_area_weights.py"
        old = path.read_text()
        head = old.split('AREA_W3 = np.array([')[0]
        body3 = ",\n".join(
            "    " + ", ".join(f"{W3[i + j]:.8f}" for j in range(6)
                               if i + j < 256)
            for i in range(0, 256, 6))
        body2 = ",\n".join(
            "    " + ", ".join(f"{W2[i + j]:.8f}" for j in range(6)
                               if i + j < 16)
            for i in range(0, 16, 6))
        path.write_text(
            head + "AREA_W3 = np.array([\n" + body3 + ",\n])\n\n"
            + "AREA_W2 = np.array([\n" + body2 + ",\n])\n")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--write", action="store_true",
                    help="rewrite src/ldlab/_area_weights.py in place")
    sys.exit(calibrate(ap.parse_args().write))
