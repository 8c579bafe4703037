"""Binary lattice sets and their geometric measurements.

A GridSet is the discrete stand-in for a set of finite perimeter: a binary
occupancy array on a regular n-dimensional lattice (n in {2, 3}) with spacing
h and a physical origin at the center of cell (0, ..., 0). Cells are kept
strictly inside the array (one-cell empty margin) so no operation ever sees
mass touching the boundary.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptySet, LdlabError

RASTER_MAGIC = "LDLAB1"


@dataclass(frozen=True)
class BoxDomain:
    """Physical box holding a grid. Periodic padding is allowed internally for
    convolution only; energy semantics are always non-periodic."""

    extents: tuple
    periodic: bool = False

    def __post_init__(self):
        if any(e <= 0 for e in self.extents):
            raise LdlabError("box extents must be positive")


@dataclass
class GridSet:
    """Binary indicator on a regular lattice.

    cells is a boolean array of the given shape; h the physical spacing;
    origin the physical coordinate of the center of cell (0, ..., 0).
    """

    cells: np.ndarray
    h: float
    origin: tuple = None

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=bool)
        if self.cells.ndim not in (2, 3):
            raise LdlabError("only n in {2, 3} grids are supported")
        if self.h <= 0:
            raise LdlabError("spacing h must be positive")
        if self.origin is None:
            self.origin = (0.0,) * self.cells.ndim
        self.origin = tuple(float(o) for o in self.origin)
        self._enforce_margin()

    @property
    def n(self) -> int:
        return self.cells.ndim

    @property
    def shape(self) -> tuple:
        return self.cells.shape

    def _enforce_margin(self):
        """Grow the array if any occupied cell touches the boundary layer."""
        if not self.cells.any():
            return
        occ = np.argwhere(self.cells)
        lo = occ.min(axis=0)
        hi = occ.max(axis=0)
        pad_lo = np.maximum(1 - lo, 0)
        pad_hi = np.maximum(hi - (np.array(self.shape) - 2), 0)
        if pad_lo.any() or pad_hi.any():
            self.cells = np.pad(self.cells, list(zip(pad_lo, pad_hi)))
            self.origin = tuple(
                o - p * self.h for o, p in zip(self.origin, pad_lo)
            )

    def cell_centers(self):
        """Physical coordinates of occupied cell centers, (k, n)."""
        return np.argwhere(self.cells) * self.h + np.array(self.origin)

    def copy(self) -> "GridSet":
        return GridSet(self.cells.copy(), self.h, self.origin)

    def count(self) -> int:
        return int(self.cells.sum())


def volume(s: GridSet) -> float:
    """Occupied-cell count times h^n, exactly."""
    return s.count() * s.h**s.n


def facet_perimeter(s: GridSet) -> float:
    """h^(n-1) times the number of occupied/empty face adjacencies.

    Exact for axis-aligned unions of cells; overestimates smooth boundaries
    (the l^1 surface measure).
    """
    c = s.cells
    faces = 0
    for ax in range(c.ndim):
        sl_a = [slice(None)] * c.ndim
        sl_b = [slice(None)] * c.ndim
        sl_a[ax] = slice(1, None)
        sl_b[ax] = slice(None, -1)
        faces += int((c[tuple(sl_a)] != c[tuple(sl_b)]).sum())
        # array boundary counts as empty; the enforced margin makes these 0,
        # but count anyway so partially constructed arrays stay consistent
        sl_a[ax] = 0
        sl_b[ax] = -1
        faces += int(c[tuple(sl_a)].sum()) + int(c[tuple(sl_b)].sum())
    return faces * s.h ** (c.ndim - 1)


def perimeter(s: GridSet, method: str = "surface_mesh") -> float:
    """Perimeter estimate.

    method='facet': exact rectilinear face count.
    method='surface_mesh': area of the half-level isosurface of the indicator
    smoothed by one 3^n box-filter pass (marching cubes / squares); the
    default for energies, asymptotically consistent on C^1 boundaries.
    """
    if method == "facet":
        return facet_perimeter(s)
    if method == "surface_mesh":
        from .mesh import mesh_perimeter

        return mesh_perimeter(s)
    raise LdlabError(f"unknown perimeter method {method!r}")


def essential_diameter(s: GridSet) -> float:
    """Maximum Euclidean distance between occupied cell centers.

    All-pairs over the convex hull corner candidates; exact at desk scale.
    """
    if not s.cells.any():
        raise EmptySet("diameter of empty set")
    pts = np.argwhere(s.cells).astype(float)
    # reduce candidates: only extreme cells per direction sample can realize
    # the diameter; at desk scale a direct reduction over axis extremes plus
    # hull-ish filtering is unnecessary -- do blocked all-pairs on the
    # boundary cells only
    er = ndimage.binary_erosion(s.cells)
    bpts = np.argwhere(s.cells & ~er).astype(float)
    if len(bpts) == 0:
        bpts = pts
    best = 0.0
    step = 2048
    for i in range(0, len(bpts), step):
        blk = bpts[i : i + step]
        d2 = ((blk[:, None, :] - bpts[None, :, :]) ** 2).sum(axis=2)
        best = max(best, float(d2.max()))
    return np.sqrt(best) * s.h


def components(s: GridSet) -> list:
    """Face-connected components, each as a GridSet on the same lattice."""
    structure = ndimage.generate_binary_structure(s.n, 1)
    lab, ncomp = ndimage.label(s.cells, structure=structure)
    out = []
    for k in range(1, ncomp + 1):
        out.append(GridSet(lab == k, s.h, s.origin))
    return out


def component_count(s: GridSet) -> int:
    structure = ndimage.generate_binary_structure(s.n, 1)
    _, ncomp = ndimage.label(s.cells, structure=structure)
    return int(ncomp)


def _slab_offset(s: GridSet, axis: int):
    """Lattice index of the first occupied slice along axis."""
    occ = np.argwhere(s.cells)
    if len(occ) == 0:
        return 0
    return int(occ[:, axis].min())


def cross_section_mass(s: GridSet, axis: int, t: float) -> float:
    """Volume of the sub-slab 0 < x.e_axis < t, measured from the set's
    bounding-box minimum along that axis. Monotone nondecreasing in t."""
    if axis < 0 or axis >= s.n:
        raise LdlabError("axis out of range")
    if t <= 0 or not s.cells.any():
        return 0.0
    i0 = _slab_offset(s, axis)
    # cells whose centers lie within distance t past the lower face of the
    # first occupied slice
    nslices = int(np.floor(t / s.h + 0.5))
    sl = [slice(None)] * s.n
    sl[axis] = slice(i0, i0 + nslices)
    return float(s.cells[tuple(sl)].sum()) * s.h**s.n


def cross_section_area(s: GridSet, axis: int, t: float) -> float:
    """h^(n-1) times the occupied count of the lattice slice nearest t;
    the discrete forward-difference derivative of cross_section_mass."""
    if axis < 0 or axis >= s.n:
        raise LdlabError("axis out of range")
    if not s.cells.any():
        return 0.0
    i0 = _slab_offset(s, axis)
    k = i0 + int(np.floor(t / s.h + 0.5))
    if k < 0 or k >= s.shape[axis]:
        return 0.0
    sl = [slice(None)] * s.n
    sl[axis] = k
    return float(s.cells[tuple(sl)].sum()) * s.h ** (s.n - 1)


def refine(s: GridSet, factor: int = 2) -> GridSet:
    """Split every cell into factor^n subcells (same physical set, finer h).

    Cell (i,...) center maps to the block of subcell centers straddling it;
    the physical origin shifts by h/2 - h'/2 so the set is unchanged.
    """
    cells = s.cells
    for ax in range(s.n):
        cells = np.repeat(cells, factor, axis=ax)
    h2 = s.h / factor
    origin = tuple(o - (s.h - h2) / 2 for o in s.origin)
    return GridSet(cells, h2, origin)


def embed(s: GridSet, shape: tuple) -> GridSet:
    """Recenter the occupied cells inside a larger array of the given shape
    (same h; origin adjusted so physical positions are unchanged)."""
    if len(shape) != s.n:
        raise LdlabError("embed shape dimensionality mismatch")
    occ = np.argwhere(s.cells)
    if occ.size == 0:
        raise EmptySet("cannot embed an empty set")
    lo = occ.min(axis=0)
    hi = occ.max(axis=0)
    ext = hi - lo + 1
    if any(int(e) + 2 > d for e, d in zip(ext, shape)):
        raise LdlabError("embed target shape smaller than the set")
    start = [(d - int(e)) // 2 for d, e in zip(shape, ext)]
    cells = np.zeros(shape, dtype=bool)
    cells[tuple((occ - lo + np.array(start)).T)] = True
    origin = tuple(o + (int(l) - st) * s.h
                   for o, l, st in zip(s.origin, lo, start))
    return GridSet(cells, s.h, origin)


def dump_raster(s: GridSet, path) -> None:
    """Write the documented raster format: ASCII header + flat 0/1 bytes."""
    shape = ",".join(str(d) for d in s.shape)
    origin = ",".join(repr(float(o)) for o in s.origin)
    header = f"{RASTER_MAGIC} n={s.n} shape={shape} h={s.h!r} origin={origin}\n"
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(np.ascontiguousarray(s.cells, dtype=np.uint8).tobytes())


def load_raster(path) -> GridSet:
    """Read the format written by dump_raster."""
    with open(path, "rb") as f:
        header = f.readline().decode("ascii").strip()
        body = f.read()
    fields = header.split()
    if not fields or fields[0] != RASTER_MAGIC:
        raise LdlabError(f"not a {RASTER_MAGIC} raster: {path}")
    kv = dict(tok.split("=", 1) for tok in fields[1:])
    n = int(kv["n"])
    shape = tuple(int(x) for x in kv["shape"].split(","))
    h = float(kv["h"])
    origin = tuple(float(x) for x in kv["origin"].split(","))
    if len(shape) != n or len(origin) != n:
        raise LdlabError("raster header shape/origin arity mismatch")
    expect = int(np.prod(shape))
    if len(body) != expect:
        raise LdlabError(f"raster payload length {len(body)} != {expect}")
    cells = np.frombuffer(body, dtype=np.uint8).reshape(shape).astype(bool)
    return GridSet(cells, h, origin)


def dumps_raster(s: GridSet) -> bytes:
    buf = io.BytesIO()
    shape = ",".join(str(d) for d in s.shape)
    origin = ",".join(repr(float(o)) for o in s.origin)
    header = f"{RASTER_MAGIC} n={s.n} shape={shape} h={s.h!r} origin={origin}\n"
    buf.write(header.encode("ascii"))
    buf.write(np.ascontiguousarray(s.cells, dtype=np.uint8).tobytes())
    return buf.getvalue()
