"""Exact dyadic cube geometry and Whitney decomposition of lattice-open sets.

All geometry here is integer arithmetic in lattice-cell units.  A cell is
one lattice cell (side h); a dyadic cube of generation j covers a
2^(m-j)-cell block of the root cube, N = 2^m.  Distances between cubes
and the complement are Euclidean box-to-box distances whose squares are
integers in cell units, so every Whitney inequality below is decided by
exact integer comparison:

    d * l(Q)^2  <=  dist(Q, G^c)^2  <=  16 * d * l(Q)^2      (l in cells)

The decomposition emits maximal dyadic cubes contained in G whose
distance to the complement clears the lower bound; a failed parent then
forces the upper bound.  Cells adjacent to the complement are emitted at
the finest generation, where the lower bound is not asserted (the
continuum construction has no finest scale; the lattice one caps there).
The complement is taken relative to the root cube.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import GridSpec

__all__ = [
    "DyadicCube",
    "WhitneyCover",
    "WhitneyReport",
    "whitney_decompose",
    "enlarged_center",
    "verify_whitney",
    "cover_to_csv",
]


@dataclass(frozen=True)
class DyadicCube:
    """Generation-j dyadic sub-cube of the root cube, corner in 2^-j units."""

    generation: int
    corner: tuple[int, ...]
    spec: GridSpec

    def __post_init__(self):
        if self.generation < 0:
            raise ValueError("generation must be >= 0")
        side = 1 << self.generation
        if len(self.corner) != self.spec.dimension:
            raise ValueError("corner must have one coordinate per dimension")
        if any(not (0 <= c < side) for c in self.corner):
            raise ValueError(f"corner {self.corner} outside generation-{self.generation} mesh")
        m = self.spec.points_per_axis.bit_length() - 1
        if self.generation > m:
            raise ValueError("generation finer than the lattice")

    @property
    def side_cells(self) -> int:
        m = self.spec.points_per_axis.bit_length() - 1
        return 1 << (m - self.generation)

    @property
    def side_length(self) -> float:
        return 2.0 * self.spec.half_extent * 2.0**-self.generation

    def cell_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Covered cell range [lo, hi) per axis, integer cell indices."""
        s = self.side_cells
        lo = np.asarray(self.corner, dtype=np.int64) * s
        return lo, lo + s

    def slices(self) -> tuple[slice, ...]:
        lo, hi = self.cell_bounds()
        return tuple(slice(int(a), int(b)) for a, b in zip(lo, hi))

    def center(self) -> np.ndarray:
        lo, hi = self.cell_bounds()
        h = self.spec.spacing
        return -self.spec.half_extent + (lo + hi) / 2.0 * h

    def measure(self) -> float:
        return self.side_length**self.spec.dimension

    def contains_cube(self, other: "DyadicCube") -> bool:
        lo, hi = self.cell_bounds()
        olo, ohi = other.cell_bounds()
        return bool(np.all(lo <= olo) and np.all(ohi <= hi))

    def disjoint_from(self, other: "DyadicCube") -> bool:
        lo, hi = self.cell_bounds()
        olo, ohi = other.cell_bounds()
        return bool(np.any(hi <= olo) or np.any(ohi <= lo))


@dataclass(frozen=True)
class WhitneyCover:
    """Disjoint dyadic cubes tiling G, with complement anchor nodes y_k."""

    spec: GridSpec
    mask: np.ndarray  # boolean cell mask of G
    cubes: tuple[DyadicCube, ...]
    centers: tuple[tuple[float, ...], ...]  # y_k, lattice nodes in G^c

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool).copy()
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)


@dataclass(frozen=True)
class WhitneyReport:
    disjoint: bool
    union_exact: bool
    centers_in_complement: bool
    n_cubes: int
    # dist(Q, G^c) / (sqrt(d) l(Q)) over cubes with l > h; empty -> (inf, 0)
    min_dist_ratio: float
    max_dist_ratio: float
    lower_bound_ok: bool
    upper_bound_ok: bool
    # dist(y_k, Q) / l(Q)
    max_center_ratio: float
    center_bound_ok: bool

    @property
    def all_ok(self) -> bool:
        return (
            self.disjoint
            and self.union_exact
            and self.centers_in_complement
            and self.lower_bound_ok
            and self.upper_bound_ok
            and self.center_bound_ok
        )


def _box_sqdist_to_complement(mask: np.ndarray) -> np.ndarray:
    """Per cell, exact integer squared box-to-box distance to the complement.

    Box distance to a cell set equals center distance to its Chebyshev-1
    dilation, and squared center EDT values are integers recovered exactly
    from the float transform at these scales.
    """
    comp = ~mask
    if not comp.any():
        raise ValueError("complement is empty")
    dilated = ndimage.grey_dilation(comp.astype(np.uint8), size=(3,) * mask.ndim, mode="constant") > 0
    edt = ndimage.distance_transform_edt(~dilated)
    sq = np.rint(edt**2).astype(np.int64)
    return sq


def _pool(arr: np.ndarray, op) -> np.ndarray:
    """Reduce each 2^d block of a (2n,)*d array to one value."""
    d = arr.ndim
    for axis in range(d):
        n = arr.shape[axis]
        shape = arr.shape[:axis] + (n // 2, 2) + arr.shape[axis + 1 :]
        arr = op(arr.reshape(shape), axis=axis + 1)
    return arr


def _pyramids(mask: np.ndarray, sqdist: np.ndarray):
    """Per generation: all-of-G flags and min squared distance over the block."""
    m = mask.shape[0].bit_length() - 1
    all_g = {m: mask.copy()}
    min_d2 = {m: sqdist.copy()}
    for j in range(m - 1, -1, -1):
        all_g[j] = _pool(all_g[j + 1], np.all)
        min_d2[j] = _pool(min_d2[j + 1], np.min)
    return all_g, min_d2


def whitney_decompose(mask: np.ndarray, spec: GridSpec) -> WhitneyCover:
    """Whitney cover of the lattice-open set given by a boolean cell mask."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != spec.shape:
        raise ValueError(f"mask shape {mask.shape} does not match grid {spec.shape}")
    if mask.all():
        raise ValueError("G equals the root cube; no complement to measure distance to")
    if not mask.any():
        return WhitneyCover(spec, mask, (), ())

    d = spec.dimension
    m = spec.points_per_axis.bit_length() - 1
    sqdist = _box_sqdist_to_complement(mask)
    all_g, min_d2 = _pyramids(mask, sqdist)

    cubes: list[DyadicCube] = []
    stack = [(0, (0,) * d)]
    children = list(itertools.product((0, 1), repeat=d))
    while stack:
        j, idx = stack.pop()
        if all_g[j][idx]:
            l_cells = 1 << (m - j)
            if j == m or int(min_d2[j][idx]) >= d * l_cells * l_cells:
                cubes.append(DyadicCube(j, idx, spec))
                continue
        if j == m:
            continue  # single cell outside G
        # does any cell of this block meet G at all?
        block = all_g[m][tuple(slice(i << (m - j), (i + 1) << (m - j)) for i in idx)]
        if not block.any():
            continue
        for off in children:
            stack.append((j + 1, tuple(2 * i + o for i, o in zip(idx, off))))

    cubes.sort(key=lambda q: (q.generation, q.corner))
    centers = tuple(enlarged_center_for_mask(q, mask) for q in cubes)
    return WhitneyCover(spec, mask, tuple(cubes), centers)


def enlarged_center_for_mask(cube: DyadicCube, mask: np.ndarray) -> tuple[float, ...]:
    """Nearest complement node to the cube (ties broken lexicographically).

    Searches complement cells within 8 sqrt(d) l(Q) of the cube; the Whitney
    upper bound guarantees a candidate within 4.5 sqrt(d) l(Q), and the
    returned node satisfies dist(y_k, Q) <= 6 sqrt(d) l(Q) (exact integer
    comparison in half-cell units).
    """
    spec = cube.spec
    d = spec.dimension
    n = spec.points_per_axis
    lo, hi = cube.cell_bounds()
    l_cells = cube.side_cells
    radius = int(math.ceil(8.0 * math.sqrt(d) * l_cells)) + 1
    wlo = np.maximum(lo - radius, 0)
    whi = np.minimum(hi + radius, n)
    window = tuple(slice(int(a), int(b)) for a, b in zip(wlo, whi))
    comp = ~np.asarray(mask, dtype=bool)[window]
    if not comp.any():
        raise ValueError(f"no complement node within search radius of cube {cube.corner}; Whitney property violated")
    cells = np.argwhere(comp) + wlo  # absolute cell indices, (k, d)
    # point-to-box distance in half-cell units: node center at 2c+1, box [2lo, 2hi]
    c2 = 2 * cells + 1
    gap = np.maximum(np.maximum(2 * lo - c2, c2 - 2 * hi), 0)
    sq = np.sum(gap * gap, axis=1)
    best = np.min(sq)
    tied = cells[sq == best]
    order = np.lexsort(tied.T[::-1])
    cell = tied[order[0]]
    if int(best) > 144 * d * l_cells * l_cells:
        raise ValueError("nearest complement node violates the 6 sqrt(d) l(Q) bound; decomposition bug")
    h = spec.spacing
    return tuple(float(-spec.half_extent + (ci + 0.5) * h) for ci in cell)


def enlarged_center(cube: DyadicCube, cover: WhitneyCover) -> tuple[float, ...]:
    """The anchor node y_k for a cube of the cover."""
    if not any(cube == q for q in cover.cubes):
        raise ValueError("cube does not belong to the cover")
    return enlarged_center_for_mask(cube, cover.mask)


def verify_whitney(cover: WhitneyCover) -> WhitneyReport:
    """Independent re-check of every cover invariant, exact integer arithmetic."""
    spec = cover.spec
    d = spec.dimension
    mask = np.asarray(cover.mask, dtype=bool)
    paint = np.zeros(spec.shape, dtype=np.int32)
    disjoint = True
    for q in cover.cubes:
        sl = q.slices()
        if np.any(paint[sl]):
            disjoint = False
        paint[sl] += 1
    union_exact = bool(np.array_equal(paint > 0, mask))

    sqdist = _box_sqdist_to_complement(mask) if mask.any() and not mask.all() else None
    min_ratio, max_ratio = math.inf, 0.0
    lower_ok = upper_ok = True
    max_center_ratio = 0.0
    centers_ok = True
    center_ok = True
    h = spec.spacing
    for q, y in zip(cover.cubes, cover.centers):
        l_cells = q.side_cells
        d2 = int(np.min(sqdist[q.slices()]))
        if l_cells > 1:
            if d2 < d * l_cells * l_cells:
                lower_ok = False
            ratio = math.sqrt(d2) / (math.sqrt(d) * l_cells)
            min_ratio = min(min_ratio, ratio)
            max_ratio = max(max_ratio, ratio)
        if d2 > 16 * d * l_cells * l_cells:
            upper_ok = False
        # center: node membership in the complement and the distance bound
        k = tuple(int(round((yi + spec.half_extent) / h - 0.5)) for yi in y)
        if mask[k]:
            centers_ok = False
        lo, hi = q.cell_bounds()
        c2 = 2 * np.asarray(k) + 1
        gap = np.maximum(np.maximum(2 * lo - c2, c2 - 2 * hi), 0)
        sq = int(np.sum(gap * gap))
        if sq > 144 * d * l_cells * l_cells:
            center_ok = False
        max_center_ratio = max(max_center_ratio, math.sqrt(sq) / (2.0 * l_cells))
    return WhitneyReport(
        disjoint=disjoint,
        union_exact=union_exact,
        centers_in_complement=centers_ok,
        n_cubes=len(cover.cubes),
        min_dist_ratio=min_ratio,
        max_dist_ratio=max_ratio,
        lower_bound_ok=lower_ok,
        upper_bound_ok=upper_ok,
        max_center_ratio=max_center_ratio,
        center_bound_ok=center_ok,
    )


def cover_to_csv(cover: WhitneyCover, path: str) -> None:
    """One line per cube: generation, corner coordinates, center node y_k."""
    d = cover.spec.dimension
    with open(path, "w") as fh:
        corner_cols = ",".join(f"corner_{i}" for i in range(d))
        center_cols = ",".join(f"y_{i}" for i in range(d))
        fh.write(f"generation,{corner_cols},{center_cols}\n")
        for q, y in zip(cover.cubes, cover.centers):
            row = [str(q.generation)] + [str(c) for c in q.corner] + [repr(v) for v in y]
            fh.write(",".join(row) + "\n")
