"""Calderon-Zygmund decomposition on the dyadic tree of the root cube.

Stopping-time selection of the maximal dyadic cubes whose average exceeds
the prescribed level.  The dyadic-parent argument gives the discrete
constants exactly: the good part is bounded by 2^d * level, the bad set
measure by level^{-1} ||f||_1 with constant one, and every bad piece has
zero mean up to accumulated rounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicCube
from .grid import GridFunction, GridSpec, gradient

__all__ = [
    "BadPiece",
    "CZResult",
    "GradientComponentCZ",
    "cz_decompose",
    "apply_to_gradient_components",
    "cz_to_csv",
]


@dataclass(frozen=True)
class BadPiece:
    """One zero-mean piece b_Q, stored on its cube's cell block."""

    cube: DyadicCube
    values: np.ndarray  # shape = cube block

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.cube.spec.cell_measure)

    def l1(self) -> float:
        return float(np.sum(np.abs(self.values)) * self.cube.spec.cell_measure)


@dataclass(frozen=True)
class CZResult:
    level: float
    good: GridFunction
    bad_pieces: tuple[BadPiece, ...]

    @property
    def spec(self) -> GridSpec:
        return self.good.spec

    @property
    def cubes(self) -> tuple[DyadicCube, ...]:
        return tuple(p.cube for p in self.bad_pieces)

    @property
    def bad_set_measure(self) -> float:
        return float(sum(p.cube.measure() for p in self.bad_pieces))

    def bad_mask(self) -> np.ndarray:
        mask = np.zeros(self.spec.shape, dtype=bool)
        for p in self.bad_pieces:
            mask[p.cube.slices()] = True
        return mask

    def bad_sum(self) -> GridFunction:
        out = np.zeros(self.spec.shape)
        for p in self.bad_pieces:
            out[p.cube.slices()] += p.values
        return GridFunction(self.spec, out)


def _sum_pyramid(values: np.ndarray):
    m = values.shape[0].bit_length() - 1
    sums = {m: values.astype(float)}
    for j in range(m - 1, -1, -1):
        arr = sums[j + 1]
        for axis in range(arr.ndim):
            n = arr.shape[axis]
            shape = arr.shape[:axis] + (n // 2, 2) + arr.shape[axis + 1 :]
            arr = arr.reshape(shape).sum(axis=axis + 1)
        sums[j] = arr
    return sums


def cz_decompose(f: GridFunction, level: float) -> CZResult:
    """Good/bad split of a nonnegative density at the given level."""
    if level <= 0:
        raise ValueError("level must be positive")
    vals = np.asarray(f.values)
    if np.any(vals < 0):
        raise ValueError("cz_decompose requires f >= 0")
    spec = f.spec
    d = spec.dimension
    m = spec.points_per_axis.bit_length() - 1
    sums = _sum_pyramid(vals)
    root_avg = float(sums[0].ravel()[0]) / spec.points_per_axis**d
    if root_avg >= level:
        raise ValueError(
            f"level {level} below global average {root_avg}: the root cube itself would be bad"
        )

    bad_cubes: list[DyadicCube] = []
    stack = [(0, (0,) * d)]
    children = list(itertools.product((0, 1), repeat=d))
    while stack:
        j, idx = stack.pop()
        n_cells = (1 << (m - j)) ** d
        avg = float(sums[j][idx]) / n_cells
        if avg > level:
            bad_cubes.append(DyadicCube(j, idx, spec))
            continue
        if j == m:
            continue
        for off in children:
            stack.append((j + 1, tuple(2 * i + o for i, o in zip(idx, off))))
    bad_cubes.sort(key=lambda q: (q.generation, q.corner))

    good = vals.copy()
    pieces = []
    for q in bad_cubes:
        sl = q.slices()
        block = vals[sl]
        avg = float(np.mean(block))
        good[sl] = avg
        # f = g + b holds to one rounding per node (float cannot do better)
        pieces.append(BadPiece(q, block - avg))
    return CZResult(level, GridFunction(spec, good), tuple(pieces))


@dataclass(frozen=True)
class GradientComponentCZ:
    """Split of one gradient component, driven by the decomposition of its
    q-th power: the cubes come from |dA_j|^q at the prescribed level, and
    dA_j itself is split by restriction and cube averages on them."""

    component: int
    power_result: CZResult  # decomposition of |dA_j|^q
    good: GridFunction  # split of dA_j itself
    bad_pieces: tuple[BadPiece, ...]

    @property
    def bad_set_measure(self) -> float:
        return self.power_result.bad_set_measure

    def bad_mask(self) -> np.ndarray:
        return self.power_result.bad_mask()


def apply_to_gradient_components(
    A: GridFunction, q: float, lam: float, r: float
) -> list[GradientComponentCZ]:
    """Per component j: decompose |dA_j|^q at level lam^r and derive the
    sign-restored split dA_j = g_j + sum_Q b_{j,Q}."""
    if not (1.0 <= q < A.spec.dimension):
        raise ValueError(f"q must lie in [1, d), got {q} with d = {A.spec.dimension}")
    if lam <= 0 or r <= 0:
        raise ValueError("lam and r must be positive")
    level = lam**r
    grads = gradient(A)
    out = []
    for j, comp in enumerate(grads.components):
        density = GridFunction(A.spec, np.abs(comp.values) ** q)
        power_cz = cz_decompose(density, level)
        g = np.asarray(comp.values).copy()
        pieces = []
        for piece in power_cz.bad_pieces:
            sl = piece.cube.slices()
            block = np.asarray(comp.values)[sl]
            avg = float(np.mean(block))
            g[sl] = avg
            pieces.append(BadPiece(piece.cube, block - avg))
        out.append(
            GradientComponentCZ(j, power_cz, GridFunction(A.spec, g), tuple(pieces))
        )
    return out


def cz_to_csv(result: CZResult, path: str) -> None:
    """Cube table mirroring the Whitney CSV: generation, corner, cube average."""
    d = result.spec.dimension
    with open(path, "w") as fh:
        corner_cols = ",".join(f"corner_{i}" for i in range(d))
        fh.write(f"generation,{corner_cols},piece_l1\n")
        for p in result.bad_pieces:
            row = [str(p.cube.generation)] + [str(c) for c in p.cube.corner] + [repr(p.l1())]
            fh.write(",".join(row) + "\n")
