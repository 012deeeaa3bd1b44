"""Sampled functions on a regular cube lattice.

Everything downstream (maximal operators, decompositions, principal-value
sums) works on real-valued functions sampled at the cell centers of a
uniform lattice over the cube [-L, L]^d.  Nodes sit at half-offsets,

    x_i = -L + (k_i + 1/2) h,   k_i in {0, ..., N-1},   h = 2L/N,

so no node ever coincides with the origin; radially singular test data
such as |x|^(-a) stays finite without special-casing.  N is a power of
two so dyadic cubes align exactly with lattice cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "GridFunction",
    "VectorField",
    "sample",
    "gradient",
    "lp_norm",
    "bump",
    "smoothstep",
    "cone_power_A",
    "cone_power_f",
    "random_test_family",
    "save_grid_function",
    "load_grid_function",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the sampling lattice: dimension, half-extent, resolution."""

    dimension: int
    half_extent: float
    points_per_axis: int

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.half_extent <= 0:
            raise ValueError(f"half_extent must be positive, got {self.half_extent}")
        if self.points_per_axis < 8 or not _is_power_of_two(self.points_per_axis):
            raise ValueError(
                f"points_per_axis must be a power of two >= 8, got {self.points_per_axis}"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def cell_measure(self) -> float:
        return self.spacing**self.dimension

    def axis_coords(self) -> np.ndarray:
        """1D node coordinates along one axis (cell centers)."""
        n, h = self.points_per_axis, self.spacing
        return -self.half_extent + (np.arange(n) + 0.5) * h

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Sparse broadcastable coordinate arrays, one per axis."""
        ax = self.axis_coords()
        return np.meshgrid(*([ax] * self.dimension), indexing="ij", sparse=True)

    def node_array(self) -> np.ndarray:
        """All node coordinates as a flat (N^d, d) array, row-major node order."""
        mesh = np.meshgrid(*([self.axis_coords()] * self.dimension), indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def node_index(self, point: Sequence[float]) -> tuple[int, ...]:
        """Multi-index of the lattice node at `point`; raises if off-node."""
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dimension,):
            raise ValueError(f"point must have {self.dimension} components")
        k = (p + self.half_extent) / self.spacing - 0.5
        ki = np.rint(k).astype(int)
        if np.any(np.abs(k - ki) > 1e-9) or np.any(ki < 0) or np.any(ki >= self.points_per_axis):
            raise ValueError(f"{tuple(p)} is not a lattice node of {self}")
        return tuple(int(i) for i in ki)

    def contains(self, point: Sequence[float]) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(np.abs(p) <= self.half_extent))

    def refine(self) -> "GridSpec":
        return GridSpec(self.dimension, self.half_extent, 2 * self.points_per_axis)


@dataclass(frozen=True)
class GridFunction:
    """A real function sampled on the lattice.  Values are immutable and finite."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.spec.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            bad = np.unravel_index(int(np.argmax(~np.isfinite(v))), v.shape)
            raise ValueError(f"non-finite value at node index {bad}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def value_at(self, point: Sequence[float]) -> float:
        """Exact node lookup when `point` is a node, else multilinear interpolation."""
        try:
            return float(self.values[self.spec.node_index(point)])
        except ValueError:
            return float(interpolate(self, np.asarray(point, dtype=float)[None, :])[0])

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.spec, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.spec, self.values - other.values)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.spec, self.values * float(c))

    __rmul__ = __mul__


@dataclass(frozen=True)
class VectorField:
    """d grid functions sharing one spec (a sampled gradient, typically)."""

    spec: GridSpec
    components: tuple[GridFunction, ...]

    def __post_init__(self):
        if len(self.components) != self.spec.dimension:
            raise ValueError("need one component per dimension")
        for c in self.components:
            if c.spec != self.spec:
                raise ValueError("all components must share the same grid spec")

    def magnitude(self) -> GridFunction:
        """Pointwise Euclidean length, the |grad A| fed to norms and maximal ops."""
        sq = sum(c.values**2 for c in self.components)
        return GridFunction(self.spec, np.sqrt(sq))


def sample(expr: Callable[..., np.ndarray], spec: GridSpec) -> GridFunction:
    """Sample a pointwise function on the lattice.

    `expr` receives d broadcastable coordinate arrays (one per axis) and
    must return the values array; any non-finite sample is an error that
    names the offending node.
    """
    mesh = spec.meshgrid()
    vals = np.broadcast_to(np.asarray(expr(*mesh), dtype=float), spec.shape).copy()
    if not np.all(np.isfinite(vals)):
        bad = np.unravel_index(int(np.argmax(~np.isfinite(vals))), vals.shape)
        coords = tuple(float(spec.axis_coords()[i]) for i in bad)
        raise ValueError(f"expr is non-finite at node {bad} = {coords}")
    return GridFunction(spec, vals)


def interpolate(f: GridFunction, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a grid function at arbitrary points.

    Points outside the node hull evaluate to 0 (functions of interest are
    compactly supported inside the domain).
    """
    from scipy.interpolate import RegularGridInterpolator

    axes = [f.spec.axis_coords()] * f.spec.dimension
    rgi = RegularGridInterpolator(
        axes, np.asarray(f.values), method="linear", bounds_error=False, fill_value=0.0
    )
    return rgi(np.atleast_2d(points))


def gradient(A: GridFunction) -> VectorField:
    """Sampled gradient: central differences inside, one-sided on the boundary layer."""
    h = A.spec.spacing
    grads = np.gradient(np.asarray(A.values), h, edge_order=1)
    if A.spec.dimension == 1:
        grads = [grads]
    comps = tuple(GridFunction(A.spec, g) for g in grads)
    return VectorField(A.spec, comps)


def lp_norm(f: GridFunction, p: float) -> float:
    """Discrete L^p norm, Riemann sum with weight h^d; p = inf gives the max."""
    if p == math.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError(f"lp_norm requires p >= 1, got {p}; use rearrange.lorentz_norm for quasi-norms")
    a = np.abs(f.values)
    return float((np.sum(a**p) * f.spec.cell_measure) ** (1.0 / p))


def bump(center: Sequence[float], radius: float, spec: GridSpec) -> GridFunction:
    """Smooth compactly supported bump, peak value 1 at the center.

    exp(1 - 1/(1 - |x-c|^2/r^2)) inside the ball B(c, r), zero outside.
    The ball must sit inside the domain.
    """
    c = np.asarray(center, dtype=float)
    if c.shape != (spec.dimension,):
        raise ValueError(f"center must have {spec.dimension} components")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if np.any(np.abs(c) + radius > spec.half_extent):
        raise ValueError(
            f"ball B({tuple(c)}, {radius}) escapes the domain [-{spec.half_extent}, {spec.half_extent}]^d"
        )

    def expr(*mesh):
        r2 = sum((m - ci) ** 2 for m, ci in zip(mesh, c)) / radius**2
        out = np.zeros(np.broadcast_shapes(*(m.shape for m in mesh)))
        inside = r2 < 1.0
        t = np.where(inside, 1.0 - r2, 1.0)
        np.place(out, inside, np.exp(1.0 - 1.0 / t)[inside])
        return out

    return sample(expr, spec)


def _phi(t: np.ndarray) -> np.ndarray:
    """exp(-1/t) on t > 0, zero on t <= 0; the building block of smoothstep."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t: np.ndarray) -> np.ndarray:
    """C^infinity monotone ramp: exactly 0 for t <= 0, exactly 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a = _phi(t)
    b = _phi(1.0 - t)
    out = np.zeros_like(t)
    mid = (t > 0) & (t < 1)
    out[mid] = a[mid] / (a[mid] + b[mid])
    out[t >= 1] = 1.0
    return out


def _cone_coords(mesh: Sequence[np.ndarray], rho: float, eps: float, kappa: float):
    """Ramp coordinates for the cone pair: each is >= 1 on the inner cone
    and <= 0 outside the enlarged cone, per constraint (lateral, low, high)."""
    x1 = mesh[0]
    perp = np.sqrt(sum(m**2 for m in mesh[1:])) if len(mesh) > 1 else np.zeros_like(x1)
    t_lat = (x1 + eps - math.sqrt(kappa) * perp) / eps
    t_low = (x1 + eps) / eps
    t_high = (rho + eps - x1) / eps
    return t_lat, t_low, t_high


def cone_power_A(
    alpha: float,
    rho: float,
    eps: float,
    kappa: float,
    spec: GridSpec,
) -> GridFunction:
    """Radial power |x|^(-alpha) on the open cone about the +x1 axis,
    smoothly cut off to vanish identically outside the enlarged cone.

    Inner cone: kappa * sum_{j>=2} x_j^2 < x_1^2, 0 < x_1 < rho.
    Enlarged cone: kappa * sum_{j>=2} x_j^2 < (x_1+eps)^2, -eps < x_1 < rho+eps.
    The transition multiplies |x|^(-alpha) by smoothstep ramps in the three
    cone constraints, so values on the inner cone are exact and zeros
    outside the enlarged cone are exact.
    """
    if not (-1.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [-1, 1), got {alpha}")
    if rho <= 0 or eps <= 0 or kappa <= 0:
        raise ValueError("rho, eps, kappa must be positive")

    def expr(*mesh):
        t_lat, t_low, t_high = _cone_coords(mesh, rho, eps, kappa)
        ramp = smoothstep(t_lat) * smoothstep(t_low) * smoothstep(t_high)
        r = np.sqrt(sum(np.broadcast_to(m, ramp.shape) ** 2 for m in mesh))
        out = np.zeros_like(ramp)
        live = ramp > 0.0
        out[live] = r[live] ** (-alpha) * ramp[live]
        return out

    return sample(expr, spec)


def cone_power_f(beta: float, rho: float, kappa: float, spec: GridSpec) -> GridFunction:
    """Radial power |x|^(-beta) sharply restricted to the open cone (no mollifier)."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if rho <= 0 or kappa <= 0:
        raise ValueError("rho, kappa must be positive")

    def expr(*mesh):
        x1 = mesh[0]
        perp2 = sum(m**2 for m in mesh[1:]) if len(mesh) > 1 else np.zeros_like(x1)
        inside = (kappa * perp2 < x1**2) & (0.0 < x1) & (x1 < rho)
        r = np.sqrt(sum(np.broadcast_to(m, inside.shape) ** 2 for m in mesh))
        out = np.zeros(inside.shape)
        out[inside] = r[inside] ** (-beta)
        return out

    return sample(expr, spec)


def random_test_family(
    seed: int,
    count: int,
    spec: GridSpec,
    smoothness: float = 0.5,
) -> list[GridFunction]:
    """Deterministic family of nonnegative bump superpositions for sweeps.

    Bump parameters are drawn in physical coordinates from the seed only,
    so the same seed yields the same underlying functions at every grid
    resolution (the refinement-drift experiments rely on this).
    `smoothness` in (0, 1] scales the minimum bump radius.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if not (0.0 < smoothness <= 1.0):
        raise ValueError("smoothness must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    L = spec.half_extent
    r_min = 0.1 * L * smoothness
    r_max = 0.35 * L
    family = []
    for _ in range(count):
        n_bumps = int(rng.integers(2, 5))
        total = np.zeros(spec.shape)
        for _ in range(n_bumps):
            radius = float(rng.uniform(r_min, r_max))
            center = rng.uniform(-(L - radius) * 0.95, (L - radius) * 0.95, size=spec.dimension)
            amp = float(rng.uniform(0.5, 2.0))
            total = total + amp * np.asarray(bump(center, radius, spec).values)
        family.append(GridFunction(spec, total))
    return family


def save_grid_function(f: GridFunction, path: str) -> None:
    """Text dump: one header line `d L N`, then row-major values, one per line."""
    with open(path, "w") as fh:
        fh.write(f"{f.spec.dimension} {f.spec.half_extent!r} {f.spec.points_per_axis}\n")
        np.savetxt(fh, np.asarray(f.values).ravel())


def load_grid_function(path: str) -> GridFunction:
    with open(path) as fh:
        d_s, L_s, n_s = fh.readline().split()
        vals = np.loadtxt(fh)
    spec = GridSpec(int(d_s), float(L_s), int(n_s))
    return GridFunction(spec, vals.reshape(spec.shape))
