"""numba kernels for the O(n^2)-class scans.

Distances between lattice nodes are integer offset vectors times h, so
1/|x-y| is read from a 1/sqrt table indexed by the integer squared offset;
no sqrt or division runs inside the pair loops.  All reductions are
sequential per output node, so results do not depend on threading.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "inv_sqrt_table",
    "mary_weiss_field",
    "window_diff_power_sum",
    "potential_power",
    "layer_potential_component_flat",
    "lipschitz_max_ratio",
    "mcshane_extend",
    "ball_lorentz_sup",
    "pv_ladder_power_even",
]


def inv_sqrt_table(max_rr: int) -> np.ndarray:
    """table[k] = 1/sqrt(k), table[0] = 0 (diagonal pairs are skipped)."""
    t = np.zeros(max_rr + 1)
    t[1:] = 1.0 / np.sqrt(np.arange(1, max_rr + 1, dtype=float))
    return t


# ------------------------------------------------------------- mary weiss


@njit(cache=True)
def _mw_1d(a, inv):
    n = a.shape[0]
    out = np.zeros(n)
    for i in range(n):
        ai = a[i]
        best = out[i]
        for j in range(i + 1, n):
            m = abs(a[j] - ai) * inv[(j - i) * (j - i)]
            if m > best:
                best = m
            if m > out[j]:
                out[j] = m
        out[i] = best
    return out


@njit(cache=True)
def _mw_2d(a, inv):
    n0, n1 = a.shape
    out = np.zeros((n0, n1))
    for i0 in range(n0):
        for i1 in range(n1):
            ai = a[i0, i1]
            best = out[i0, i1]
            # remainder of row i0
            for j1 in range(i1 + 1, n1):
                dd = j1 - i1
                m = abs(a[i0, j1] - ai) * inv[dd * dd]
                if m > best:
                    best = m
                if m > out[i0, j1]:
                    out[i0, j1] = m
            # full rows below
            for j0 in range(i0 + 1, n0):
                d0 = (j0 - i0) * (j0 - i0)
                row = a[j0]
                orow = out[j0]
                for j1 in range(n1):
                    dd = j1 - i1
                    m = abs(row[j1] - ai) * inv[d0 + dd * dd]
                    if m > best:
                        best = m
                    if m > orow[j1]:
                        orow[j1] = m
            out[i0, i1] = best
    return out


@njit(cache=True)
def _mw_3d(a, inv):
    n0, n1, n2 = a.shape
    out = np.zeros((n0, n1, n2))
    for i0 in range(n0):
        for i1 in range(n1):
            for i2 in range(n2):
                ai = a[i0, i1, i2]
                best = out[i0, i1, i2]
                for j0 in range(i0, n0):
                    d0 = (j0 - i0) * (j0 - i0)
                    j1_start = i1 if j0 == i0 else 0
                    for j1 in range(j1_start, n1):
                        dd1 = j1 - i1
                        d01 = d0 + dd1 * dd1
                        j2_start = i2 + 1 if (j0 == i0 and j1 == i1) else 0
                        for j2 in range(j2_start, n2):
                            dd2 = j2 - i2
                            m = abs(a[j0, j1, j2] - ai) * inv[d01 + dd2 * dd2]
                            if m > best:
                                best = m
                            if m > out[j0, j1, j2]:
                                out[j0, j1, j2] = m
                out[i0, i1, i2] = best
    return out


def mary_weiss_field(values: np.ndarray, h: float) -> np.ndarray:
    """sup over all other nodes of |A(y)-A(x)| / |y-x|."""
    d = values.ndim
    n = values.shape[0]
    inv = inv_sqrt_table(d * (n - 1) * (n - 1))
    if d == 1:
        out = _mw_1d(values, inv)
    elif d == 2:
        out = _mw_2d(values, inv)
    else:
        out = _mw_3d(values, inv)
    return out / h


# ------------------------------------------------------- window averages


@njit(cache=True)
def _wsum_1d(a, w, s):
    n = a.shape[0]
    out = np.empty(n)
    total = 2 * w + 1
    for i in range(n):
        ai = a[i]
        lo = max(0, i - w)
        hi = min(n, i + w + 1)
        acc = 0.0
        for j in range(lo, hi):
            acc += abs(a[j] - ai) ** s
        acc += (total - (hi - lo)) * abs(ai) ** s  # zero-extended neighbors
        out[i] = acc / total
    return out


@njit(cache=True)
def _wsum_2d(a, w, s):
    n0, n1 = a.shape
    out = np.empty((n0, n1))
    side = 2 * w + 1
    total = side * side
    for i0 in range(n0):
        lo0 = max(0, i0 - w)
        hi0 = min(n0, i0 + w + 1)
        for i1 in range(n1):
            ai = a[i0, i1]
            lo1 = max(0, i1 - w)
            hi1 = min(n1, i1 + w + 1)
            acc = 0.0
            cnt = 0
            if s == 2.0:
                for j0 in range(lo0, hi0):
                    row = a[j0]
                    for j1 in range(lo1, hi1):
                        dvl = row[j1] - ai
                        acc += dvl * dvl
                cnt = (hi0 - lo0) * (hi1 - lo1)
                acc += (total - cnt) * ai * ai
            else:
                for j0 in range(lo0, hi0):
                    row = a[j0]
                    for j1 in range(lo1, hi1):
                        acc += abs(row[j1] - ai) ** s
                cnt = (hi0 - lo0) * (hi1 - lo1)
                acc += (total - cnt) * abs(ai) ** s
            out[i0, i1] = acc / total
    return out


@njit(cache=True)
def _wsum_3d(a, w, s):
    n0, n1, n2 = a.shape
    out = np.empty((n0, n1, n2))
    side = 2 * w + 1
    total = side * side * side
    for i0 in range(n0):
        lo0 = max(0, i0 - w)
        hi0 = min(n0, i0 + w + 1)
        for i1 in range(n1):
            lo1 = max(0, i1 - w)
            hi1 = min(n1, i1 + w + 1)
            for i2 in range(n2):
                ai = a[i0, i1, i2]
                lo2 = max(0, i2 - w)
                hi2 = min(n2, i2 + w + 1)
                acc = 0.0
                for j0 in range(lo0, hi0):
                    for j1 in range(lo1, hi1):
                        for j2 in range(lo2, hi2):
                            acc += abs(a[j0, j1, j2] - ai) ** s
                cnt = (hi0 - lo0) * (hi1 - lo1) * (hi2 - lo2)
                acc += (total - cnt) * abs(ai) ** s
                out[i0, i1, i2] = acc / total
    return out


def window_diff_power_sum(values: np.ndarray, w: int, s: float) -> np.ndarray:
    """Per node, mean over the (2w+1)^d window of |A(x)-A(y)|^s, zero-extended."""
    d = values.ndim
    if d == 1:
        return _wsum_1d(values, w, s)
    if d == 2:
        return _wsum_2d(values, w, s)
    return _wsum_3d(values, w, s)


# ------------------------------------------------------------ potentials


@njit(cache=True)
def _potential_flat(f, coords, inv, d, power, h):
    """sum_y k(|x-y|) f(y) with k(r) = r^-power, symmetric pair pass."""
    n = f.shape[0]
    out = np.zeros(n)
    for i in range(n):
        fi = f[i]
        acc = 0.0
        for j in range(i + 1, n):
            rr = 0
            for t in range(d):
                dt = coords[i, t] - coords[j, t]
                rr += dt * dt
            iv = inv[rr]
            k = iv**power  # (1/r)^power in cell units
            acc += k * f[j]
            out[j] += k * fi
        out[i] += acc
    return out / h**power


def potential_power(f_values: np.ndarray, coords: np.ndarray, power: float, h: float) -> np.ndarray:
    """Convolution-style sum over node pairs of |x-y|^-power f(y), diagonal skipped.

    Returns the plain pair sum; callers apply the h^d weight and constants.
    """
    d = coords.shape[1]
    n_axis = int(np.max(coords)) + 1
    inv = inv_sqrt_table(d * (n_axis - 1) * (n_axis - 1))
    flat = np.ascontiguousarray(f_values.ravel())
    return _potential_flat(flat, coords, inv, d, power, h)


@njit(cache=True)
def _layer_flat(g, coords, inv, d, comp, h):
    """sum_y (x_c - y_c)/|x-y|^d g(y); antisymmetric pair pass."""
    n = g.shape[0]
    out = np.zeros(n)
    for i in range(n):
        gi = g[i]
        acc = 0.0
        for j in range(i + 1, n):
            rr = 0
            for t in range(d):
                dt = coords[i, t] - coords[j, t]
                rr += dt * dt
            iv = inv[rr]
            k = (coords[i, comp] - coords[j, comp]) * iv ** (d + 1)  # (dx_c) / r^(d+1) * r
            # (x_c - y_c)/r^d in cell units is dcomp * (1/r)^d; dcomp in cells
            k = (coords[i, comp] - coords[j, comp]) * iv**d
            acc += k * g[j]
            out[j] -= k * gi
        out[i] += acc
    return out / h ** (d - 1)


def layer_potential_component_flat(
    g_values: np.ndarray, coords: np.ndarray, comp: int, h: float
) -> np.ndarray:
    """Pair sum of the component kernel (x_c - y_c)/|x-y|^d against g."""
    d = coords.shape[1]
    n_axis = int(np.max(coords)) + 1
    inv = inv_sqrt_table(d * (n_axis - 1) * (n_axis - 1))
    flat = np.ascontiguousarray(g_values.ravel())
    return _layer_flat(flat, coords, inv, d, comp, h)


# ------------------------------------------------------------- lipschitz


@njit(cache=True)
def _lip_max(values, coords, inv, d):
    n = values.shape[0]
    best = 0.0
    bi, bj = 0, 0
    for i in range(n):
        vi = values[i]
        for j in range(i + 1, n):
            rr = 0
            for t in range(d):
                dt = coords[i, t] - coords[j, t]
                rr += dt * dt
            m = abs(values[j] - vi) * inv[rr]
            if m > best:
                best = m
                bi, bj = i, j
    return best, bi, bj


def lipschitz_max_ratio(values: np.ndarray, coords: np.ndarray, h: float, n_axis: int):
    """(max |A(x)-A(y)|/|x-y| over pairs, argmax pair indices)."""
    d = coords.shape[1]
    inv = inv_sqrt_table(d * (n_axis - 1) * (n_axis - 1))
    best, bi, bj = _lip_max(values, coords, inv, d)
    return best / h, bi, bj


@njit(cache=True)
def _mcshane(values_f, coords_f, coords_all, d, L_cells):
    n = coords_all.shape[0]
    m = coords_f.shape[0]
    out = np.empty(n)
    for i in range(n):
        best = 1e300
        for j in range(m):
            rr = 0
            for t in range(d):
                dt = coords_all[i, t] - coords_f[j, t]
                rr += dt * dt
            v = values_f[j] + L_cells * np.sqrt(rr)
            if v < best:
                best = v
        out[i] = best
    return out


def mcshane_extend(
    values_f: np.ndarray, coords_f: np.ndarray, coords_all: np.ndarray, L: float, h: float
) -> np.ndarray:
    """inf-convolution extension min_y (A(y) + L |x-y|) over the kept set."""
    d = coords_all.shape[1]
    return _mcshane(values_f, coords_f, coords_all, d, L * h)


# ------------------------------------------------------------ ball sups


@njit(cache=True)
def _ball_sup(a, offsets, starts, n_shape, inv_d, step):
    """Per node, sup over radius rungs of the L^{d,1}-style ball ratio.

    offsets: (m, d) integer node offsets, grouped per rung by starts;
    for each rung the ball values inside the domain are sorted descending
    and sum_k v_k ((k+1)^e - k^e) * step^e is divided by (count * step)^e,
    e = 1/d.
    """
    d = a.ndim
    flat = a.ravel()
    shape0 = a.shape[0]
    n = flat.shape[0]
    out = np.zeros(n)
    n_rungs = starts.shape[0] - 1
    strides = np.empty(d, dtype=np.int64)
    strides[d - 1] = 1
    for t in range(d - 2, -1, -1):
        strides[t] = strides[t + 1] * shape0
    buf = np.empty(offsets.shape[0])
    idx = np.empty(d, dtype=np.int64)
    for i in range(n):
        rem = i
        for t in range(d):
            idx[t] = rem // strides[t]
            rem -= idx[t] * strides[t]
        best = 0.0
        for r in range(n_rungs):
            cnt = 0
            for o in range(starts[r], starts[r + 1]):
                ok = True
                pos = 0
                for t in range(d):
                    c = idx[t] + offsets[o, t]
                    if c < 0 or c >= shape0:
                        ok = False
                        break
                    pos += c * strides[t]
                if ok:
                    buf[cnt] = abs(flat[pos])
                    cnt += 1
            if cnt == 0:
                continue
            vals = np.sort(buf[:cnt])[::-1]
            num = 0.0
            for k in range(cnt):
                num += vals[k] * (((k + 1.0) * step) ** inv_d - (k * step) ** inv_d)
            den = (cnt * step) ** inv_d
            ratio = num / den
            if ratio > best:
                best = ratio
        out[i] = best
    return out.reshape(a.shape)


def ball_lorentz_sup(values: np.ndarray, offsets: np.ndarray, starts: np.ndarray, d: int, step: float):
    return _ball_sup(values, offsets, starts, 1.0 / d, step)


# -------------------------------------------------------------- pv sums


@njit(cache=True)
def _pv_buckets(a_stack, f, coords_h, x, eps2, d, n_slots, a_at_x):
    """Bucketed truncated sums for the |x|^-d kernel: partial[k] collects
    terms whose distance falls in (eps_k, eps_{k-1}]; prefix sums give the
    full ladder.  coords_h are physical node coordinates."""
    n = f.shape[0]
    n_eps = eps2.shape[0]
    partial = np.zeros(n_eps)
    for i in range(n):
        rr = 0.0
        for t in range(d):
            dt = x[t] - coords_h[i, t]
            rr += dt * dt
        if rr <= eps2[n_eps - 1]:
            continue
        # first rung (largest eps) whose eps^2 < rr
        k = n_eps - 1
        while k > 0 and rr > eps2[k - 1]:
            k -= 1
        r = np.sqrt(rr)
        term = f[i] / r**d
        for s in range(n_slots):
            term *= (a_at_x[s] - a_stack[s, i]) / r
        partial[k] += term
    out = np.zeros(n_eps)
    acc = 0.0
    for k in range(n_eps):
        acc += partial[k]
        out[k] = acc
    return out


def pv_ladder_power_even(
    a_stack: np.ndarray,
    f_values: np.ndarray,
    coords_h: np.ndarray,
    x: np.ndarray,
    eps_ladder: np.ndarray,
    a_at_x: np.ndarray,
) -> np.ndarray:
    """All truncated values C_eps for the 1/|x|^d kernel in one pass.

    eps_ladder must be strictly decreasing; returns one value per rung.
    """
    d = coords_h.shape[1]
    eps2 = np.ascontiguousarray(eps_ladder.astype(float) ** 2)
    return _pv_buckets(
        np.ascontiguousarray(a_stack),
        np.ascontiguousarray(f_values),
        coords_h,
        np.ascontiguousarray(x.astype(float)),
        eps2,
        d,
        a_stack.shape[0],
        np.ascontiguousarray(a_at_x.astype(float)),
    )
