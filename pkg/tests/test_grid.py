import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from czlab.grid import (
    GridFunction,
    GridSpec,
    bump,
    cone_power_A,
    cone_power_f,
    gradient,
    load_grid_function,
    lp_norm,
    random_test_family,
    sample,
    save_grid_function,
    smoothstep,
)
from czlab.rearrange import cavalieri_lp_power


def spec2(n=64, L=1.0):
    return GridSpec(2, L, n)


# ---------------------------------------------------------------- GridSpec


def test_spec_rejects_bad_resolution():
    with pytest.raises(ValueError):
        GridSpec(2, 1.0, 12)
    with pytest.raises(ValueError):
        GridSpec(2, 1.0, 4)
    with pytest.raises(ValueError):
        GridSpec(4, 1.0, 16)


def test_nodes_are_half_offset():
    spec = GridSpec(1, 1.0, 8)
    expected = np.array([-0.875, -0.625, -0.375, -0.125, 0.125, 0.375, 0.625, 0.875])
    assert np.allclose(spec.axis_coords(), expected)


# ---------------------------------------------------------------- sample


def test_sample_zero():
    f = sample(lambda x, y: np.zeros_like(x * y), spec2(8, 1.0))
    assert np.all(f.values == 0.0)


def test_sample_linear_matches_node_formula():
    spec = GridSpec(1, 1.0, 8)
    f = sample(lambda x: x, spec)
    assert np.allclose(f.values, spec.axis_coords())


def test_sample_inverse_sqrt_finite_off_origin():
    # half-offset lattice has no node at 0, so |x|^(-1/2) samples finite
    spec = spec2(16, 1.0)
    f = sample(lambda x, y: (x**2 + y**2) ** (-0.25), spec)
    assert np.all(np.isfinite(f.values))
    nearest = math.sqrt(2) * spec.spacing / 2
    assert np.max(f.values) == pytest.approx(nearest ** (-0.5))


def test_sample_nonfinite_reports_node():
    spec = GridSpec(1, 1.0, 8)
    with pytest.raises(ValueError, match="node"):
        sample(lambda x: 1.0 / (x - 0.125), spec)


def test_grid_function_immutable():
    f = sample(lambda x: x, GridSpec(1, 1.0, 8))
    with pytest.raises(ValueError):
        f.values[0] = 3.0


# ---------------------------------------------------------------- gradient


def test_gradient_constant_zero():
    g = gradient(sample(lambda x, y: np.full_like(x * y, 2.5), spec2(16)))
    for c in g.components:
        assert np.all(c.values == 0.0)


def test_gradient_affine_exact_everywhere():
    spec = spec2(16)
    v = (0.7, -1.3)
    g = gradient(sample(lambda x, y: v[0] * x + v[1] * y, spec))
    # one-sided boundary differences are also exact on affine data
    assert np.allclose(g.components[0].values, v[0], atol=1e-13)
    assert np.allclose(g.components[1].values, v[1], atol=1e-13)


def test_gradient_quadratic_exact_interior():
    # central difference of x^2: ((x+h)^2-(x-h)^2)/(2h) = 2x exactly
    spec = GridSpec(1, 1.0, 32)
    g = gradient(sample(lambda x: x**2, spec))
    x = spec.axis_coords()
    assert np.allclose(g.components[0].values[1:-1], 2 * x[1:-1], atol=1e-13)


# ---------------------------------------------------------------- lp_norm


def test_lp_norm_zero_and_indicator():
    spec = spec2(32, 1.0)
    assert lp_norm(sample(lambda x, y: np.zeros_like(x * y), spec), 1) == 0.0
    # indicator of the sub-square [-0.5, 0.5]^2: mass exactly 1 (cells align)
    f = sample(lambda x, y: ((np.abs(x) < 0.5) & (np.abs(y) < 0.5)).astype(float), spec)
    assert lp_norm(f, 1) == pytest.approx(1.0, rel=1e-12)


def test_lp_norm_rejects_p_below_one():
    f = sample(lambda x, y: x + y, spec2(8))
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_bump_l2_matches_quadrature_oracle():
    # independent oracle: radial adaptive quadrature of the closed-form bump
    rho = 0.6
    val, err = quad(lambda r: 2 * math.pi * r * math.exp(2 - 2 / (1 - (r / rho) ** 2)), 0, rho * (1 - 1e-12))
    oracle = math.sqrt(val)
    assert err < 1e-6 * val
    f = bump((0.0, 0.0), rho, spec2(256, 1.0))
    assert lp_norm(f, 2) == pytest.approx(oracle, rel=1e-3)


@settings(max_examples=30, deadline=None)
@given(
    c=st.floats(min_value=-100, max_value=100, allow_nan=False).filter(lambda t: abs(t) > 1e-6),
    p=st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf]),
)
def test_lp_norm_homogeneity(c, p):
    spec = GridSpec(1, 1.0, 16)
    f = sample(lambda x: np.sin(3 * x) + 0.3, spec)
    assert lp_norm(c * f, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-12)


def test_cavalieri_identity_for_l1():
    spec = spec2(32)
    f = bump((0.1, -0.2), 0.5, spec)
    assert cavalieri_lp_power(f, 1.0) == pytest.approx(lp_norm(f, 1), rel=1e-6)


# ---------------------------------------------------------------- bump


def test_bump_outside_zero_center_one():
    spec = spec2(64, 1.0)
    center = spec.axis_coords()[40], spec.axis_coords()[24]
    f = bump(center, 0.3, spec)
    assert f.value_at(center) == pytest.approx(1.0, abs=1e-15)
    mesh = spec.meshgrid()
    r2 = (mesh[0] - center[0]) ** 2 + (mesh[1] - center[1]) ** 2
    assert np.all(np.asarray(f.values)[r2 >= 0.3**2] == 0.0)


def test_bump_escaping_domain_rejected():
    with pytest.raises(ValueError, match="escapes"):
        bump((0.9, 0.0), 0.3, spec2(16, 1.0))


def test_bump_support_measure_matches_ball_volume():
    spec = spec2(128, 1.0)
    rho = 0.5
    f = bump((0.0, 0.0), rho, spec)
    measured = np.count_nonzero(f.values) * spec.cell_measure
    ball = math.pi * rho**2
    shell = math.pi * ((rho + spec.spacing) ** 2 - (rho - spec.spacing) ** 2)
    assert abs(measured - ball) <= shell


# ---------------------------------------------------------------- cones


def test_smoothstep_clamps_exactly():
    t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    s = smoothstep(t)
    assert s[0] == 0.0 and s[1] == 0.0
    assert s[3] == 1.0 and s[4] == 1.0
    assert 0.0 < s[2] < 1.0


def test_cone_power_A_values():
    spec = GridSpec(2, 4.0, 256)
    rho, eps, kappa = 1.0, 0.125, 4.0
    A = cone_power_A(0.5, rho, eps, kappa, spec)
    # on the negative axis, outside the enlarged cone: exact zero
    assert A.value_at((-1.0 + spec.spacing / 2, spec.spacing / 2)) == 0.0
    # on the inner cone axis: exactly |x|^(-1/2)
    x_axis = spec.axis_coords()
    i = int(np.argmin(np.abs(x_axis - rho / 2)))
    j = int(np.argmin(np.abs(x_axis - 0.0)))
    x_pt = (float(x_axis[i]), float(x_axis[j]))
    r = math.hypot(*x_pt)
    inside = kappa * x_pt[1] ** 2 < x_pt[0] ** 2 and 0 < x_pt[0] < rho
    assert inside
    assert A.value_at(x_pt) == pytest.approx(r ** (-0.5), rel=1e-12)


def test_cone_power_A_alpha_zero_plateau():
    spec = GridSpec(2, 4.0, 128)
    A = cone_power_A(0.0, 1.0, 0.125, 4.0, spec)
    mesh = spec.meshgrid()
    inner = (4.0 * mesh[1] ** 2 < mesh[0] ** 2) & (0 < mesh[0]) & (mesh[0] < 1.0)
    vals = np.asarray(A.values)
    assert np.all(vals[np.broadcast_to(inner, vals.shape)] == 1.0)


def test_cone_power_A_vanishes_off_enlarged_cone_exactly():
    spec = GridSpec(2, 4.0, 128)
    rho, eps, kappa = 1.0, 0.125, 4.0
    A = cone_power_A(0.5, rho, eps, kappa, spec)
    mesh = spec.meshgrid()
    outside = ~(
        (kappa * mesh[1] ** 2 < (mesh[0] + eps) ** 2)
        & (-eps < mesh[0])
        & (mesh[0] < rho + eps)
    )
    vals = np.asarray(A.values)
    assert np.all(vals[np.broadcast_to(outside, vals.shape)] == 0.0)


def test_cone_power_f_support_and_unit_plateau():
    spec = GridSpec(2, 4.0, 128)
    f = cone_power_f(0.0, 1.0, 4.0, spec)
    mesh = spec.meshgrid()
    inside = (4.0 * mesh[1] ** 2 < mesh[0] ** 2) & (0 < mesh[0]) & (mesh[0] < 1.0)
    vals = np.asarray(f.values)
    inside_b = np.broadcast_to(inside, vals.shape)
    assert np.all(vals[inside_b] == 1.0)
    assert np.all(vals[~inside_b] == 0.0)


def cone_lp_oracle(beta, p, rho, kappa, d=2):
    # continuum ||f||_p^p over the cone, by radial reduction and quadrature
    phi0 = math.atan(1.0 / math.sqrt(kappa))
    assert d == 2
    e = d - beta * p
    val, _ = quad(lambda phi: (rho / math.cos(phi)) ** e / e, -phi0, phi0)
    return val ** (1.0 / p)


def test_cone_power_f_lp_finiteness_trend():
    rho, kappa = 1.0, 4.0
    # finite side: beta*p < d, discrete norm settles near the closed form
    beta, p = 1.5, 1.0
    norm_c = cone_lp_oracle(beta, p, rho, kappa)
    n_coarse = lp_norm(cone_power_f(beta, rho, kappa, GridSpec(2, 2.0, 256)), p)
    n_fine = lp_norm(cone_power_f(beta, rho, kappa, GridSpec(2, 2.0, 512)), p)
    assert abs(n_fine - norm_c) < abs(n_coarse - norm_c) + 1e-12
    assert n_fine == pytest.approx(norm_c, rel=0.15)
    # divergent side: beta*p > d, norm grows under refinement
    beta, p = 1.5, 2.0
    d_coarse = lp_norm(cone_power_f(beta, rho, kappa, GridSpec(2, 2.0, 256)), p)
    d_fine = lp_norm(cone_power_f(beta, rho, kappa, GridSpec(2, 2.0, 512)), p)
    assert d_fine > 1.2 * d_coarse


# ---------------------------------------------------------------- families


def test_random_family_deterministic_and_positive():
    spec = spec2(32)
    fam1 = random_test_family(7, 4, spec)
    fam2 = random_test_family(7, 4, spec)
    for a, b in zip(fam1, fam2):
        assert np.array_equal(a.values, b.values)
    for f in fam1:
        assert lp_norm(f, 1) > 0.0


def test_random_family_empty_and_supported_inside():
    spec = spec2(32)
    assert random_test_family(3, 0, spec) == []
    for f in random_test_family(3, 3, spec):
        v = np.asarray(f.values)
        assert np.all(v[0, :] == 0.0) and np.all(v[-1, :] == 0.0)
        assert np.all(v[:, 0] == 0.0) and np.all(v[:, -1] == 0.0)


def test_random_family_resolution_independent_parameters():
    # same seed at two resolutions samples the same underlying function
    f_coarse = random_test_family(11, 1, spec2(32))[0]
    f_fine = random_test_family(11, 1, spec2(64))[0]
    assert lp_norm(f_coarse, 1) == pytest.approx(lp_norm(f_fine, 1), rel=0.05)


# ---------------------------------------------------------------- io


def test_grid_function_roundtrip(tmp_path):
    f = bump((0.1, 0.2), 0.4, spec2(16))
    path = tmp_path / "f.dat"
    save_grid_function(f, str(path))
    g = load_grid_function(str(path))
    assert g.spec == f.spec
    assert np.allclose(g.values, f.values, atol=0, rtol=1e-15)
