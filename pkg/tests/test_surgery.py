import math

import numpy as np
import pytest

from riesz_stability.families import make_family, perturbed_ball
from riesz_stability.functionals import deficit
from riesz_stability.riesz_kernel import KernelParams
from riesz_stability.sphere_math import angular_grid, unit_ball_volume
from riesz_stability.star_sets import RaySet, asymmetry, median_center, scale_to_unit
from riesz_stability.surgery import DEFAULT_C, axial_moment, surgery_reduce, translate_axial

NEWTON = KernelParams(3, 2.0)
P1_TOL = 1e-9
P2_TOL = 1e-6


def shifted_ball(n, t, m=64):
    g = angular_grid(n, m)
    return RaySet.star(g, t * g.cos + np.sqrt(1.0 - (t * g.sin) ** 2))


def test_axial_moment_of_ball():
    assert abs(axial_moment(RaySet.ball(3))) < 1e-15


@pytest.mark.parametrize("t", [0.05, -0.12])
def test_translate_ball(t):
    moved = translate_axial(RaySet.ball(3), t)
    np.testing.assert_allclose(moved.b[:, 0], shifted_ball(3, t).b[:, 0], atol=1e-13)


def test_translate_round_trip_and_volume():
    A = make_family("ring", 3, 0.05)
    B = translate_axial(translate_axial(A, 0.01), -0.01)
    np.testing.assert_allclose(B.ends, A.ends, atol=1e-10)
    assert translate_axial(A, 0.01).volume() == pytest.approx(A.volume(), rel=1e-12)
    assert translate_axial(A, 0.0) is A


def test_translate_rejects_large_offset():
    g = angular_grid(3, 16)
    A = RaySet.from_intervals(g, [[(0.0, 0.05), (0.1, 1.0)]] * 16)
    with pytest.raises(ValueError):
        translate_axial(A, 0.2)


def test_identity_on_annular_centred_input():
    A = make_family("ring", 3, 0.001)
    At, eps, rep = surgery_reduce(A, NEWTON, report=True)
    np.testing.assert_allclose(At.ends, scale_to_unit(A).ends, atol=1e-12)
    assert rep.r_outer == rep.rho and rep.r_inner == rep.rho
    # the optimal ball of the ring sits off-centre; recentring undoes that shift
    _, t_opt = asymmetry(scale_to_unit(A))
    assert rep.x0 == pytest.approx(t_opt, abs=1e-12)
    assert eps == pytest.approx(-math.log(1 - rep.R - abs(rep.x0)), rel=1e-15)


def test_far_shell_piece_relocates():
    g = angular_grid(3, 64)
    rows = [[(0.0, 1.0)] + ([(1.6, 1.6 + 1e-4)] if th < 1.0 else []) for th in g.theta]
    A = scale_to_unit(RaySet.from_intervals(g, rows))
    At, eps, rep = surgery_reduce(A, NEWTON, report=True)
    assert np.max(At.b) < 1.0 + 2 * rep.R
    assert rep.r_outer > rep.rho
    assert rep.P1 < 0.0
    assert deficit(At, NEWTON).delta < deficit(A, NEWTON).delta


def test_rejects_large_asymmetry():
    with pytest.raises(ValueError):
        surgery_reduce(make_family("squeeze", 3, 0.1), NEWTON)


def test_requires_stability_range():
    with pytest.raises(ValueError):
        surgery_reduce(RaySet.ball(3), KernelParams(3, 0.8))


def test_plain_return():
    out = surgery_reduce(perturbed_ball(3, 1), NEWTON)
    assert len(out) == 2


@pytest.mark.parametrize("seed", range(12))
def test_properties_on_random_inputs(seed):
    A = perturbed_ball(3, seed)
    At, eps, rep = surgery_reduce(A, NEWTON, report=True)
    vb = unit_ball_volume(3)
    assert rep.P1 <= P1_TOL
    assert abs(rep.P2) <= P2_TOL * vb
    assert rep.P3
    assert abs(rep.P4) < 1e-9
    assert rep.eps_ratio <= 1.5 * DEFAULT_C
    assert rep.median_ratio <= 1.0
    # the output is median-centred
    assert abs(median_center(At)) < 1e-8
    assert At.volume() == pytest.approx(vb, rel=1e-12)


def test_properties_below_newton_exponent():
    p = KernelParams(3, 1.5)
    for seed in range(3):
        At, eps, rep = surgery_reduce(perturbed_ball(3, seed, amplitude=1e-4), p, C=5.0, report=True)
        assert rep.P3 and abs(rep.P2) <= P2_TOL * unit_ball_volume(3)
        assert rep.eps_ratio <= 1.5 * 5.0
        alpha, _ = asymmetry(At)
        assert alpha == pytest.approx(rep.alpha_after)
