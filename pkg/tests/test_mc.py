import math

import numpy as np
import pytest

from riesz_stability.families import make_family
from riesz_stability.functionals import first_variation, second_variation
from riesz_stability.mc import BATCH, batch_rng, mc_energy, mc_second_variation
from riesz_stability.riesz_kernel import KernelParams, ball_energy
from riesz_stability.star_sets import RaySet

NEWTON = KernelParams(3, 2.0)


def test_batch_streams_are_independent_and_reproducible():
    a = batch_rng(5, 0).random(4)
    assert np.array_equal(a, batch_rng(5, 0).random(4))
    assert not np.array_equal(a, batch_rng(5, 1).random(4))
    assert not np.array_equal(a, batch_rng(6, 0).random(4))


def test_deterministic_for_seed():
    A = make_family("ring", 3, 0.05)
    r1 = mc_second_variation(A, NEWTON, 10**5, seed=9)
    r2 = mc_second_variation(A, NEWTON, 10**5, seed=9)
    assert r1 == r2
    assert mc_second_variation(A, NEWTON, 10**5, seed=10).value != r1.value


def test_sample_count_spans_batches():
    B = RaySet.ball(3, 16)
    one = mc_energy(B, NEWTON, BATCH, seed=2)
    two = mc_energy(B, NEWTON, 2 * BATCH, seed=2)
    assert one.samples == BATCH and two.samples == 2 * BATCH
    assert two.value != one.value


@pytest.mark.parametrize("n,lam", [(3, 2.0), (3, 1.2), (2, 1.5), (4, 2.5)])
def test_ball_energy_unbiased(n, lam):
    p = KernelParams(n, lam)
    r = mc_energy(RaySet.ball(n), p, 10**6, seed=1)
    assert abs(r.value - ball_energy(p)) <= 3 * r.stderr
    assert r.stderr < 0.01 * ball_energy(p)


def test_dilation_scaling():
    eps = 0.1
    a = mc_energy(RaySet.ball(3), NEWTON, 10**6, seed=1)
    b = mc_energy(make_family("dilate", 3, eps), NEWTON, 10**6, seed=2)
    ratio = b.value / a.value
    err = ratio * math.hypot(a.stderr / a.value, b.stderr / b.value)
    assert abs(ratio - math.exp(5 * eps)) <= 3 * err


def test_second_variation_of_ball_is_zero():
    r = mc_second_variation(RaySet.ball(3), NEWTON, 10**4)
    assert r.value == 0.0 and r.stderr == 0.0


@pytest.mark.parametrize("kind", ["ring", "squeeze"])
def test_decomposition_identity(kind):
    A = make_family(kind, 3, 0.05)
    V = first_variation(A, NEWTON)
    W = second_variation(A, NEWTON)
    E = mc_energy(A, NEWTON, 2 * 10**6, seed=4)
    lhs = ball_energy(NEWTON) - E.value
    assert abs(lhs - (V - W.value)) <= 3 * (E.stderr + W.error)
