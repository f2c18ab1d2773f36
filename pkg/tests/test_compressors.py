import math

import numpy as np
import pytest

from dcopt import compressors as comp
from dcopt.errors import DimensionMismatch, IncompatibleContracts, OutOfRange


def test_one_bit_example():
    q, bits = comp.OneBit(1.0).compress(np.array([0.3, -0.2, 0.0]))
    np.testing.assert_allclose(q, [0.5, -0.5, 0.5])   # tie at 0 takes + branch
    assert bits == 3


def test_sat_quant_example():
    q, bits = comp.SaturatingQuantizer(2.0, 1.0).compress(np.array([0.6, 5.0]))
    np.testing.assert_allclose(q, [1.0, 2.0])
    assert bits == 2 * math.ceil(math.log2(2 + 2 + 1))
    assert bits == 6


def test_top_k_example():
    q, bits = comp.TopK(1).compress(np.array([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(q, [3.0, 0.0, 0.0])
    assert bits == 32


def test_norm_sign_example():
    q, bits = comp.NormSign().compress(np.array([2.0, -1.0]))
    np.testing.assert_allclose(q, [1.0, -1.0])
    assert bits == 2 + 32


def test_zero_input():
    z = np.zeros(4)
    for c in (comp.SaturatingQuantizer(2.0, 0.5), comp.TopK(2), comp.NormSign(),
              comp.UnbiasedKBit(3), comp.Scalarization(), comp.UniformQuantizer(0.5),
              comp.Identity()):
        q, bits = c.compress(z)
        np.testing.assert_allclose(q, 0.0)
        assert bits >= 1
    # one-bit still emits the + level on zeros
    q, bits = comp.OneBit(2.0).compress(z)
    np.testing.assert_allclose(q, 1.0)
    assert bits == 4
    # uniform quantizer charges the 1-bit floor on tiny inputs
    assert comp.UniformQuantizer(1.0).compress(np.array([0.2, -0.3]))[1] == 2


def test_one_bit_error_bound():
    level = 1.5
    c = comp.OneBit(level)
    rng = np.random.default_rng(3)
    X = rng.uniform(-level, level, size=(10_000, 5))
    X = np.vstack([X, np.full((1, 5), level), np.full((1, 5), -level), np.zeros((1, 5))])
    Q = c._apply(X, rng)
    assert np.abs(Q - X).max() <= level / 2 + 1e-15


def test_sat_quant_region_and_range():
    # non-integer level/step ratio: saturation levels are asymmetric
    c = comp.SaturatingQuantizer(2.5, 1.0)
    rng = np.random.default_rng(4)
    lo, hi = math.floor(-2.5) * 1.0, math.floor(2.5) * 1.0
    X = rng.uniform(-8, 8, size=(5000, 3))
    Q = c._apply(X, rng)
    assert Q.min() >= lo - 1e-12 and Q.max() <= hi + 1e-12
    # inside the unsaturated region the rounding error is at most step/2
    region = math.floor(2.5 / 1.0) * 1.0 + 0.5
    Xin = rng.uniform(-region, region, size=(5000, 3))
    Qin = c._apply(Xin, rng)
    assert np.abs(Qin - Xin).max() <= 0.5 + 1e-12


def test_top_k_squared_inequality():
    c = comp.TopK(2)
    rng = np.random.default_rng(5)
    for _ in range(500):
        x = rng.standard_normal(6) * rng.uniform(0.1, 10)
        q, _ = c.compress(x)
        assert q @ q <= x @ x + 1e-12
        err = q - x
        assert err @ err <= (1 - 2 / 6) * (x @ x) + 1e-12


def test_unbiased_kbit_is_unbiased():
    c = comp.UnbiasedKBit(3, seed=7)
    x = np.array([0.7, -1.3, 0.2, 2.1, 0.0])
    gen = np.random.default_rng(0)
    draws = c._apply(np.broadcast_to(x, (100_000, 5)).copy(), gen)
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
    # absolute headroom covers summation rounding on zero-variance coordinates
    assert np.all(np.abs(mean - x) <= 4 * se + 1e-9)


def test_scalarization_direction_moments():
    c = comp.Scalarization(seed=9)
    d = 4
    gen = np.random.default_rng(1)
    G = gen.standard_normal((100_000, d))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    outer = np.einsum("ti,tj->ij", G, G) / G.shape[0]
    se = 1.0 / math.sqrt(G.shape[0])
    assert np.abs(outer - np.eye(d) / d).max() <= 4 * se
    # shared direction: identical for all agents at an iteration, varies with k
    psi0 = c.direction(d, 3)
    psi1 = c.direction(d, 3)
    np.testing.assert_array_equal(psi0, psi1)
    assert not np.array_equal(psi0, c.direction(d, 4))


def test_uniform_quant_bits_depend_on_input():
    c = comp.UniformQuantizer(0.5)
    x = np.array([3.3, -0.2, 1.0])
    _, bits = c.compress(x)
    levels = 2 * math.floor(3.3 / 0.5) + 1
    assert bits == 3 * max(1, math.ceil(math.log2(levels)))


def test_unbiased_kbit_bits():
    assert comp.UnbiasedKBit(4).compress(np.ones(6))[1] == (4 + 1) * 6 + 32
    assert comp.RandK(2, seed=0).compress(np.ones(6))[1] == 2 * 32
    assert comp.Scalarization(seed=0).compress(np.ones(6))[1] == 32


def test_determinism_and_stream_separation():
    c = comp.UnbiasedKBit(2, seed=42)
    x = np.array([1.0, -2.0, 0.5])
    q1, b1 = c.compress(x, iteration=5, agent=2)
    q2, b2 = c.compress(x, iteration=5, agent=2)
    np.testing.assert_array_equal(q1, q2)
    assert b1 == b2
    q3, _ = c.compress(x, iteration=6, agent=2)
    q4, _ = c.compress(x, iteration=5, agent=3)
    assert not np.array_equal(q1, q3) or not np.array_equal(q1, q4)


def test_noisy_wrapper_bounded():
    base = comp.UniformQuantizer(0.5, seed=3)
    c = comp.Noisy(base, 0.25)
    x = np.array([1.1, -0.4])
    for it in range(200):
        q, bits = c.compress(x, iteration=it)
        qb, bb = base.compress(x, iteration=it)
        assert np.linalg.norm(q - qb) <= 0.25 + 1e-12
        assert bits == bb


def test_compose_orders():
    c9 = comp.compose_kbit_of_uniform(3, 0.5, seed=1)
    assert c9.order == "rel_of_abs"
    c10 = comp.compose_uniform_of_kbit(3, 0.5, seed=1)
    assert c10.order == "abs_of_rel"
    x = np.array([0.8, -1.7, 2.2])
    for c in (c9, c10):
        q, bits = c.compress(x, iteration=1)
        assert np.all(np.isfinite(q)) and bits > 0
    with pytest.raises(IncompatibleContracts):
        comp.Compose(comp.UniformQuantizer(0.5), comp.UniformQuantizer(0.2))


def test_parameter_validation():
    with pytest.raises(OutOfRange):
        comp.OneBit(0.0)
    with pytest.raises(OutOfRange):
        comp.SaturatingQuantizer(1.0, 3.0)   # step must be < 2 * level
    with pytest.raises(OutOfRange):
        comp.TopK(0)
    with pytest.raises(DimensionMismatch):
        comp.TopK(5).compress(np.ones(3))
    with pytest.raises(DimensionMismatch):
        comp.RandK(5, seed=0).compress(np.ones(3))
    with pytest.raises(DimensionMismatch):
        comp.OneBit(1.0).compress(np.ones((2, 2)))
