"""Contract algebra and statistical verification of both assumption classes."""

import numpy as np
import pytest

from dcopt import compressors as comp
from dcopt.errors import OutOfRange, WrongClass


def test_lemma1_relative_values():
    c = comp.lemma1_relative_params(0.5, 1.0, 1.0)
    assert (c.r, c.C, c.delta) == (1.0, 3.0, 0.25)
    c = comp.lemma1_relative_params(1.0, 1.0, 0.0)
    assert (c.r, c.C, c.delta) == (1.0, 0.0, 0.5)
    c = comp.lemma1_relative_params(0.25, 2.0, 3.0)
    assert (c.r, c.delta) == (2.0, 0.125)
    assert abs(c.C - 15.75) < 1e-12


def test_lemma1_absolute_values():
    c = comp.lemma1_absolute_params(1.0, 1.0, 1.0)
    assert (c.r, c.C, c.delta) == (1.0, 4.0, 1.0)
    c = comp.lemma1_absolute_params(1.0, 1.0, 0.0)
    assert (c.r, c.C, c.delta) == (1.0, 2.0, 1.0)
    c = comp.lemma1_absolute_params(0.5, 2.0, 2.0)
    assert (c.r, c.C, c.delta) == (2.0, 3.0, 1.0)
    with pytest.raises(OutOfRange):
        comp.lemma1_relative_params(1.5, 1.0, 0.0)


def test_lemma2_composition_values():
    rel = comp.AssumptionContract(comp.GLOBAL, 2.0, 1.0, 3.0, 0.25)   # delta_r = 0.5
    abs_ = comp.AssumptionContract(comp.GLOBAL, 2.0, 1.0, 4.0, 1.0)
    c = comp.lemma2_compose_params(rel, abs_, "rel_of_abs")
    assert abs(c.C - 84.0) < 1e-12 and c.delta == 0.0625 and c.r == 1.0
    c = comp.lemma2_compose_params(rel, abs_, "abs_of_rel")
    assert abs(c.C - 31.5) < 1e-12 and c.delta == 0.125 and c.r == 1.0
    # error-free composition keeps C = 0 in both orders
    rel0 = comp.AssumptionContract(comp.GLOBAL, 2.0, 1.0, 0.0, 0.25)
    abs0 = comp.AssumptionContract(comp.GLOBAL, 2.0, 1.0, 0.0, 1.0)
    for order in ("rel_of_abs", "abs_of_rel"):
        assert comp.lemma2_compose_params(rel0, abs0, order).C == 0.0


@pytest.mark.parametrize("make", [
    lambda: comp.OneBit(1.0),
    lambda: comp.SaturatingQuantizer(2.0, 1.0),
    lambda: comp.NormSign(),
])
def test_local_contracts_pass(make):
    c = make()
    report = comp.verify_local_assumption(c, c.contract(6), samples=3000, seed=2)
    assert report.passed, report
    assert report.max_ratio <= 1.0 + 1e-12


def test_top_k_stated_delta_is_too_large():
    # the advertised point contract delta = k/d fails the unsquared bound on
    # equal-magnitude boundary points; the corrected delta passes
    c = comp.TopK(2)
    stated = comp.verify_local_assumption(c, c.contract(6), samples=2000, seed=2)
    assert not stated.passed
    assert stated.max_ratio == pytest.approx(1.0 / np.sqrt(1.0 - 2.0 / 6.0), rel=1e-9)
    sound = comp.verify_local_assumption(c, c.sound_contract(6), samples=2000, seed=2)
    assert sound.passed


def test_wrong_contract_detected():
    # delta beyond 1 - step/(2 level) has a boundary counterexample
    c = comp.SaturatingQuantizer(2.0, 1.0)
    too_tight = comp.AssumptionContract(comp.LOCAL, np.inf, 1.0, 2.0, 0.9)
    report = comp.verify_local_assumption(c, too_tight, samples=2000, seed=2)
    assert not report.passed and report.max_ratio > 1.0


def test_class_mismatch_raises():
    c = comp.OneBit(1.0)
    with pytest.raises(WrongClass):
        comp.verify_global_assumption(c, c.contract(4), trials_per_sample=10)
    u = comp.UnbiasedKBit(3)
    with pytest.raises(WrongClass):
        comp.verify_local_assumption(u, u.contract(4))


GLOBAL_SPECS = [
    ("unbiased_kbit", lambda: comp.UnbiasedKBit(3, seed=5)),
    ("rand_k", lambda: comp.RandK(3, seed=5)),
    ("scalarization", lambda: comp.Scalarization(seed=5)),
    ("uniform_quant", lambda: comp.UniformQuantizer(0.5, seed=5)),
    ("unbiased_kbit_noisy", lambda: comp.Noisy(comp.UnbiasedKBit(3, seed=5), 2.0)),
    ("rand_k_noisy", lambda: comp.Noisy(comp.RandK(3, seed=5), 2.0)),
    ("scalarization_noisy", lambda: comp.Noisy(comp.Scalarization(seed=5), 2.0)),
    ("uniform_quant_noisy", lambda: comp.Noisy(comp.UniformQuantizer(0.5, seed=5), 2.0)),
    ("compose_rel_of_abs", lambda: comp.compose_kbit_of_uniform(3, 0.5, 1.0, 1.0, seed=5)),
    ("compose_abs_of_rel", lambda: comp.compose_uniform_of_kbit(3, 0.5, 1.0, 1.0, seed=5)),
]


@pytest.mark.parametrize("name,make", GLOBAL_SPECS)
def test_global_contracts_pass(name, make):
    c = make()
    contract = c.contract(8)
    report = comp.verify_global_assumption(c, contract, samples=12,
                                           trials_per_sample=4000, seed=3, d=8)
    assert report.passed, (name, report)


def test_verification_deterministic():
    c = comp.Noisy(comp.RandK(2, seed=7), 1.0)
    r1 = comp.verify_global_assumption(c, c.contract(6), samples=8,
                                       trials_per_sample=500, seed=11, d=6)
    r2 = comp.verify_global_assumption(c, c.contract(6), samples=8,
                                       trials_per_sample=500, seed=11, d=6)
    assert r1.max_ratio == r2.max_ratio


def test_unbiased_kbit_needs_enough_levels():
    with pytest.raises(OutOfRange):
        comp.UnbiasedKBit(1, seed=0).contract(8)   # 4^1 < 8
