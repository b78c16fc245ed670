"""Stochastic number encoding and AND-gate multiplication tests."""

import numpy as np
import pytest

from softdyn.errors import InsufficientDataError
from softdyn.stochastic import (StochasticNumber, and_multiply,
                                decode_product, sng, stochastic_multiply)


def test_sng_bit_rule():
    rnd = np.array([0, 41, 42, 43, 127, 10])
    s = sng(42, 7, rnd, 6)
    assert s.bits.tolist() == [1, 1, 0, 0, 0, 1]


def test_sng_density_tracks_value():
    rng = np.random.default_rng(8)
    rnd = rng.integers(0, 128, 100_000)
    for value in (0, 32, 64, 100, 127):
        s = sng(value, 7, rnd, len(rnd))
        assert s.probability == pytest.approx(value / 128, abs=0.01)


def test_sng_validation():
    rnd = np.zeros(10, dtype=int)
    with pytest.raises(ValueError):
        sng(128, 7, rnd, 10)
    with pytest.raises(ValueError):
        sng(-1, 7, rnd, 10)
    with pytest.raises(InsufficientDataError):
        sng(5, 7, rnd, 20)
    with pytest.raises(ValueError):
        sng(5, 7, np.full(10, 200), 10)


def test_and_multiply_densities():
    a = StochasticNumber(bits=np.array([1, 1, 0, 0]), width=7)
    b = StochasticNumber(bits=np.array([1, 0, 1, 0]), width=7)
    c = and_multiply(a, b)
    assert c.bits.tolist() == [1, 0, 0, 0]


def test_and_multiply_checks():
    a = StochasticNumber(bits=np.ones(4, dtype=int), width=7)
    with pytest.raises(ValueError):
        and_multiply(a, StochasticNumber(bits=np.ones(3, dtype=int), width=7))
    with pytest.raises(ValueError):
        and_multiply(a, StochasticNumber(bits=np.ones(4, dtype=int), width=6))


def test_decode_product_scaling():
    s = StochasticNumber(bits=np.array([1, 1, 0, 0]), width=7)
    assert decode_product(s) == round(0.5 * 128 * 128)
    assert decode_product(s, denominator=127) == round(0.5 * 127 * 127)


def test_multiply_accuracy_42_54():
    rng = np.random.default_rng(9)
    rnd = rng.integers(0, 128, 400_000)
    estimate, rel_error, trace = stochastic_multiply(42, 54, 7, 200_000, rnd)
    assert abs(estimate - 42 * 54) / (42 * 54) < 0.05
    assert rel_error < 0.05
    assert len(trace) == 200_000
    assert trace[-1] == estimate


def test_multiply_error_shrinks_with_length():
    rng = np.random.default_rng(10)
    rnd = rng.integers(0, 128, 2_000_000)
    errors = []
    for n in (1_000, 100_000, 1_000_000):
        _, err, _ = stochastic_multiply(100, 90, 7, n, rnd[:2 * n])
        errors.append(err)
    assert errors[2] < errors[0]


def test_multiply_zero_operand():
    rnd = np.random.default_rng(11).integers(0, 128, 2_000)
    estimate, rel_error, _ = stochastic_multiply(0, 54, 7, 1_000, rnd)
    assert estimate == 0
    assert rel_error == 0.0


def test_multiply_operand_order_symmetry():
    # independent halves mean swapping operands reshuffles which half
    # encodes which value, but the estimate stays within noise
    rnd = np.random.default_rng(12).integers(0, 128, 200_000)
    e1, _, _ = stochastic_multiply(42, 54, 7, 100_000, rnd)
    e2, _, _ = stochastic_multiply(54, 42, 7, 100_000, rnd)
    assert abs(e1 - e2) / (42 * 54) < 0.05


def test_multiply_insufficient_stream():
    with pytest.raises(InsufficientDataError):
        stochastic_multiply(3, 4, 7, 100, np.zeros(150, dtype=int))
