"""Shared fixtures; the slow ones are session-scoped and lazy."""

import mpmath
import numpy as np
import pytest

from softdyn.oscillator import OscillatorConfig


def constant_bits(value, n_bits, skip=0):
    """Binary expansion of an mpmath constant, integer part included."""
    mpmath.mp.prec = n_bits + skip + 64
    fixed = mpmath.libmp.to_fixed(value._mpf_, n_bits + skip + 32)
    digits = bin(fixed)[2:]
    return np.array([int(c) for c in digits[skip:skip + n_bits]], dtype=np.int64)


@pytest.fixture(scope="session")
def config():
    return OscillatorConfig.calibrated_default()


@pytest.fixture(scope="session")
def e_bits_1m():
    return constant_bits(mpmath.e, 1_000_000)


@pytest.fixture(scope="session")
def pi_bits_1m():
    return constant_bits(mpmath.pi, 1_000_000)


@pytest.fixture(scope="session")
def reference_bits_1m():
    return np.random.default_rng(1).integers(0, 2, 1_000_000)
