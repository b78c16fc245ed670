"""Stochastic number generation and AND-gate multiplication.

A deterministic k-bit value X becomes a probability-coded bit sequence
by comparing it against successive random k-bit integers (bit = 1 when
RND < X), so the one-density approximates X / 2^k.  Multiplication is a
bitwise AND of two independently generated sequences; the product is
read back by scaling the output density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError

__all__ = ["StochasticNumber", "sng", "and_multiply", "decode_product",
           "stochastic_multiply"]


@dataclass(frozen=True)
class StochasticNumber:
    """Probability-coded bit sequence with its integer width."""

    bits: np.ndarray
    width: int = 7

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if len(bits) < 1:
            raise ValueError("a stochastic number needs at least one bit")
        if bits.max(initial=0) > 1:
            raise ValueError("bits must be 0/1")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)

    @property
    def probability(self) -> float:
        return float(self.bits.mean())


def sng(value: int, width: int, rnd: np.ndarray, n_bits: int) -> StochasticNumber:
    """Encode `value` as a stochastic bit sequence of length `n_bits`.

    `rnd` supplies the comparison integers, one per output bit.
    """
    if not 0 <= value < (1 << width):
        raise ValueError(f"value must lie in [0, {(1 << width) - 1}]")
    rnd = np.asarray(rnd)
    if len(rnd) < n_bits:
        raise InsufficientDataError(
            f"need {n_bits} random integers, stream has {len(rnd)}")
    if len(rnd) and (rnd.min() < 0 or rnd.max() >= (1 << width)):
        raise ValueError("random integers exceed the stated width")
    return StochasticNumber(bits=(rnd[:n_bits] < value).astype(np.uint8),
                            width=width)


def and_multiply(a: StochasticNumber, b: StochasticNumber) -> StochasticNumber:
    """Bitwise AND of two stochastic numbers; densities multiply."""
    if len(a) != len(b):
        raise ValueError("operand sequences must have equal length")
    if a.width != b.width:
        raise ValueError("operand widths differ")
    return StochasticNumber(bits=a.bits & b.bits, width=a.width)


def decode_product(s: StochasticNumber, width: int | None = None,
                   denominator: int | None = None) -> int:
    """Scale the output density back to an integer product estimate.

    The default denominator is 2^width per operand; pass
    `denominator=2**width - 1` for the alternative convention.
    """
    width = s.width if width is None else width
    if denominator is None:
        denominator = 1 << width
    return int(round(s.probability * denominator * denominator))


def stochastic_multiply(x1: int, x2: int, width: int, n_bits: int,
                        rnd: np.ndarray, denominator: int | None = None):
    """Multiply two integers stochastically; returns estimate and trace.

    The two operands consume disjoint halves of `rnd` so their sequences
    are independent.  The returned trace holds the running product
    estimate after each prefix of the output sequence.
    """
    rnd = np.asarray(rnd)
    if len(rnd) < 2 * n_bits:
        raise InsufficientDataError(
            f"need {2 * n_bits} random integers, stream has {len(rnd)}")
    a = sng(x1, width, rnd[:n_bits], n_bits)
    b = sng(x2, width, rnd[n_bits:2 * n_bits], n_bits)
    product = and_multiply(a, b)
    denom = (1 << width) if denominator is None else denominator
    scale = float(denom) * denom
    prefix_p = np.cumsum(product.bits) / np.arange(1, n_bits + 1)
    trace = np.round(prefix_p * scale).astype(np.int64)
    estimate = int(trace[-1])
    exact = x1 * x2 * scale / float((1 << width)) ** 2
    rel_error = abs(estimate - exact) / exact if exact else float(estimate != 0)
    return estimate, float(rel_error), trace
