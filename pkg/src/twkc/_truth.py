"""Truth tables as Python integers.

A truth table over an ordered variable list ``(v_0, ..., v_{n-1})`` is an
integer with ``2**n`` bits; bit ``i`` is the function's value on the
valuation that sets ``v_j`` to bit ``j`` of ``i``.
"""

from functools import lru_cache


def full_mask(n):
    return (1 << (1 << n)) - 1


@lru_cache(maxsize=None)
def var_pattern(j, n):
    """Truth table of the ``j``-th variable among ``n``."""
    if not 0 <= j < n:
        raise ValueError(f"variable position {j} out of range for {n} variables")
    half = 1 << j
    period = half << 1
    unit = ((1 << half) - 1) << half
    reps = 1 << (n - j - 1)
    return unit * (((1 << (period * reps)) - 1) // ((1 << period) - 1))


def bit_to_valuation(index, variables):
    return {v: (index >> j) & 1 for j, v in enumerate(variables)}


def valuation_to_bit(valuation, variables):
    return sum(1 << j for j, v in enumerate(variables) if valuation[v])


def iter_ones(table):
    """Yield the indices of the set bits of ``table`` in increasing order."""
    while table:
        low = table & -table
        yield low.bit_length() - 1
        table ^= low
