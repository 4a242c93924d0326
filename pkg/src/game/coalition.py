"""
Coalitions as integer bitmasks over player indices
"""
from functools import reduce
from typing import Iterable, List

import numpy as np

MAX_PLAYERS = 64


def bits_to_mask(bits: Iterable[int]) -> int:
    return reduce(lambda x, y: x | y, (1 << b for b in bits), 0)


def mask_to_bits(mask: int) -> List[int]:
    members = []
    index = 0
    while mask:
        if mask & 1:
            members.append(index)
        mask >>= 1
        index += 1
    return members


def grand_mask(n_players: int) -> int:
    return (1 << n_players) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_array(n_players: int) -> np.ndarray:
    return np.arange(1 << n_players, dtype=np.int64)


def popcount_array(masks: np.ndarray, n_players: int) -> np.ndarray:
    sizes = np.zeros(masks.shape, dtype=np.int64)
    for player in range(n_players):
        sizes += (masks >> player) & 1
    return sizes


def coalition_sums(values: np.ndarray) -> np.ndarray:
    """x(S) for every mask S, built by doubling: sums[S | bit_i] = sums[S] + x_i."""
    n_players = len(values)
    sums = np.zeros(1 << n_players, dtype=float)
    for player in range(n_players):
        width = 1 << player
        sums[width:2 * width] = sums[:width] + values[player]
    return sums


def describe(mask: int) -> str:
    return "{" + ",".join(str(b) for b in mask_to_bits(mask)) + "}"
