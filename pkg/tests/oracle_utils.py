"""Independent brute-force oracles shared by the unit and acceptance tests."""
import numpy as np

from bslab.percolation import StripField, level_size


def reachable_brute(field: StripField, start_ms, upto: int) -> set[int]:
    """Set-of-coordinates reachability by explicit frontier chasing.

    Deliberately written against the (m, n) coordinates rather than the
    packed index arrays used by evolve.
    """
    N = field.N
    frontier = set(int(m) for m in start_ms)
    for n in range(upto):
        par = n % 2
        nxt: set[int] = set()
        for m in frontier:
            i = (m - par) // 2
            if m - 1 >= 0 and field.bonds_left[n][i]:
                nxt.add(m - 1)
            if m + 1 <= 2 * N and field.bonds_right[n][i]:
                nxt.add(m + 1)
        frontier = nxt
    return frontier


def free_bond_slots(N: int, levels: int) -> list[tuple[int, int, int]]:
    """(level, side, index) triples of the bonds that exist (not clipped)."""
    slots = []
    for n in range(levels):
        w = level_size(N, n)
        for i in range(w):
            if not (n % 2 == 0 and i == 0):
                slots.append((n, 0, i))
        for i in range(w):
            if not (n % 2 == 0 and i == w - 1):
                slots.append((n, 1, i))
    return slots


def field_from_bits(N: int, levels: int, slots, bits: int) -> StripField:
    bl = [np.zeros(level_size(N, n), dtype=bool) for n in range(levels)]
    br = [np.zeros(level_size(N, n), dtype=bool) for n in range(levels)]
    for j, (n, side, i) in enumerate(slots):
        if (bits >> j) & 1:
            (bl if side == 0 else br)[n][i] = True
    return StripField(N, levels, tuple(bl), tuple(br))


def iter_all_fields(N: int, levels: int):
    slots = free_bond_slots(N, levels)
    for bits in range(1 << len(slots)):
        yield field_from_bits(N, levels, slots, bits)
