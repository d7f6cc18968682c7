"""Published reference inputs and their printed (4-decimal) results."""

from fractions import Fraction

import numpy as np

from cpbt import AVector, CpDecomposition, reconstruct


def harmonic(d):
    return AVector([Fraction(1, k + 1) for k in range(d + 1)])


def exponential(d):
    from math import factorial

    return AVector([factorial(k) for k in range(d + 1)])


def gaussian(d):
    from math import prod

    return AVector([0 if k % 2 else prod(range(k - 1, 0, -2)) for k in range(d + 1)])


PLANTED = ((1, 0), (1, 2), (1, 1), (2, 1), (0, 1))


def planted(d):
    return reconstruct(CpDecomposition(d, PLANTED))


SMALL_A = AVector([13, 5, 2, 1, 1])
SMALL_Y = [50, 15, 5, 2, 1]
SMALL_ATOMS = [(0.3523, 0.9223), (1.8983, 0.7251)]

HARMONIC_ATOMS = {
    4: [(0.7833, 0.6618), (0.8461, 0.3004), (0.5774, 0.0000)],
    5: [(0.7740, 0.6868), (0.8503, 0.4251), (0.7740, 0.0872)],
    6: [(0.7772, 0.7084), (0.8541, 0.5044), (0.8308, 0.1764), (0.6300, 0.0000)],
    7: [(0.7789, 0.7248), (0.8521, 0.5709), (0.8521, 0.2812), (0.7789, 0.0541)],
}
HARMONIC_RANKS = {4: 3, 5: 3, 6: 4, 7: 4}
HARMONIC_UNIQUE = {4: False, 5: True, 6: False, 7: True}
HARMONIC_LU = {4: (Fraction(9, 100), Fraction(71, 780)), 6: (Fraction(899, 13545), Fraction(251, 3780))}

PLANTED_A = {
    6: [67, 35, 21, 17, 21, 35, 67],
    7: [131, 67, 37, 25, 25, 37, 67, 131],
    8: [259, 131, 69, 41, 33, 41, 69, 131, 259],
    9: [515, 259, 133, 73, 49, 49, 73, 133, 259, 515],
}
PLANTED_Y = {
    6: [1524, 762, 422, 252, 158, 102, 67],
    7: [4504, 2252, 1248, 746, 468, 302, 198, 131],
    8: [13380, 6690, 3710, 2220, 1394, 900, 590, 390, 259],
    9: [39880, 19940, 11064, 6626, 4164, 2690, 1764, 1166, 774, 515],
}
PLANTED_RANKS = {6: 4, 7: 4, 8: 5, 9: 5}
PLANTED_ATOMS = {
    6: [(0.2336, 1.2470), (1.0295, 1.9903), (2.0032, 1.0136), (1.0296, 0.0000)],
    7: [(0.1966, 1.1843), (1.0138, 1.9969), (1.9969, 1.0138), (1.1843, 0.1966)],
}
PLANTED_LU = {6: (Fraction(11213, 252), Fraction(11215, 252)), 8: (Fraction(345, 2), Fraction(345, 2))}

EXPONENTIAL_ATOMS_9 = [(0.3058, 3.8653), (0.5353, 3.7934), (0.7509, 2.7007), (0.9029, 1.2761), (0.9303, 0.2452)]
EXPONENTIAL_LU_10 = (Fraction(13375670400, 4051), Fraction(2552306400, 773))

NEAREST = {
    "ones_twos_d7": (AVector([1, 1, 1, 1, 1, 2, 1, 2]), 3.4623),
    "alternating_d8": (AVector([1, 2, 1, 2, 1, 2, 1, 2, 1]), 8.0000),
    "gaussian_d6": (gaussian(6), 9.1199),
    "gaussian_d7": (gaussian(7), 31.4464),
}
NEAREST_ATOMS = {
    "ones_twos_d7": [(0.8362, 0.3398), (0.8426, 1.0005), (0.8359, 0.3396), (0.8416, 0.9993)],
    "alternating_d8": [(1.0520, 1.0520)],
    "gaussian_d6": [(0.0000, 1.5293), (0.7703, 1.0239), (0.7591, 1.0090), (0.9183, 0.0000)],
    "gaussian_d7": [(0.6369, 1.2438), (0.6341, 1.2382), (0.6322, 1.2347), (0.9812, 0.0000)],
}


def sorted_atoms(atoms):
    """Order atoms by descending support point ``b / (a + b)``."""
    return sorted(atoms, key=lambda ab: -float(ab[1]) / (float(ab[0]) + float(ab[1])))


def max_atom_error(found, expected) -> float:
    f = np.array(sorted_atoms([(float(p), float(q)) for p, q in found]))
    e = np.array(sorted_atoms(expected), dtype=float)
    if f.shape != e.shape:
        return np.inf
    return float(np.max(np.abs(f - e)))


def random_cp_instance(rng, d, k):
    """``k`` atoms, support points at least 0.05 apart, weights in [0.1, 10]."""
    while True:
        pts = np.sort(rng.uniform(0.0, 1.0, size=k))
        if k == 1 or np.min(np.diff(pts)) >= 0.05:
            break
    lam = rng.uniform(0.1, 10.0, size=k)
    dec = CpDecomposition.from_measure(d, lam, pts)
    return dec, pts, lam
