"""Periodic-table data shared across the package.

Atomic weights follow the 2021 IUPAC standard (conventional values for
interval elements), rounded to four decimals. Default valences drive
implicit-hydrogen filling and valence checking for the organic subset.
"""
from __future__ import annotations

# fmt: off
ATOMIC_NUMBERS: dict[str, int] = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "Ar": 18, "K": 19, "Ca": 20, "Ti": 22, "V": 23,
    "Cr": 24, "Mn": 25, "Fe": 26, "Co": 27, "Ni": 28, "Cu": 29, "Zn": 30,
    "Ga": 31, "Ge": 32, "As": 33, "Se": 34, "Br": 35, "Kr": 36, "Rb": 37,
    "Sr": 38, "Zr": 40, "Mo": 42, "Ru": 44, "Rh": 45, "Pd": 46, "Ag": 47,
    "Cd": 48, "In": 49, "Sn": 50, "Sb": 51, "Te": 52, "I": 53, "Xe": 54,
    "Cs": 55, "Ba": 56, "La": 57, "Gd": 64, "W": 74, "Re": 75, "Os": 76,
    "Ir": 77, "Pt": 78, "Au": 79, "Hg": 80, "Tl": 81, "Pb": 82, "Bi": 83,
}

ATOMIC_WEIGHTS: dict[str, float] = {
    "H": 1.008, "He": 4.0026, "Li": 6.94, "Be": 9.0122, "B": 10.81,
    "C": 12.011, "N": 14.007, "O": 15.999, "F": 18.9984, "Ne": 20.1797,
    "Na": 22.9898, "Mg": 24.305, "Al": 26.9815, "Si": 28.085, "P": 30.9738,
    "S": 32.06, "Cl": 35.45, "Ar": 39.95, "K": 39.0983, "Ca": 40.078,
    "Ti": 47.867, "V": 50.9415, "Cr": 51.9961, "Mn": 54.938, "Fe": 55.845,
    "Co": 58.9332, "Ni": 58.6934, "Cu": 63.546, "Zn": 65.38, "Ga": 69.723,
    "Ge": 72.63, "As": 74.9216, "Se": 78.971, "Br": 79.904, "Kr": 83.798,
    "Rb": 85.4678, "Sr": 87.62, "Zr": 91.224, "Mo": 95.95, "Ru": 101.07,
    "Rh": 102.9055, "Pd": 106.42, "Ag": 107.8682, "Cd": 112.414,
    "In": 114.818, "Sn": 118.71, "Sb": 121.76, "Te": 127.6, "I": 126.9045,
    "Xe": 131.293, "Cs": 132.9055, "Ba": 137.327, "La": 138.9055,
    "Gd": 157.25, "W": 183.84, "Re": 186.207, "Os": 190.23, "Ir": 192.217,
    "Pt": 195.084, "Au": 196.9666, "Hg": 200.592, "Tl": 204.38,
    "Pb": 207.2, "Bi": 208.9804,
}
# fmt: on

# Allowed total valences (sigma + pi + implicit H) for neutral atoms.
# Multi-valued entries are tried smallest-first when filling hydrogens.
DEFAULT_VALENCES: dict[str, tuple[int, ...]] = {
    "H": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

# Valence-shell electron counts, used for lone-pair / steric-number math.
VALENCE_ELECTRONS: dict[str, int] = {
    "H": 1, "B": 3, "C": 4, "N": 5, "O": 6, "F": 7,
    "Si": 4, "P": 5, "S": 6, "Cl": 7, "As": 5, "Se": 6,
    "Br": 7, "Te": 6, "I": 7,
}

# Elements writable without brackets, and the lowercase aromatic symbols.
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As"})

# Heteroatoms as the descriptor and card-selection layers use the term.
HETEROATOMS = frozenset({"N", "O", "S", "P", "F", "Cl", "Br", "I"})


def allowed_valences(element: str, charge: int) -> tuple[int, ...]:
    """Charge-adjusted valence set for an element, empty if untabulated.

    Positive charge raises the bonding capacity of elements to the right
    of carbon (N+ binds 4, O+ binds 3) and lowers it for boron; carbon
    loses one slot either way (carbanion and carbenium both bind 3).
    """
    base = DEFAULT_VALENCES.get(element)
    if base is None:
        return ()
    if charge == 0:
        return base
    if element == "B":
        shifted = tuple(v - charge for v in base)
    elif element == "C":
        shifted = tuple(v - abs(charge) for v in base)
    else:
        shifted = tuple(v + charge for v in base)
    return tuple(v for v in shifted if v >= 0)
