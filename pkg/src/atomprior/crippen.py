"""Atomic-contribution LogP.

Every heavy atom is assigned one type from the published contribution
table (carbon C1-C27, nitrogen N1-N14, oxygen O1-O12, plus halogens,
S, P and metal classes); hydrogens are typed from the heavy atom that
carries them. LogP is the plain sum of contributions.
"""
from __future__ import annotations

from .molgraph import Molecule

CONTRIB: dict[str, float] = {
    "C1": 0.1441, "C2": 0.0, "C3": -0.2035, "C4": -0.2051, "C5": -0.2783,
    "C6": 0.1551, "C7": 0.0017, "C8": 0.08452, "C9": -0.1444, "C10": -0.0516,
    "C11": 0.1193, "C12": -0.0967, "C13": -0.5443, "C14": 0.0, "C15": 0.245,
    "C16": 0.198, "C17": 0.0, "C18": 0.1581, "C19": 0.2955, "C20": 0.2713,
    "C21": 0.136, "C22": 0.4619, "C23": 0.5437, "C24": 0.1893, "C25": -0.8186,
    "C26": 0.264, "C27": 0.2148, "CS": 0.08129,
    "H1": 0.123, "H2": -0.2677, "H3": 0.2142, "H4": 0.298, "HS": 0.1125,
    "N1": -1.019, "N2": -0.7096, "N3": -1.027, "N4": -0.5188, "N5": 0.08387,
    "N6": 0.1836, "N7": -0.3187, "N8": -0.4458, "N9": 0.01508, "N10": -1.95,
    "N11": -0.3239, "N12": -1.119, "N13": -0.3396, "N14": 0.2887, "NS": -0.4806,
    "O1": 0.1552, "O2": -0.2893, "O3": -0.0684, "O4": 0.4833, "O5": 0.0335,
    "O6": -0.3339, "O7": -1.189, "O8": 0.1788, "O9": -0.1526, "O10": 0.1129,
    "O11": 0.4833, "O12": -1.326, "OS": -0.1188,
    "F": 0.4202, "Cl": 0.6895, "Br": 0.8456, "I": 0.8857, "Hal": -2.996,
    "S1": 0.6482, "S2": -0.0024, "S3": 0.6237,
    "P": 0.8612,
    "Me1": -0.3808, "Me2": -0.0025,
}

_ME1 = frozenset("Li Be Na Mg K Ca Rb Sr Cs Ba Al".split())
_STD = frozenset(("C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "H"))


def _heavy_neighbors(mol: Molecule, idx: int) -> list[int]:
    return [j for j in mol.neighbors(idx) if mol.atoms[j].element != "H"]


def _double_partners(mol: Molecule, idx: int) -> list[int]:
    return [
        b.other(idx) for b in mol.incident_bonds(idx) if b.order == "double"
    ]


def _has_triple(mol: Molecule, idx: int) -> bool:
    return any(b.order == "triple" for b in mol.incident_bonds(idx))


def _total_h(mol: Molecule, idx: int) -> int:
    return mol.atoms[idx].implicit_h + sum(
        1 for j in mol.neighbors(idx) if mol.atoms[j].element == "H"
    )


def _type_carbon(mol: Molecule, idx: int) -> str:
    atom = mol.atoms[idx]
    nbrs = _heavy_neighbors(mol, idx)
    h = _total_h(mol, idx)

    if atom.aromatic:
        if h >= 1:
            return "C18"
        exo = [
            b for b in mol.incident_bonds(idx)
            if b.order == "double" and mol.atoms[b.other(idx)].element in ("C", "N", "O")
        ]
        if exo:
            return "C25"
        sub = [
            j for j in nbrs
            if mol.bond_between(idx, j).order != "aromatic"
        ]
        if not sub:
            return "C19"  # fusion atom, three aromatic bonds
        j = sub[0]
        other = mol.atoms[j]
        if other.element not in _STD:
            return "C13"
        if other.element == "F":
            return "C14"
        if other.element == "Cl":
            return "C15"
        if other.element == "Br":
            return "C16"
        if other.element == "I":
            return "C17"
        if other.aromatic:
            return "C20"
        if other.element == "C":
            return "C21"
        if other.element == "N":
            return "C22"
        if other.element == "O":
            return "C23"
        if other.element == "S":
            return "C24"
        return "C13"

    doubles = _double_partners(mol, idx)
    if _has_triple(mol, idx):
        return "C7"
    if doubles:
        if any(mol.atoms[j].element != "C" and not mol.atoms[j].aromatic for j in doubles):
            return "C5"
        if any(mol.atoms[j].aromatic for j in doubles):
            return "C26"
        if any(mol.atoms[j].aromatic for j in nbrs):
            return "C26"
        return "C6"

    # saturated carbon
    aliphatic_c = [j for j in nbrs if mol.atoms[j].element == "C" and not mol.atoms[j].aromatic]
    aromatic_nbrs = [j for j in nbrs if mol.atoms[j].aromatic]
    hetero = [
        j for j in nbrs
        if not mol.atoms[j].aromatic and mol.atoms[j].element in
        ("N", "O", "P", "S", "F", "Cl", "Br", "I")
    ]
    weird = [
        j for j in nbrs
        if not mol.atoms[j].aromatic and mol.atoms[j].element not in _STD
    ]
    if hetero:
        return "C3" if h >= 2 else "C4"
    if aromatic_nbrs:
        if h == 3:
            return "C8" if mol.atoms[aromatic_nbrs[0]].element == "C" else "C9"
        if h == 2:
            return "C10"
        if h == 1:
            return "C11"
        return "C12"
    if weird:
        return "C27"
    if len(nbrs) == len(aliphatic_c):
        return "C1" if h >= 2 else "C2"
    return "CS"


def _type_nitrogen(mol: Molecule, idx: int) -> str:
    atom = mol.atoms[idx]
    nbrs = _heavy_neighbors(mol, idx)
    h = _total_h(mol, idx)
    q = atom.formal_charge

    if atom.aromatic:
        return "N11" if q == 0 else ("N12" if q > 0 else "NS")
    if q > 0:
        if h >= 1 and not _double_partners(mol, idx) and not _has_triple(mol, idx):
            return "N10"
        if h == 0:
            return "N13"
        return "N14" if _double_partners(mol, idx) else "N10"
    if q < 0:
        return "NS"
    if _has_triple(mol, idx):
        return "N9"
    doubles = _double_partners(mol, idx)
    if doubles:
        return "N5" if h >= 1 else "N6"
    aromatic_nbrs = [j for j in nbrs if mol.atoms[j].aromatic]
    if h >= 2:
        return "N3" if aromatic_nbrs else "N1"
    if h == 1:
        return "N4" if aromatic_nbrs else "N2"
    return "N8" if aromatic_nbrs else "N7"


def _type_oxygen(mol: Molecule, idx: int) -> str:
    atom = mol.atoms[idx]
    nbrs = _heavy_neighbors(mol, idx)
    h = _total_h(mol, idx)

    if atom.aromatic:
        return "O1"
    if atom.formal_charge < 0:
        kinds = {mol.atoms[j].element for j in nbrs}
        if "N" in kinds:
            return "O5"
        if "S" in kinds:
            return "O6"
        if kinds == {"C"}:
            carbonyl = any(
                any(mol.atoms[k].element == "O" for k in _double_partners(mol, j))
                for j in nbrs
            )
            return "O12" if carbonyl else "O7"
        return "O7"
    doubles = _double_partners(mol, idx)
    if doubles:
        j = doubles[0]
        other = mol.atoms[j]
        if other.element in ("N", "O"):
            return "O5"
        if other.element == "S":
            return "O6"
        if other.aromatic:
            return "O8"
        if other.element == "C":
            c_nbrs = [k for k in _heavy_neighbors(mol, j) if k != idx]
            if any(mol.atoms[k].aromatic for k in c_nbrs):
                return "O10"
            if any(mol.atoms[k].element not in ("C", "N", "O", "H") for k in c_nbrs):
                return "O11"
            return "O9"
        return "OS"
    if h >= 1:
        return "O2"
    if len(nbrs) == 2:
        if any(mol.atoms[j].aromatic for j in nbrs):
            return "O4"
        return "O3"
    return "OS"


def _type_hydrogens(mol: Molecule, idx: int) -> str:
    """Class of the hydrogens carried by heavy atom ``idx``."""
    elem = mol.atoms[idx].element
    if elem in ("C", "H"):
        return "H1"
    if elem == "N":
        return "H3"
    if elem == "O":
        nbrs = _heavy_neighbors(mol, idx)
        if not nbrs:
            return "HS"  # water
        other = mol.atoms[nbrs[0]]
        if other.element == "N":
            return "H3"
        if other.element in ("O", "S"):
            return "H4"
        if other.element == "C":
            if other.aromatic:
                return "H2"
            if _double_partners(mol, nbrs[0]) or _has_triple(mol, nbrs[0]):
                return "H4"  # acid / enol
            return "H2"
        return "H2"
    return "H2" if elem not in ("C", "N", "O") else "HS"


def atom_type(mol: Molecule, idx: int) -> str:
    """Contribution-table type of one heavy atom."""
    atom = mol.atoms[idx]
    elem = atom.element
    if elem == "C":
        return _type_carbon(mol, idx)
    if elem == "N":
        return _type_nitrogen(mol, idx)
    if elem == "O":
        return _type_oxygen(mol, idx)
    if elem in ("F", "Cl", "Br", "I"):
        return elem if atom.formal_charge == 0 else "Hal"
    if elem == "S":
        if atom.aromatic:
            return "S3"
        if atom.formal_charge != 0 or _double_partners(mol, idx):
            return "S2"
        return "S1"
    if elem == "P":
        return "P"
    if elem == "H":
        return _type_hydrogens(mol, idx)
    if elem in _ME1:
        return "Me1"
    return "Me2"


def crippen_logp(mol: Molecule) -> float:
    total = 0.0
    for i, atom in enumerate(mol.atoms):
        total += CONTRIB[atom_type(mol, i)]
        if atom.element != "H" and atom.implicit_h:
            total += atom.implicit_h * CONTRIB[_type_hydrogens(mol, i)]
    return total
