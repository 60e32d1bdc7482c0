"""Per-atom and whole-molecule descriptors.

Partial charges use the iterative partial-equalization scheme (12 rounds,
damping 0.5^k, seeded from formal charges) with implicit hydrogens treated
as pseudo-atoms; the reported per-atom charge excludes its hydrogens, so
charge conservation holds over heavy atoms plus the returned hydrogen
charges. Polar surface area uses the published fragment-contribution
table for N/O (S/P behind a flag), and LogP the atomic-contribution
scheme in :mod:`atomprior.crippen`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .crippen import crippen_logp
from .elements import ATOMIC_WEIGHTS, HETEROATOMS, VALENCE_ELECTRONS
from .molgraph import Molecule

GASTEIGER_ITERATIONS = 12
GASTEIGER_DAMPING = 0.5

# Electronegativity polynomials chi(q) = a + b*q + c*q^2 per (element, class).
# The hydrogen cation electronegativity is fixed at 20.02 rather than a+b+c.
_PEOE_PARAMS: dict[tuple[str, str], tuple[float, float, float]] = {
    ("H", "*"): (7.17, 6.24, -0.56),
    ("C", "sp3"): (7.98, 9.18, 1.88),
    ("C", "sp2"): (8.79, 9.32, 1.51),
    ("C", "sp"): (10.39, 9.45, 0.73),
    ("N", "sp3"): (11.54, 10.82, 1.36),
    ("N", "sp2"): (12.87, 11.15, 0.85),
    ("N", "sp"): (15.68, 11.70, -0.27),
    ("O", "sp3"): (14.18, 12.92, 1.39),
    ("O", "sp2"): (17.07, 13.79, 0.47),
    ("F", "*"): (14.66, 13.85, 2.31),
    ("Cl", "*"): (11.00, 9.69, 1.35),
    ("Br", "*"): (10.08, 8.47, 1.16),
    ("I", "*"): (9.90, 7.96, 0.96),
    ("S", "*"): (10.14, 9.13, 1.38),
    ("P", "*"): (8.90, 8.24, 0.96),
}
_H_CATION_CHI = 20.02


@dataclass
class GasteigerCharges:
    """Converged charges: per heavy atom, per single attached hydrogen."""

    values: list[float]
    h_values: list[float]
    missing: tuple[int, ...]  # atom indices without parameters (charge 0)

    def total(self, mol: Molecule) -> float:
        return sum(self.values) + sum(
            h * a.implicit_h for h, a in zip(self.h_values, mol.atoms)
        )


def _peoe_params(mol: Molecule, idx: int) -> tuple[float, float, float] | None:
    atom = mol.atoms[idx]
    hyb = atom.hybridization
    if hyb in ("sp3d", "sp3d2", "s"):
        hyb = "sp3"
    for key in ((atom.element, hyb), (atom.element, "*")):
        if key in _PEOE_PARAMS:
            return _PEOE_PARAMS[key]
    return None


def gasteiger_charges(
    mol: Molecule, iterations: int = GASTEIGER_ITERATIONS
) -> GasteigerCharges:
    """Iterative partial-equalization charges.

    Atoms without parameters take no part in any transfer and report a
    charge of exactly 0.0; their indices come back in ``missing``.
    """
    n = len(mol.atoms)
    params = [_peoe_params(mol, i) for i in range(n)]
    missing = tuple(i for i, p in enumerate(params) if p is None)
    q = [float(a.formal_charge) for a in mol.atoms]
    qh = [0.0] * n

    active_bonds = [
        (b.a, b.b)
        for b in mol.bonds
        if params[b.a] is not None and params[b.b] is not None
    ]

    for k in range(1, iterations + 1):
        damp = GASTEIGER_DAMPING**k
        chi = [0.0] * n
        chi_plus = [0.0] * n
        for i, p in enumerate(params):
            if p is not None:
                a, b, c = p
                chi[i] = a + b * q[i] + c * q[i] * q[i]
                chi_plus[i] = a + b + c
        ah, bh, ch = _PEOE_PARAMS[("H", "*")]
        chi_h = [ah + bh * x + ch * x * x for x in qh]

        dq = [0.0] * n
        dqh = [0.0] * n
        for i, j in active_bonds:
            if chi[i] > chi[j]:
                t = (chi[i] - chi[j]) / chi_plus[j] * damp
                dq[i] -= t
                dq[j] += t
            elif chi[j] > chi[i]:
                t = (chi[j] - chi[i]) / chi_plus[i] * damp
                dq[j] -= t
                dq[i] += t
        for i, atom in enumerate(mol.atoms):
            if atom.implicit_h == 0 or params[i] is None:
                continue
            if chi[i] > chi_h[i]:
                t = (chi[i] - chi_h[i]) / _H_CATION_CHI * damp
                dq[i] -= t * atom.implicit_h
                dqh[i] += t
            elif chi_h[i] > chi[i]:
                t = (chi_h[i] - chi[i]) / chi_plus[i] * damp
                dq[i] += t * atom.implicit_h
                dqh[i] -= t
        for i in range(n):
            q[i] += dq[i]
            qh[i] += dqh[i]

    for i in missing:
        q[i] = 0.0
        qh[i] = 0.0
    return GasteigerCharges(values=q, h_values=qh, missing=missing)


# ---------------------------------------------------------------------------
# polar surface area
# ---------------------------------------------------------------------------


@dataclass
class TpsaResult:
    value: float
    contributions: list[float]
    fallback: tuple[int, ...]  # atoms priced by the generic formula


def _bond_profile(mol: Molecule, idx: int) -> tuple[int, int, int, int]:
    """Counts of (single, double, triple, aromatic) bonds to heavy atoms."""
    s = d = t = a = 0
    for bond in mol.incident_bonds(idx):
        other = mol.atoms[bond.other(idx)]
        if other.element == "H":
            continue
        if bond.order == "single":
            s += 1
        elif bond.order == "double":
            d += 1
        elif bond.order == "triple":
            t += 1
        else:
            a += 1
    return s, d, t, a


def _total_h(mol: Molecule, idx: int) -> int:
    h = mol.atoms[idx].implicit_h
    for j in mol.neighbors(idx):
        if mol.atoms[j].element == "H":
            h += 1
    return h


def tpsa_contributions(mol: Molecule, include_sp: bool = False) -> TpsaResult:
    """Fragment-contribution polar surface area.

    Each N/O (S/P when ``include_sp``) is matched against the published
    pattern table on (charge, aromaticity, H count, bond profile,
    3-ring membership); unmatched N/O fall back to the generic formulas
    30.5 - X*8.2 + H*1.5 and 28.5 - X*8.6 + H*1.5 (floored at zero) and
    are flagged. Unmatched S/P contribute zero, flagged.
    """
    contribs = [0.0] * len(mol.atoms)
    fallback: list[int] = []
    for i, atom in enumerate(mol.atoms):
        elem = atom.element
        if elem not in ("N", "O", "S", "P"):
            continue
        if elem in ("S", "P") and not include_sp:
            continue
        q = atom.formal_charge
        arom = atom.aromatic
        h = _total_h(mol, i)
        s, d, t, a = _bond_profile(mol, i)
        in3 = atom.smallest_ring_size == 3
        value = _match_tpsa(elem, q, arom, h, s, d, t, a, in3)
        if value is None:
            x = atom.degree + h
            if elem == "N":
                value = max(0.0, 30.5 - x * 8.2 + h * 1.5)
                fallback.append(i)
            elif elem == "O":
                value = max(0.0, 28.5 - x * 8.6 + h * 1.5)
                fallback.append(i)
            else:
                value = 0.0
                fallback.append(i)
        contribs[i] = value
    return TpsaResult(
        value=sum(contribs), contributions=contribs, fallback=tuple(fallback)
    )


def tpsa(mol: Molecule, include_sp: bool = False) -> float:
    return tpsa_contributions(mol, include_sp).value


def _match_tpsa(
    elem: str, q: int, arom: bool, h: int, s: int, d: int, t: int, a: int, in3: bool
) -> float | None:
    key = (h, s, d, t, a)
    if elem == "N":
        if arom:
            if q == 0:
                if key == (0, 0, 0, 0, 2):
                    return 12.89
                if key == (0, 0, 0, 0, 3):
                    return 4.41
                if key == (0, 1, 0, 0, 2):
                    return 4.93
                if key == (0, 0, 1, 0, 2):
                    return 8.39
                if key == (1, 0, 0, 0, 2):
                    return 15.79
            elif q == 1:
                if key == (0, 0, 0, 0, 3):
                    return 4.10
                if key == (0, 1, 0, 0, 2):
                    return 3.88
                if key == (1, 0, 0, 0, 2):
                    return 14.14
            return None
        if q == 0:
            if key == (0, 3, 0, 0, 0):
                return 3.01 if in3 else 3.24
            if key == (0, 1, 1, 0, 0):
                return 12.36
            if key == (0, 0, 0, 1, 0):
                return 23.79
            if key == (0, 1, 2, 0, 0):
                return 11.68
            if key == (0, 0, 1, 1, 0):
                return 13.60
            if key == (1, 2, 0, 0, 0):
                return 21.94 if in3 else 12.03
            if key == (1, 0, 1, 0, 0):
                return 23.85
            if key == (2, 1, 0, 0, 0):
                return 26.02
        elif q == 1:
            if key == (0, 4, 0, 0, 0):
                return 0.00
            if key == (0, 2, 1, 0, 0):
                return 3.01
            if key == (0, 1, 0, 1, 0):
                return 4.36
            if key == (1, 3, 0, 0, 0):
                return 4.44
            if key == (1, 1, 1, 0, 0):
                return 13.97
            if key == (2, 2, 0, 0, 0):
                return 16.61
            if key == (2, 0, 1, 0, 0):
                return 25.59
            if key == (3, 1, 0, 0, 0):
                return 27.64
        return None
    if elem == "O":
        if arom:
            if q == 0 and key == (0, 0, 0, 0, 2):
                return 13.14
            return None
        if q == 0:
            if key == (0, 2, 0, 0, 0):
                return 12.53 if in3 else 9.23
            if key == (0, 0, 1, 0, 0):
                return 17.07
            if key == (1, 1, 0, 0, 0):
                return 20.23
        elif q == -1:
            if key == (0, 1, 0, 0, 0):
                return 23.06
        return None
    if elem == "S":
        if arom:
            if q == 0:
                if key == (0, 0, 0, 0, 2):
                    return 28.24
                if key == (0, 0, 1, 0, 2):
                    return 21.70
            return None
        if q == 0:
            if key == (0, 2, 0, 0, 0):
                return 25.30
            if key == (0, 0, 1, 0, 0):
                return 32.09
            if key == (0, 2, 1, 0, 0):
                return 19.21
            if key == (0, 2, 2, 0, 0):
                return 8.38
            if key == (1, 1, 0, 0, 0):
                return 38.80
        return None
    if elem == "P":
        if q == 0 and not arom:
            if key == (0, 3, 0, 0, 0):
                return 13.59
            if key == (0, 1, 1, 0, 0):
                return 34.14
            if key == (0, 3, 1, 0, 0):
                return 9.81
            if key == (1, 2, 1, 0, 0):
                return 23.47
        return None
    return None


# ---------------------------------------------------------------------------
# hydrogen-bond roles
# ---------------------------------------------------------------------------


def _lone_pair_count(mol: Molecule, idx: int) -> int:
    atom = mol.atoms[idx]
    val_e = VALENCE_ELECTRONS.get(atom.element)
    if val_e is None:
        return 0
    order_sum = sum(b.kekule_order for b in mol.incident_bonds(idx)) + atom.implicit_h
    return max(0, (val_e - atom.formal_charge - order_sum) // 2)


def _is_pyrrole_type(mol: Molecule, idx: int) -> bool:
    """Aromatic N whose lone pair sits in the ring pi system."""
    atom = mol.atoms[idx]
    if not atom.aromatic or atom.element != "N":
        return False
    # pyridine-type N took an in-ring double bond during kekulization
    return all(b.kekule_order == 1 for b in mol.incident_bonds(idx))


def _is_amide_n(mol: Molecule, idx: int) -> bool:
    if mol.atoms[idx].element != "N":
        return False
    for j in mol.neighbors(idx):
        bond = mol.bond_between(idx, j)
        if bond.order != "single" or mol.atoms[j].element != "C":
            continue
        for k in mol.neighbors(j):
            b2 = mol.bond_between(j, k)
            if b2.order == "double" and mol.atoms[k].element == "O":
                return True
    return False


def hbond_roles(mol: Molecule) -> tuple[list[bool], list[bool]]:
    """(donor flags, acceptor flags) per atom.

    Donor: N or O carrying at least one hydrogen. Acceptor: sp2/sp3 N
    with a lone pair, except pyrrole-type and amide N; any O except the
    aromatic furan-type O.
    """
    donors = [False] * len(mol.atoms)
    acceptors = [False] * len(mol.atoms)
    for i, atom in enumerate(mol.atoms):
        h = _total_h(mol, i)
        if atom.element in ("N", "O") and h >= 1:
            donors[i] = True
        if atom.element == "N":
            if (
                atom.hybridization in ("sp2", "sp3")
                and _lone_pair_count(mol, i) >= 1
                and not _is_pyrrole_type(mol, i)
                and not _is_amide_n(mol, i)
            ):
                acceptors[i] = True
        elif atom.element == "O":
            if not atom.aromatic:
                acceptors[i] = True
    return donors, acceptors


# ---------------------------------------------------------------------------
# electronic-effect signs
# ---------------------------------------------------------------------------

# Pauling electronegativities for the sign heuristics.
_EN = {
    "H": 2.20, "B": 2.04, "C": 2.55, "N": 3.04, "O": 3.44, "F": 3.98,
    "Si": 1.90, "P": 2.19, "S": 2.58, "Cl": 3.16, "Se": 2.55, "Br": 2.96,
    "I": 2.66,
}


def inductive_sign(mol: Molecule, idx: int) -> int:
    """Sigma-effect direction of an atom: -1 withdrawing, +1 donating.

    Rule table: positive formal charge or electronegativity above carbon
    withdraws; negative charge or an electropositive element donates;
    carbon-like atoms are neutral.
    """
    atom = mol.atoms[idx]
    if atom.formal_charge > 0:
        return -1
    if atom.formal_charge < 0:
        return 1
    en = _EN.get(atom.element)
    if en is None:
        return 1  # metals: electropositive
    if en > 2.58:
        return -1
    if en < 2.2:
        return 1
    return 0


def resonance_sign(mol: Molecule, idx: int) -> int:
    """Pi-effect direction: +1 lone-pair donor into a conjugated system,
    -1 acceptor (multiple bond toward a more electronegative partner),
    0 otherwise."""
    atom = mol.atoms[idx]
    my_en = _EN.get(atom.element, 1.8)
    for bond in mol.incident_bonds(idx):
        if bond.order in ("double", "triple"):
            other = mol.atoms[bond.other(idx)]
            if _EN.get(other.element, 1.8) > my_en:
                return -1
    has_conjugated = any(b.conjugated for b in mol.incident_bonds(idx))
    if has_conjugated and _lone_pair_count(mol, idx) >= 1 and atom.element != "C":
        return 1
    return 0


# ---------------------------------------------------------------------------
# bundles
# ---------------------------------------------------------------------------


@dataclass
class AtomAttributes:
    """Per-atom descriptor bundle consumed by the knowledge base."""

    gasteiger_charge: float
    tpsa_contrib: float
    is_hbond_donor: bool
    is_hbond_acceptor: bool
    inductive_sign: int
    resonance_sign: int
    hetero_neighbors_r1: int


def compute_atom_attributes(mol: Molecule) -> list[AtomAttributes]:
    charges = gasteiger_charges(mol)
    psa = tpsa_contributions(mol)
    donors, acceptors = hbond_roles(mol)
    out = []
    for i in range(len(mol.atoms)):
        hetero_r1 = sum(
            1 for j in mol.neighbors(i) if mol.atoms[j].element in HETEROATOMS
        )
        out.append(
            AtomAttributes(
                gasteiger_charge=charges.values[i],
                tpsa_contrib=psa.contributions[i],
                is_hbond_donor=donors[i],
                is_hbond_acceptor=acceptors[i],
                inductive_sign=inductive_sign(mol, i),
                resonance_sign=resonance_sign(mol, i),
                hetero_neighbors_r1=hetero_r1,
            )
        )
    return out


_DESCRIPTOR_KEYS = (
    "TPSA",
    "LogP",
    "MolWt",
    "HBA",
    "HBD",
    "NumAromaticRings",
    "NumRotatableBonds",
    "NumHeteroatoms",
    "FormalCharge",
)


@dataclass
class MoleculeDescriptors:
    """Whole-molecule descriptor set, rendered in a fixed key order."""

    tpsa: float
    logp: float
    molwt: float
    hba: int
    hbd: int
    num_aromatic_rings: int
    num_rotatable_bonds: int
    num_heteroatoms: int
    formal_charge: int

    def as_dict(self) -> dict[str, float | int]:
        return {
            "TPSA": self.tpsa,
            "LogP": self.logp,
            "MolWt": self.molwt,
            "HBA": self.hba,
            "HBD": self.hbd,
            "NumAromaticRings": self.num_aromatic_rings,
            "NumRotatableBonds": self.num_rotatable_bonds,
            "NumHeteroatoms": self.num_heteroatoms,
            "FormalCharge": self.formal_charge,
        }


def molecular_weight(mol: Molecule) -> float:
    total = 0.0
    for atom in mol.atoms:
        if atom.isotope:
            total += float(atom.isotope)  # nominal mass when specified
        else:
            total += ATOMIC_WEIGHTS.get(atom.element, 0.0)
        total += atom.implicit_h * ATOMIC_WEIGHTS["H"]
    return total


def num_aromatic_rings(mol: Molecule) -> int:
    return sum(
        1 for ring in mol.rings if all(mol.atoms[i].aromatic for i in ring)
    )


def compute_molecule_descriptors(mol: Molecule) -> MoleculeDescriptors:
    donors, acceptors = hbond_roles(mol)
    return MoleculeDescriptors(
        tpsa=tpsa(mol),
        logp=crippen_logp(mol),
        molwt=molecular_weight(mol),
        hba=sum(acceptors),
        hbd=sum(donors),
        num_aromatic_rings=num_aromatic_rings(mol),
        num_rotatable_bonds=sum(1 for b in mol.bonds if b.rotatable),
        num_heteroatoms=sum(1 for a in mol.atoms if a.element not in ("C", "H")),
        formal_charge=mol.formal_charge,
    )
