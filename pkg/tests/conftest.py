"""Shared test helpers: seeded molecule generation and respelling."""
from __future__ import annotations

import random

import pytest

from atomprior.molgraph import Molecule, parse_smiles, write_smiles
from atomprior.tokenizer import Codebook

# Fragments whose first and last atoms can each take one more single
# bond, so any concatenation of them is a valid SMILES chain.
_INTERIOR = [
    "C", "C", "C", "C", "CC", "CCC", "C(C)C", "CO", "CN", "CS",
    "C(=O)N", "C(=O)O", "C=C", "C#C", "C(F)(F)", "N(C)", "S(=O)(=O)",
    "C1CCCCC1", "C1CCNCC1", "C1CCOC1", "C1CC1",
    "c1ccccc1", "c1ccncc1",
]

# Fragments that must end the string (monovalent tail or closed shape).
_TERMINAL = [
    "C", "O", "N", "F", "Cl", "Br", "C#N", "C(F)(F)F", "C(=O)O",
    "c1ccccc1", "C1CCCCC1", "c1ccc(O)cc1", "C(C)(C)C",
]


def random_smiles(rng: random.Random) -> str:
    parts = [rng.choice(_INTERIOR) for _ in range(rng.randrange(1, 5))]
    parts.append(rng.choice(_TERMINAL))
    return "".join(parts)


def random_molecules(n: int, seed: int = 0) -> list[tuple[str, Molecule]]:
    """n distinct parseable molecules, deterministic for a seed."""
    rng = random.Random(seed)
    out: list[tuple[str, Molecule]] = []
    seen: set[str] = set()
    while len(out) < n:
        smiles = random_smiles(rng)
        if smiles in seen:
            continue
        seen.add(smiles)
        out.append((smiles, parse_smiles(smiles)))
    return out


def respell(mol: Molecule, rng: random.Random) -> str:
    """The same molecule written from a random atom order."""
    order = list(range(len(mol.atoms)))
    rng.shuffle(order)
    return write_smiles(mol, atom_order=order)


@pytest.fixture(scope="session")
def tiny_codebook() -> Codebook:
    return Codebook.random(size=32, dim=64, seed=7)
