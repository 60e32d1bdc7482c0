"""Atom-level statistical priors and retrieval-augmented prompting for molecules."""

__version__ = "0.1.0"

from .molgraph import Atom, Bond, Molecule, parse_smiles, write_smiles  # noqa: F401
