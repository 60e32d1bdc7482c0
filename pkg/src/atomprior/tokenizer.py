"""Atom tokenization against a vector-quantization codebook.

Each atom is embedded as a bag of its environment hashes (radii 0-2,
folded into a fixed-width count vector) and snapped to the nearest
codeword by squared Euclidean distance; the codeword index is the atom's
discrete token. A molecule renders as the space-joined "A<id>" sequence
in atom order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .molgraph import Molecule
from .retrieval import atom_environment_hashes

DEFAULT_EMBED_DIM = 64
DEFAULT_CODEBOOK_SIZE = 256


class DimensionMismatch(ValueError):
    """Embedding width differs from the codebook width."""


@dataclass
class Codebook:
    dim: int
    codewords: np.ndarray  # (n_codes, dim)

    def __post_init__(self):
        self.codewords = np.asarray(self.codewords, dtype=float)
        if self.codewords.ndim != 2:
            raise ValueError("codewords must be a 2-d array")
        if self.codewords.shape[1] != self.dim:
            raise DimensionMismatch(
                f"codewords are {self.codewords.shape[1]}-wide, "
                f"declared dim is {self.dim}"
            )

    def __len__(self) -> int:
        return self.codewords.shape[0]

    @classmethod
    def random(
        cls,
        size: int = DEFAULT_CODEBOOK_SIZE,
        dim: int = DEFAULT_EMBED_DIM,
        seed: int = 0,
    ) -> "Codebook":
        rng = np.random.default_rng(seed)
        return cls(dim=dim, codewords=rng.standard_normal((size, dim)))

    @classmethod
    def load(cls, path: str | Path) -> "Codebook":
        with Path(path).open() as fh:
            obj = json.load(fh)
        return cls(dim=int(obj["dim"]), codewords=np.array(obj["codewords"]))

    def save(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            json.dump(
                {"dim": self.dim, "codewords": self.codewords.tolist()}, fh
            )


def embed_atoms(mol: Molecule, dim: int = DEFAULT_EMBED_DIM) -> np.ndarray:
    """Count-vector embedding of every atom, shape (n_atoms, dim)."""
    layers = atom_environment_hashes(mol, radius=2)
    out = np.zeros((len(mol.atoms), dim))
    for layer in layers:
        for i, h in enumerate(layer):
            out[i, h % dim] += 1.0
    return out


def default_invariant_embedding(
    mol: Molecule, atom_index: int, dim: int = DEFAULT_EMBED_DIM
) -> np.ndarray:
    """One atom's embedding under the built-in provider.

    Atoms with identical surroundings out to two bonds get identical
    vectors, so the embedding survives SMILES respelling. Any callable
    with this (mol, atom_index) -> vector shape can replace it in
    :func:`tokenize`.
    """
    return embed_atoms(mol, dim)[atom_index]


def assign_token(vector: np.ndarray, codebook: Codebook) -> int:
    """Index of the nearest codeword; ties go to the lowest index."""
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (codebook.dim,):
        raise DimensionMismatch(
            f"embedding is {vector.shape}-shaped, codebook dim is "
            f"{codebook.dim}"
        )
    diff = codebook.codewords - vector
    dist = np.einsum("ij,ij->i", diff, diff)
    return int(np.argmin(dist))  # argmin takes the first minimum


def tokenize(mol: Molecule, codebook: Codebook, provider=None) -> list[int]:
    """Per-atom token ids in atom order.

    ``provider`` is an optional (mol, atom_index) -> vector callable;
    by default the graph-invariant count embedding is used.
    """
    if provider is None:
        emb = embed_atoms(mol, codebook.dim)
    else:
        emb = np.asarray(
            [provider(mol, i) for i in range(len(mol.atoms))], dtype=float
        )
        if emb.shape != (len(mol.atoms), codebook.dim):
            raise DimensionMismatch(
                f"provider vectors are {emb.shape[1:]}-shaped, codebook "
                f"dim is {codebook.dim}"
            )
    diff = codebook.codewords[None, :, :] - emb[:, None, :]
    dist = np.einsum("aij,aij->ai", diff, diff)
    return [int(t) for t in np.argmin(dist, axis=1)]


def render_token_sequence(tokens: list[int]) -> str:
    """Discrete token sequence line, e.g. ``A12 A7 A7``."""
    return " ".join(f"A{t}" for t in tokens)
