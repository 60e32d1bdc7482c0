"""Fingerprints, similarity, and analogue retrieval.

Circular fingerprints hash each atom's local invariants, then repeatedly
mix in sorted (bond, neighbor-hash) shells; every shell hash of every
atom sets one bit of a fixed-width bit vector. Similarity is the
Tanimoto ratio over set bits. The analogue index is a brute-force scan -
corpora here are small enough that nothing smarter pays for itself.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .molgraph import Molecule, parse_smiles

DEFAULT_RADIUS = 2
DEFAULT_NBITS = 2048

_BOND_CODE = {"single": 1, "double": 2, "triple": 3, "aromatic": 4}
_MASK = (1 << 64) - 1


class WidthMismatch(ValueError):
    """Two fingerprints of different widths were compared."""


def _mix(x: int) -> int:
    """64-bit avalanche mix (splitmix64 finalizer)."""
    x &= _MASK
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK
    return x ^ (x >> 31)


def _combine(parts: Iterable[int]) -> int:
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = _mix(h ^ _mix(p))
    return h


def atom_environment_hashes(mol: Molecule, radius: int = 2) -> list[list[int]]:
    """Per-radius environment hash of every atom.

    Result[r][i] identifies the substructure within r bonds of atom i,
    independent of atom numbering and SMILES spelling.
    """
    from .elements import ATOMIC_NUMBERS

    layer = [
        _combine(
            (
                ATOMIC_NUMBERS.get(a.element, 0),
                a.degree,
                a.implicit_h,
                a.formal_charge + 8,
                int(a.aromatic),
                int(a.in_ring),
            )
        )
        for a in mol.atoms
    ]
    layers = [layer]
    for _ in range(radius):
        nxt = []
        for i in range(len(mol.atoms)):
            shell = sorted(
                (_BOND_CODE[b.order], layer[b.other(i)])
                for b in mol.incident_bonds(i)
            )
            parts = [layer[i]]
            for code, h in shell:
                parts.append(code)
                parts.append(h)
            nxt.append(_combine(parts))
        layer = nxt
        layers.append(layer)
    return layers


@dataclass(frozen=True)
class Fingerprint:
    """Fixed-width bit vector with a cached set-bit count.

    ``bits`` holds the vector as a Python int (bit i set ⇔ position i
    set); ``popcount`` is always derived from ``bits``, so the cache
    cannot disagree with the data.
    """

    bits: int
    nbits: int
    popcount: int = field(init=False)

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.nbits:
            raise ValueError("bit positions exceed fingerprint width")
        object.__setattr__(self, "popcount", self.bits.bit_count())

    @classmethod
    def from_positions(
        cls, positions: Iterable[int], nbits: int
    ) -> "Fingerprint":
        bits = 0
        for p in positions:
            if not 0 <= p < nbits:
                raise ValueError(f"bit position {p} outside width {nbits}")
            bits |= 1 << p
        return cls(bits=bits, nbits=nbits)

    def positions(self) -> list[int]:
        """Sorted indices of the set bits."""
        out = []
        bits = self.bits
        while bits:
            low = bits & -bits
            out.append(low.bit_length() - 1)
            bits ^= low
        return out


def morgan_fingerprint(
    mol: Molecule, radius: int = DEFAULT_RADIUS, nbits: int = DEFAULT_NBITS
) -> Fingerprint:
    """Folded circular fingerprint over environment radii 0..radius."""
    bits = 0
    for layer in atom_environment_hashes(mol, radius):
        for h in layer:
            bits |= 1 << (h % nbits)
    return Fingerprint(bits=bits, nbits=nbits)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """Intersection-over-union of the set bits; empty vs empty is 0."""
    if a.nbits != b.nbits:
        raise WidthMismatch(f"{a.nbits} vs {b.nbits} bits")
    inter = (a.bits & b.bits).bit_count()
    denom = a.popcount + b.popcount - inter
    if denom == 0:
        return 0.0
    return inter / denom


@dataclass
class IndexEntry:
    """One labeled pool molecule with its precomputed artifacts."""

    smiles: str
    fingerprint: Fingerprint
    label: float | int
    token_sequence: list[int] = field(default_factory=list)
    descriptors: dict = field(default_factory=dict)


@dataclass
class AnalogueHit:
    entry: IndexEntry
    similarity: float


def top_k(
    query: Fingerprint, index: "AnalogueIndex", k: int
) -> list[AnalogueHit]:
    """The k most similar pool entries, descending similarity.

    Ties break toward the lower entry index; k=0 is the zero-analogue
    path and returns []; k beyond the pool size returns the full pool.
    """
    if k <= 0:
        return []
    scored = [
        (tanimoto(query, entry.fingerprint), pos)
        for pos, entry in enumerate(index.entries)
    ]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [
        AnalogueHit(entry=index.entries[pos], similarity=sim)
        for sim, pos in scored[:k]
    ]


class AnalogueIndex:
    """Exact nearest-neighbour search over a fingerprinted corpus."""

    def __init__(
        self, radius: int = DEFAULT_RADIUS, nbits: int = DEFAULT_NBITS
    ):
        self.radius = radius
        self.nbits = nbits
        self.entries: list[IndexEntry] = []

    def __len__(self) -> int:
        return len(self.entries)

    def add(
        self,
        smiles: str,
        label: float | int,
        token_sequence: Sequence[int] | None = None,
        descriptors: dict | None = None,
        fingerprint: Fingerprint | None = None,
    ) -> IndexEntry:
        if fingerprint is None:
            mol = parse_smiles(smiles)
            fingerprint = morgan_fingerprint(mol, self.radius, self.nbits)
        elif fingerprint.nbits != self.nbits:
            raise WidthMismatch(
                f"entry has {fingerprint.nbits} bits, index {self.nbits}"
            )
        entry = IndexEntry(
            smiles=smiles,
            fingerprint=fingerprint,
            label=label,
            token_sequence=list(token_sequence or []),
            descriptors=dict(descriptors or {}),
        )
        self.entries.append(entry)
        return entry

    def query_fingerprint(self, fp: Fingerprint, k: int) -> list[AnalogueHit]:
        return top_k(fp, self, k)

    def query(
        self, smiles: str, k: int, exclude_self: bool = True
    ) -> list[AnalogueHit]:
        """Top-k entries most similar to a query SMILES.

        Entries whose SMILES string equals the query are skipped when
        ``exclude_self`` is set, so a pool molecule can be queried
        against the rest of the pool without seeing its own label.
        """
        if k <= 0:
            return []
        fp = morgan_fingerprint(parse_smiles(smiles), self.radius, self.nbits)
        scored = [
            (tanimoto(fp, entry.fingerprint), pos)
            for pos, entry in enumerate(self.entries)
            if not (exclude_self and entry.smiles == smiles)
        ]
        scored.sort(key=lambda t: (-t[0], t[1]))
        return [
            AnalogueHit(entry=self.entries[pos], similarity=sim)
            for sim, pos in scored[:k]
        ]

    def save(self, path: str | Path) -> None:
        """JSON-lines: a metadata header, then one entry per line with
        the fingerprint stored as its set-bit positions."""
        with Path(path).open("w") as fh:
            fh.write(
                json.dumps(
                    {
                        "kind": "analogue-index",
                        "radius": self.radius,
                        "nbits": self.nbits,
                    }
                )
                + "\n"
            )
            for entry in self.entries:
                fh.write(
                    json.dumps(
                        {
                            "smiles": entry.smiles,
                            "label": entry.label,
                            "bits": entry.fingerprint.positions(),
                            "token_sequence": entry.token_sequence,
                            "descriptors": entry.descriptors,
                        }
                    )
                    + "\n"
                )

    @classmethod
    def load(cls, path: str | Path) -> "AnalogueIndex":
        with Path(path).open() as fh:
            header = json.loads(fh.readline())
            index = cls(
                radius=int(header["radius"]), nbits=int(header["nbits"])
            )
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                index.entries.append(
                    IndexEntry(
                        smiles=obj["smiles"],
                        fingerprint=Fingerprint.from_positions(
                            obj["bits"], index.nbits
                        ),
                        label=obj["label"],
                        token_sequence=list(obj.get("token_sequence", [])),
                        descriptors=dict(obj.get("descriptors", {})),
                    )
                )
        return index


def build_index(
    records: Iterable[tuple[str, float | int]],
    radius: int = DEFAULT_RADIUS,
    nbits: int = DEFAULT_NBITS,
) -> AnalogueIndex:
    """Index (smiles, label) pairs; unparseable SMILES raise."""
    index = AnalogueIndex(radius=radius, nbits=nbits)
    for smiles, label in records:
        index.add(smiles, label)
    return index
