"""Functional-atom selection and evidence-packet assembly.

A molecule's packet carries its SMILES, its token sequence, optional
similarity/label lines for retrieved analogues, one compact card per
selected atom (token-profile statistics restricted to the chosen atom
features), and the chosen molecule descriptors. Atom selection keeps
chemistry-critical atoms first and tops up to a fixed budget.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .descriptors import (
    AtomAttributes,
    compute_atom_attributes,
    compute_molecule_descriptors,
)
from .elements import HETEROATOMS
from .knowledge_base import KnowledgeBase
from .molgraph import Molecule, parse_smiles
from .tokenizer import render_token_sequence

DEFAULT_BUDGET = 20
GASTEIGER_KEEP_THRESHOLD = 0.10

# The fixed feature vocabulary packets may draw from. Atom-level names
# resolve against knowledge-base token profiles; molecule-level names
# against the whole-molecule descriptor block.
ATOM_FEATURE_NAMES = (
    "support_count",
    "primary_symbol",
    "is_mixed",
    "mixture_entropy",
    "gasteiger_q50",
    "gasteiger_iqr",
    "hba_ratio",
    "hbd_ratio",
    "aromatic_ratio",
    "conjugated_ratio",
    "ring_ratio",
    "median_degree",
    "neighbors_top",
)
MOLECULE_FEATURE_NAMES = (
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


class UnknownFeatureName(ValueError):
    """A feature selection referenced a name outside the schema."""


def _heteroatom_distances(mol: Molecule) -> list[int | None]:
    """Bond distance from each atom to its nearest heteroatom.

    None when the molecule has no heteroatoms at all.
    """
    dist: list[int | None] = [None] * len(mol.atoms)
    frontier: deque[int] = deque()
    for i, atom in enumerate(mol.atoms):
        if atom.element in HETEROATOMS:
            dist[i] = 0
            frontier.append(i)
    while frontier:
        i = frontier.popleft()
        for j in mol.neighbors(i):
            if dist[j] is None:
                dist[j] = dist[i] + 1
                frontier.append(j)
    return dist


def must_keep_atoms(
    mol: Molecule, attrs: Sequence[AtomAttributes]
) -> set[int]:
    """Atoms that may never be dropped while the budget allows.

    Hydrogen-bond donors/acceptors, charged or strongly polarized
    atoms, heteroatoms, ring-fusion atoms, and aromatic carbons.
    """
    keep: set[int] = set()
    for i, atom in enumerate(mol.atoms):
        if (
            attrs[i].is_hbond_donor
            or attrs[i].is_hbond_acceptor
            or atom.formal_charge != 0
            or abs(attrs[i].gasteiger_charge) >= GASTEIGER_KEEP_THRESHOLD
            or atom.element in HETEROATOMS
            or atom.env_type == "fused_ring"
            or (atom.aromatic and atom.element == "C")
        ):
            keep.add(i)
    return keep


def select_functional_atoms(
    mol: Molecule,
    attrs: Sequence[AtomAttributes] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> list[int]:
    """Up to ``budget`` atom indices, most decision-relevant first.

    Over budget, must-keep atoms are ranked by (|partial charge|
    descending, aromatic first, atom index) and truncated. Under
    budget, remaining atoms fill the gap ranked lexicographically by
    (aromatic or conjugated, in ring, ring fusion, closeness to the
    nearest heteroatom, sp/sp2 hybridization), descending, with ties
    going to the lower atom index.
    """
    if attrs is None:
        attrs = compute_atom_attributes(mol)
    keep = must_keep_atoms(mol, attrs)

    def keep_rank(i: int):
        return (-abs(attrs[i].gasteiger_charge), -int(mol.atoms[i].aromatic), i)

    ordered_keep = sorted(keep, key=keep_rank)
    if len(ordered_keep) >= budget:
        return ordered_keep[:budget]

    het_dist = _heteroatom_distances(mol)

    def fill_rank(i: int):
        atom = mol.atoms[i]
        conjugated = any(b.conjugated for b in mol.incident_bonds(i))
        proximity = (
            1.0 / (1.0 + het_dist[i]) if het_dist[i] is not None else 0.0
        )
        return (
            -int(atom.aromatic or conjugated),
            -int(atom.in_ring),
            -int(atom.env_type == "fused_ring"),
            -proximity,
            -int(atom.hybridization in ("sp", "sp2")),
            i,
        )

    rest = sorted((i for i in range(len(mol.atoms)) if i not in keep),
                  key=fill_rank)
    return ordered_keep + rest[: budget - len(ordered_keep)]


@dataclass
class AtomCard:
    """Compact prior record for one selected atom."""

    token_id: int
    atom_index: int
    symbol: str
    selected_fields: dict

    def render(self) -> str:
        head = f"[A{self.token_id}, Atom#{self.atom_index}, {self.symbol}]"
        if not self.selected_fields:
            return head
        body = ", ".join(
            f"{name}={_render_value(name, value)}"
            for name, value in self.selected_fields.items()
        )
        return f"{head}: {body}"


@dataclass
class EvidencePacket:
    """One molecule's rendered evidence, analogue or query."""

    smiles: str
    token_sequence_rendered: str
    atom_cards: list[AtomCard]
    molecule_features: dict
    similarity: float | None = None
    ground_truth: object | None = None

    def render(self) -> str:
        sections = [f"SMILES: {self.smiles}",
                    f"DTS: {self.token_sequence_rendered}"]
        if self.similarity is not None:
            sections.append(f"Similarity: {self.similarity:.3f}")
            sections.append(f"GT: {render_label(self.ground_truth)}")
        saf_lines = "\n".join(card.render() for card in self.atom_cards)
        sections.append(f"SAF:\n{saf_lines}" if saf_lines else "SAF:")
        sections.append(f"SMF:\n{render_molecule_features(self.molecule_features)}")
        return "\n\n".join(sections)


def render_label(label) -> str:
    if isinstance(label, bool):
        return "yes" if label else "no"
    if isinstance(label, int):
        return "yes" if label == 1 else "no"
    if isinstance(label, float):
        return repr(round(label, 3))
    return str(label)


def _render_value(name: str, value) -> str:
    if name == "neighbors_top":
        return repr(value)
    if isinstance(value, bool):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    return f"{value:.3f}"


def render_molecule_features(features: dict) -> str:
    shown = {
        k: round(v, 3) if isinstance(v, float) else v
        for k, v in features.items()
    }
    return repr(shown)


def _profile_feature(profile: dict, name: str):
    if name == "support_count":
        return profile["support_count"]
    if name == "primary_symbol":
        return profile["primary_symbol"]
    if name == "is_mixed":
        return profile["is_mixed"]
    if name == "mixture_entropy":
        return profile["mixture_entropy"]
    if name == "gasteiger_q50":
        return profile["polarity"]["gasteiger_q50"]
    if name == "gasteiger_iqr":
        return profile["polarity"]["gasteiger_iqr"]
    if name == "hba_ratio":
        return profile["hbond"]["acceptor_ratio"]
    if name == "hbd_ratio":
        return profile["hbond"]["donor_ratio"]
    if name == "aromatic_ratio":
        return profile["aromatic_ratio"]
    if name == "conjugated_ratio":
        return profile["conjugated_ratio"]
    if name == "ring_ratio":
        env = profile["env_distribution"]
        in_ring = env.get("ring", 0) + env.get("fused_ring", 0)
        return in_ring / profile["support_count"]
    if name == "median_degree":
        return profile["median_degree"]
    if name == "neighbors_top":
        return profile["neighbors_top"]
    raise UnknownFeatureName(name)


def _validate_selection(atom_features, molecule_features) -> None:
    for name in atom_features:
        if name not in ATOM_FEATURE_NAMES:
            raise UnknownFeatureName(f"atom feature {name!r}")
    for name in molecule_features:
        if name not in MOLECULE_FEATURE_NAMES:
            raise UnknownFeatureName(f"molecule feature {name!r}")


def build_atom_cards(
    mol: Molecule,
    tokens: Sequence[int],
    atom_features: Sequence[str],
    kb: KnowledgeBase,
    attrs: Sequence[AtomAttributes] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> list[AtomCard]:
    """Cards for the selected atoms, in atom-index order.

    The card symbol is the token profile's primary element; the atom's
    own element fills in for tokens the knowledge base has not seen,
    and such cards carry no profile statistics.
    """
    if attrs is None:
        attrs = compute_atom_attributes(mol)
    selected = sorted(select_functional_atoms(mol, attrs, budget))
    cards = []
    for i in selected:
        profile = kb.get(tokens[i])
        if profile is None:
            cards.append(
                AtomCard(
                    token_id=tokens[i],
                    atom_index=i,
                    symbol=mol.atoms[i].element,
                    selected_fields={},
                )
            )
            continue
        fields = {
            name: _profile_feature(profile, name)
            for name in atom_features
            if name != "primary_symbol"
        }
        cards.append(
            AtomCard(
                token_id=tokens[i],
                atom_index=i,
                symbol=profile["primary_symbol"],
                selected_fields=fields,
            )
        )
    return cards


def build_evidence_packet(
    entry,
    similarity: float | None,
    selection,
    kb: KnowledgeBase,
    mol: Molecule | None = None,
    attrs: Sequence[AtomAttributes] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> EvidencePacket:
    """Assemble a packet for an index entry or query molecule.

    ``entry`` needs smiles/label/token_sequence/descriptors attributes
    (an index entry qualifies). ``similarity`` None marks the query
    packet: its Similarity and GT lines are omitted. ``selection``
    needs atom_features/molecule_features name lists.
    """
    _validate_selection(selection.atom_features, selection.molecule_features)
    if mol is None:
        mol = parse_smiles(entry.smiles)
    if attrs is None:
        attrs = compute_atom_attributes(mol)
    descriptors = entry.descriptors
    if any(name not in descriptors for name in selection.molecule_features):
        descriptors = {
            **compute_molecule_descriptors(mol).as_dict(),
            **descriptors,
        }
    if selection.atom_features:
        cards = build_atom_cards(
            mol, entry.token_sequence, selection.atom_features, kb, attrs,
            budget,
        )
    else:
        cards = []
    features = {
        name: descriptors[name] for name in selection.molecule_features
    }
    return EvidencePacket(
        smiles=entry.smiles,
        token_sequence_rendered=render_token_sequence(entry.token_sequence),
        atom_cards=cards,
        molecule_features=features,
        similarity=similarity,
        ground_truth=None if similarity is None else entry.label,
    )
