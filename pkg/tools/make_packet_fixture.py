"""Freeze the evidence-packet layout fixture.

Renders one analogue packet and one query packet from a fixed scenario
(seeded codebook, small fixed corpus) and writes them to
tests/data/evidence_packet_layout.txt separated by a marker line. The
test re-renders the same scenario and compares bytes.
"""
from pathlib import Path
from types import SimpleNamespace

from atomprior.atomcards import build_evidence_packet
from atomprior.knowledge_base import build_knowledge_base
from atomprior.molgraph import parse_smiles
from atomprior.retrieval import IndexEntry, morgan_fingerprint
from atomprior.tokenizer import Codebook, tokenize

MARKER = "=== QUERY PACKET ===\n"

CORPUS = [
    "CCO",
    "CC(=O)Nc1ccc(O)cc1",
    "c1ccccc1O",
    "CCN",
    "Fc1ccccc1",
    "CC(C)Cc1ccccc1",
    "OCC(O)CO",
    "CC(=O)O",
]

SELECTION = SimpleNamespace(
    atom_features=[
        "primary_symbol",
        "gasteiger_q50",
        "gasteiger_iqr",
        "hba_ratio",
        "hbd_ratio",
        "aromatic_ratio",
        "conjugated_ratio",
        "ring_ratio",
        "median_degree",
        "neighbors_top",
    ],
    molecule_features=[
        "TPSA",
        "LogP",
        "MolWt",
        "HBA",
        "HBD",
        "NumAromaticRings",
        "NumRotatableBonds",
        "NumHeteroatoms",
        "FormalCharge",
    ],
)


def build_packet_objects():
    codebook = Codebook.random(size=64, dim=64, seed=12)
    kb = build_knowledge_base(
        (mol, tokenize(mol, codebook))
        for mol in (parse_smiles(s) for s in CORPUS)
    )
    smiles = "CC(=O)Nc1ccc(O)cc1"
    mol = parse_smiles(smiles)
    entry = IndexEntry(
        smiles=smiles,
        fingerprint=morgan_fingerprint(mol),
        label=1,
        token_sequence=tokenize(mol, codebook),
    )
    analogue = build_evidence_packet(entry, 0.928, SELECTION, kb, mol=mol)
    query = build_evidence_packet(entry, None, SELECTION, kb, mol=mol)
    return analogue, query


def build_packets() -> tuple[str, str]:
    analogue, query = build_packet_objects()
    return analogue.render(), query.render()


def main() -> None:
    analogue, query = build_packets()
    out = Path(__file__).resolve().parents[1] / "tests" / "data"
    out.mkdir(parents=True, exist_ok=True)
    target = out / "evidence_packet_layout.txt"
    target.write_text(analogue + "\n" + MARKER + query + "\n")
    print(f"wrote {target} ({target.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
