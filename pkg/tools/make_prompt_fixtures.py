"""Freeze byte fixtures for every prompt rendering path.

Writes tests/data/prompts/: the three stage-1 rounds as JSON messages, a
stage-3 classification and regression prompt built from the shared packet
scenario, and the four baseline variants. Tests re-render the same inputs
and compare bytes.
"""
import json
from pathlib import Path

from make_packet_fixture import build_packet_objects

from atomprior.prompts import (
    FeatureSelection,
    baseline_prompt,
    stage1_messages,
    stage3_prompt,
)

TASK = "Predict whether the molecule can penetrate the blood-brain barrier."

DESCRIPTIONS = {
    "primary_symbol": "Dominant element seen for this atom token.",
    "gasteiger_q50": "Median partial charge of the token population.",
    "gasteiger_iqr": "Spread of partial charge across the token population.",
    "hba_ratio": "Fraction of token instances acting as H-bond acceptors.",
    "hbd_ratio": "Fraction of token instances acting as H-bond donors.",
    "aromatic_ratio": "Fraction of token instances on aromatic atoms.",
    "conjugated_ratio": "Fraction of token instances in conjugated systems.",
    "ring_ratio": "Fraction of token instances inside rings.",
    "median_degree": "Typical heavy-atom neighbor count for the token.",
    "neighbors_top": "Most strongly associated neighboring tokens.",
    "TPSA": "Topological polar surface area of the molecule.",
    "LogP": "Estimated octanol-water partition coefficient.",
    "MolWt": "Molecular weight.",
    "HBA": "Hydrogen-bond acceptor count.",
    "HBD": "Hydrogen-bond donor count.",
    "NumAromaticRings": "Count of aromatic rings.",
    "NumRotatableBonds": "Count of rotatable bonds.",
    "NumHeteroatoms": "Count of non-carbon heavy atoms.",
    "FormalCharge": "Net formal charge.",
}

FEWSHOT = [("CCO", 1), ("c1ccccc1N(=O)=O", 0)]


def selection() -> FeatureSelection:
    atoms = [n for n in DESCRIPTIONS if n[0].islower()]
    mols = [n for n in DESCRIPTIONS if not n[0].islower()]
    return FeatureSelection(
        atom_features=atoms,
        molecule_features=mols,
        feature_descriptions=DESCRIPTIONS,
    )


def build_renderings() -> dict:
    """Every fixture file name mapped to its freshly rendered content."""
    renders = {
        "stage1_messages.json": json.dumps(
            stage1_messages(TASK), indent=2, ensure_ascii=False
        )
        + "\n"
    }
    analogue, query = build_packet_objects()
    sel = selection()
    renders["stage3_classification.txt"] = (
        stage3_prompt(TASK, sel, query, [analogue]) + "\n"
    )
    renders["stage3_regression.txt"] = (
        stage3_prompt(
            "Predict aqueous solubility in log mol/L.", sel, query,
            [analogue], task_kind="regression",
        )
        + "\n"
    )
    smiles = "CC(=O)Nc1ccc(O)cc1"
    for style in ("da", "cot"):
        renders[f"baseline_{style}_zeroshot.txt"] = (
            baseline_prompt(style, TASK, smiles) + "\n"
        )
        renders[f"baseline_{style}_fewshot.txt"] = (
            baseline_prompt(style, TASK, smiles, examples=FEWSHOT) + "\n"
        )
    return renders


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "tests" / "data" / "prompts"
    out.mkdir(parents=True, exist_ok=True)
    for name, text in build_renderings().items():
        (out / name).write_text(text)
    for path in sorted(out.iterdir()):
        print(f"wrote {path.name} ({path.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
