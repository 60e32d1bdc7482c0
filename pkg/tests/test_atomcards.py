"""Functional-atom selection rules and evidence-packet rendering."""
from pathlib import Path
from types import SimpleNamespace

import pytest

from atomprior.atomcards import (
    ATOM_FEATURE_NAMES,
    MOLECULE_FEATURE_NAMES,
    AtomCard,
    UnknownFeatureName,
    build_atom_cards,
    build_evidence_packet,
    must_keep_atoms,
    select_functional_atoms,
)
from atomprior.descriptors import compute_atom_attributes
from atomprior.knowledge_base import KnowledgeBase
from atomprior.molgraph import parse_smiles
from atomprior.retrieval import IndexEntry, morgan_fingerprint
from conftest import random_molecules

DATA = Path(__file__).parent / "data"


def make_profile(token_id, **overrides):
    profile = {
        "token_id": token_id,
        "support_count": 100,
        "primary_symbol": "C",
        "is_mixed": False,
        "symbol_distribution": {"C": 100},
        "mixture_entropy": 0.0,
        "env_type": "chain",
        "env_distribution": {"chain": 100},
        "aromatic_ratio": 0.0,
        "conjugated_ratio": 0.0,
        "median_degree": 2.0,
        "median_ring_size": 0.0,
        "hybridization": "sp3",
        "electrics": {"inductive": 0, "resonance": 0},
        "polarity": {
            "gasteiger_q50": 0.01,
            "gasteiger_iqr": 0.05,
            "tpsa_contrib_q50": 0.0,
        },
        "hbond": {"donor_ratio": 0.1, "acceptor_ratio": 0.2},
        "hetero_r1_median": 0.0,
        "neighbors_top": [],
    }
    profile.update(overrides)
    return profile


def selection(atoms, mols=("TPSA", "MolWt")):
    return SimpleNamespace(
        atom_features=list(atoms), molecule_features=list(mols)
    )


class TestSelection:
    def test_benzene_all_aromatic_carbons_kept(self):
        mol = parse_smiles("c1ccccc1")
        assert sorted(select_functional_atoms(mol)) == [0, 1, 2, 3, 4, 5]

    def test_butane_filled_under_budget(self):
        mol = parse_smiles("CCCC")
        attrs = compute_atom_attributes(mol)
        assert must_keep_atoms(mol, attrs) == set()
        assert sorted(select_functional_atoms(mol, attrs)) == [0, 1, 2, 3]

    def test_count_is_min_of_budget_and_atoms(self):
        for _, mol in random_molecules(50, seed=61):
            selected = select_functional_atoms(mol, budget=20)
            assert len(selected) == min(20, len(mol.atoms))
            assert len(set(selected)) == len(selected)

    def test_must_keep_always_selected_when_it_fits(self):
        for _, mol in random_molecules(50, seed=67):
            attrs = compute_atom_attributes(mol)
            keep = must_keep_atoms(mol, attrs)
            if len(keep) <= 20:
                assert keep <= set(select_functional_atoms(mol, attrs))

    def test_over_budget_matches_sort_oracle(self):
        mol = parse_smiles("N" + "N" * 24)
        attrs = compute_atom_attributes(mol)
        keep = must_keep_atoms(mol, attrs)
        assert len(keep) == 25
        oracle = sorted(
            keep,
            key=lambda i: (
                -abs(attrs[i].gasteiger_charge),
                -int(mol.atoms[i].aromatic),
                i,
            ),
        )[:20]
        assert select_functional_atoms(mol, attrs, budget=20) == oracle

    def test_over_budget_aromatic_outranks_equal_charge(self):
        # attribute rows crafted so charges tie; aromatic atom must win
        mol = parse_smiles("c1ccccc1CC")
        attrs = compute_atom_attributes(mol)
        rows = [
            SimpleNamespace(
                gasteiger_charge=0.5,
                tpsa_contrib=0.0,
                is_hbond_donor=True,
                is_hbond_acceptor=False,
                inductive_sign=0,
                resonance_sign=0,
                hetero_neighbors_r1=0,
            )
            for _ in mol.atoms
        ]
        selected = select_functional_atoms(mol, rows, budget=2)
        assert selected == [0, 1]  # aromatic atoms first, then index

    def test_fill_prefers_heteroatom_proximity(self):
        mol = parse_smiles("CCCCO")
        attrs = compute_atom_attributes(mol)
        keep = must_keep_atoms(mol, attrs)
        assert keep == {4}
        selected = select_functional_atoms(mol, attrs, budget=3)
        assert selected[0] == 4
        assert selected[1:] == [3, 2]  # closest to the oxygen first

    def test_fill_prefers_sp_and_sp2(self):
        # only the terminal =CH2 carries enough charge to be kept; the
        # other sp2 carbon must beat both sp3 carbons in the fill
        mol = parse_smiles("CCC=C")
        attrs = compute_atom_attributes(mol)
        assert must_keep_atoms(mol, attrs) == {3}
        assert select_functional_atoms(mol, attrs, budget=2) == [3, 2]

    def test_deterministic_across_recomputation(self):
        for _, mol in random_molecules(10, seed=71):
            first = select_functional_atoms(mol, compute_atom_attributes(mol))
            second = select_functional_atoms(mol, compute_atom_attributes(mol))
            assert first == second


class TestAtomCards:
    def test_symbol_comes_from_token_profile(self):
        # token 9's corpus-majority element is carbon even though this
        # particular atom is fluorine
        kb = KnowledgeBase(profiles=[make_profile(9)])
        mol = parse_smiles("FC")
        cards = build_atom_cards(mol, [9, 9], ["primary_symbol"], kb)
        assert [c.symbol for c in cards] == ["C", "C"]
        assert cards[0].atom_index == 0

    def test_unseen_token_falls_back_to_element(self):
        kb = KnowledgeBase(profiles=[])
        mol = parse_smiles("CO")
        cards = build_atom_cards(mol, [5, 6], ["gasteiger_q50"], kb)
        assert [c.symbol for c in cards] == ["C", "O"]
        assert all(c.selected_fields == {} for c in cards)

    def test_primary_symbol_not_repeated_in_fields(self):
        kb = KnowledgeBase(profiles=[make_profile(3)])
        mol = parse_smiles("C")
        (card,) = build_atom_cards(
            mol, [3], ["primary_symbol", "median_degree"], kb
        )
        assert "primary_symbol" not in card.selected_fields
        assert card.selected_fields == {"median_degree": 2.0}
        assert card.render() == "[A3, Atom#0, C]: median_degree=2.000"

    def test_field_mapping(self):
        profile = make_profile(
            4,
            aromatic_ratio=0.515,
            conjugated_ratio=0.517,
            median_degree=2.0,
            env_distribution={"chain": 80, "ring": 15, "fused_ring": 5},
            hbond={"donor_ratio": 0.006, "acceptor_ratio": 0.479},
            polarity={
                "gasteiger_q50": -0.059,
                "gasteiger_iqr": 0.145,
                "tpsa_contrib_q50": 0.0,
            },
            neighbors_top=[
                {"token": 124, "pmi": 6.908255240747004,
                 "co_occur_ratio": 0.2788412820795242}
            ],
        )
        kb = KnowledgeBase(profiles=[profile])
        mol = parse_smiles("C")
        (card,) = build_atom_cards(mol, [4], list(ATOM_FEATURE_NAMES), kb)
        line = card.render()
        assert line.startswith("[A4, Atom#0, C]: ")
        assert "gasteiger_q50=-0.059" in line
        assert "gasteiger_iqr=0.145" in line
        assert "hba_ratio=0.479" in line
        assert "hbd_ratio=0.006" in line
        assert "aromatic_ratio=0.515" in line
        assert "ring_ratio=0.200" in line  # (15+5)/100
        assert "support_count=100" in line
        assert "is_mixed=False" in line
        assert (
            "neighbors_top=[{'token': 124, 'pmi': 6.908255240747004, "
            "'co_occur_ratio': 0.2788412820795242}]" in line
        )

    def test_unknown_feature_rejected(self):
        kb = KnowledgeBase(profiles=[make_profile(1)])
        mol = parse_smiles("C")
        with pytest.raises(UnknownFeatureName):
            build_atom_cards(mol, [1], ["electronegativity"], kb)

    def test_budget_limits_cards(self):
        kb = KnowledgeBase(profiles=[make_profile(2)])
        mol = parse_smiles("C" * 30)
        cards = build_atom_cards(mol, [2] * 30, ["median_degree"], kb,
                                 budget=20)
        assert len(cards) == 20
        indices = [c.atom_index for c in cards]
        assert indices == sorted(indices)


def entry_for(smiles, label=1, kb_tokens=None):
    mol = parse_smiles(smiles)
    return mol, IndexEntry(
        smiles=smiles,
        fingerprint=morgan_fingerprint(mol),
        label=label,
        token_sequence=kb_tokens or [0] * len(mol.atoms),
    )


class TestEvidencePacket:
    def test_analogue_has_similarity_and_gt(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO")
        text = build_evidence_packet(
            entry, 0.928, selection(["median_degree"]), kb, mol=mol
        ).render()
        assert "Similarity: 0.928" in text
        assert "GT: yes" in text
        assert text.index("Similarity:") < text.index("GT:")

    def test_query_omits_similarity_and_gt(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO")
        text = build_evidence_packet(
            entry, None, selection(["median_degree"]), kb, mol=mol
        ).render()
        assert "Similarity:" not in text
        assert "GT:" not in text

    def test_section_order(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO")
        text = build_evidence_packet(
            entry, 0.5, selection(["median_degree"]), kb, mol=mol
        ).render()
        positions = [
            text.index(header)
            for header in ("SMILES:", "DTS:", "Similarity:", "GT:",
                           "SAF:", "SMF:")
        ]
        assert positions == sorted(positions)

    def test_zero_atom_features_empty_saf(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO")
        text = build_evidence_packet(
            entry, None, selection([], mols=["TPSA"]), kb, mol=mol
        ).render()
        assert "SAF:" in text
        saf_part = text.split("SAF:")[1].split("SMF:")[0]
        assert saf_part.strip() == ""
        assert "{'TPSA': 20.23}" in text

    def test_numeric_ground_truth_rendered_as_number(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO", label=-0.742)
        text = build_evidence_packet(
            entry, 1.0, selection(["median_degree"]), kb, mol=mol
        ).render()
        assert "GT: -0.742" in text

    def test_zero_label_renders_no(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO", label=0)
        text = build_evidence_packet(
            entry, 1.0, selection(["median_degree"]), kb, mol=mol
        ).render()
        assert "GT: no" in text

    def test_molecule_features_follow_selection_order(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO")
        packet = build_evidence_packet(
            entry, None, selection([], mols=["MolWt", "TPSA"]), kb, mol=mol
        )
        assert list(packet.molecule_features) == ["MolWt", "TPSA"]

    def test_stored_descriptors_win_over_recompute(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO")
        entry.descriptors = {"TPSA": 99.9, "MolWt": 1.0}
        packet = build_evidence_packet(
            entry, None, selection([], mols=["TPSA", "MolWt"]), kb, mol=mol
        )
        assert packet.molecule_features == {"TPSA": 99.9, "MolWt": 1.0}

    def test_unknown_molecule_feature_rejected(self):
        kb = KnowledgeBase(profiles=[make_profile(0)])
        mol, entry = entry_for("CCO")
        with pytest.raises(UnknownFeatureName):
            build_evidence_packet(
                entry, None, selection([], mols=["Volume"]), kb, mol=mol
            )

    def test_layout_fixture_bytes(self):
        import sys

        sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tools"))
        try:
            from make_packet_fixture import MARKER, build_packets
        finally:
            sys.path.pop(0)
        analogue, query = build_packets()
        fixture = (DATA / "evidence_packet_layout.txt").read_text()
        expected = analogue + "\n" + MARKER + query + "\n"
        assert fixture == expected


class TestSchemaLists:
    def test_vocabulary_sizes(self):
        assert len(ATOM_FEATURE_NAMES) == 13
        assert len(MOLECULE_FEATURE_NAMES) == 9
