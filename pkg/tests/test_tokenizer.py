"""Codebook handling and nearest-codeword atom tokenization."""
import json
import random

import numpy as np
import pytest

from atomprior.molgraph import parse_smiles
from atomprior.tokenizer import (
    Codebook,
    DimensionMismatch,
    assign_token,
    default_invariant_embedding,
    embed_atoms,
    render_token_sequence,
    tokenize,
)
from conftest import random_molecules, respell


class TestCodebook:
    def test_random_shape_and_len(self):
        cb = Codebook.random(size=17, dim=8, seed=3)
        assert len(cb) == 17
        assert cb.codewords.shape == (17, 8)

    def test_declared_dim_must_match(self):
        with pytest.raises(DimensionMismatch):
            Codebook(dim=5, codewords=np.zeros((4, 3)))

    def test_json_roundtrip(self, tmp_path):
        cb = Codebook.random(size=6, dim=4, seed=5)
        path = tmp_path / "codebook.json"
        cb.save(path)
        again = Codebook.load(path)
        assert again.dim == 4
        assert np.array_equal(again.codewords, cb.codewords)

    def test_external_json_format(self, tmp_path):
        path = tmp_path / "codebook.json"
        path.write_text(
            json.dumps({"dim": 2, "codewords": [[0.0, 0.0], [1.0, 1.0]]})
        )
        cb = Codebook.load(path)
        assert len(cb) == 2
        assert assign_token(np.array([0.9, 0.9]), cb) == 1


class TestAssignToken:
    def test_exact_codeword_hits_own_index(self):
        cb = Codebook.random(size=12, dim=6, seed=11)
        for j in range(len(cb)):
            assert assign_token(cb.codewords[j], cb) == j

    def test_nearest_wins(self):
        cb = Codebook(dim=1, codewords=[[0.0], [1.0]])
        assert assign_token(np.array([0.4]), cb) == 0
        assert assign_token(np.array([0.6]), cb) == 1

    def test_tie_breaks_toward_lowest_index(self):
        cb = Codebook(dim=1, codewords=[[0.0], [1.0]])
        assert assign_token(np.array([0.5]), cb) == 0

    def test_dimension_mismatch(self):
        cb = Codebook(dim=3, codewords=[[0.0, 0.0, 0.0]])
        with pytest.raises(DimensionMismatch):
            assign_token(np.array([1.0, 2.0]), cb)


class TestEmbedding:
    def test_symmetric_atoms_identical(self):
        mol = parse_smiles("CCC")
        first = default_invariant_embedding(mol, 0)
        last = default_invariant_embedding(mol, 2)
        middle = default_invariant_embedding(mol, 1)
        assert np.array_equal(first, last)
        assert not np.array_equal(first, middle)

    def test_aromatic_flag_separates_environments(self):
        benzene = embed_atoms(parse_smiles("c1ccccc1"))
        cyclohexane = embed_atoms(parse_smiles("C1CCCCC1"))
        assert not np.array_equal(benzene[0], cyclohexane[0])

    def test_bitwise_deterministic(self):
        a = embed_atoms(parse_smiles("CC(=O)Nc1ccc(O)cc1"))
        b = embed_atoms(parse_smiles("CC(=O)Nc1ccc(O)cc1"))
        assert np.array_equal(a, b)

    def test_counts_sum_to_radii_per_atom(self):
        mol = parse_smiles("CCO")
        emb = embed_atoms(mol, dim=16)
        # each atom contributes one hash per radius 0..2
        assert np.all(emb.sum(axis=1) == 3.0)


class TestTokenize:
    def test_single_atom_single_codeword(self):
        cb = Codebook(dim=4, codewords=[[0.0, 0.0, 0.0, 0.0]])
        tokens = tokenize(parse_smiles("C"), cb)
        assert tokens == [0]
        assert render_token_sequence(tokens) == "A0"

    def test_token_count_equals_atom_count(self, tiny_codebook):
        for _, mol in random_molecules(25, seed=51):
            assert len(tokenize(mol, tiny_codebook)) == len(mol.atoms)

    def test_ids_within_codebook(self, tiny_codebook):
        for _, mol in random_molecules(10, seed=53):
            assert all(
                0 <= t < len(tiny_codebook)
                for t in tokenize(mol, tiny_codebook)
            )

    def test_symmetric_atoms_share_tokens(self, tiny_codebook):
        tokens = tokenize(parse_smiles("CCC"), tiny_codebook)
        assert tokens[0] == tokens[2]
        benzene = tokenize(parse_smiles("c1ccccc1"), tiny_codebook)
        assert len(set(benzene)) == 1

    def test_respelling_invariance(self, tiny_codebook):
        rng = random.Random(3)
        for _, mol in random_molecules(15, seed=57):
            reference = sorted(tokenize(mol, tiny_codebook))
            for _ in range(4):
                again = parse_smiles(respell(mol, rng))
                assert sorted(tokenize(again, tiny_codebook)) == reference

    def test_custom_provider_matches_default(self, tiny_codebook):
        mol = parse_smiles("CCOC")
        via_provider = tokenize(
            mol,
            tiny_codebook,
            provider=lambda m, i: default_invariant_embedding(
                m, i, tiny_codebook.dim
            ),
        )
        assert via_provider == tokenize(mol, tiny_codebook)

    def test_provider_dimension_checked(self, tiny_codebook):
        with pytest.raises(DimensionMismatch):
            tokenize(
                parse_smiles("CC"),
                tiny_codebook,
                provider=lambda m, i: np.zeros(3),
            )

    def test_rendered_sequence_shape(self, tiny_codebook):
        # 35 heavy atoms -> 35 space-joined "A<id>" groups
        smiles = (
            "Fc1cc(cc(F)c1)CC(NC(=O)C)C(O)C[NH2+]C1(CCCCC1)"
            "c1cc(ccc1)C1CCOC1"
        )
        mol = parse_smiles(smiles)
        assert len(mol.atoms) == 35
        rendered = render_token_sequence(tokenize(mol, tiny_codebook))
        groups = rendered.split(" ")
        assert len(groups) == 35
        assert all(g.startswith("A") and g[1:].isdigit() for g in groups)
