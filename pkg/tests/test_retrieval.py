"""Fingerprinting, Tanimoto similarity, and top-k analogue search."""
import random

import pytest

from atomprior.molgraph import parse_smiles
from atomprior.retrieval import (
    AnalogueIndex,
    Fingerprint,
    WidthMismatch,
    build_index,
    morgan_fingerprint,
    tanimoto,
    top_k,
)
from conftest import random_molecules, respell


def fp(positions, nbits=16):
    return Fingerprint.from_positions(positions, nbits)


class TestFingerprint:
    def test_positions_roundtrip(self):
        f = fp([0, 3, 15])
        assert f.positions() == [0, 3, 15]
        assert f.popcount == 3
        assert f.nbits == 16

    def test_popcount_cached_consistently(self):
        f = Fingerprint(bits=0b1011, nbits=8)
        assert f.popcount == 3

    def test_width_guard(self):
        with pytest.raises(ValueError):
            Fingerprint.from_positions([16], nbits=16)
        with pytest.raises(ValueError):
            Fingerprint(bits=1 << 20, nbits=16)

    def test_immutable(self):
        f = fp([1])
        with pytest.raises(AttributeError):
            f.bits = 0

    def test_spelling_invariance(self):
        rng = random.Random(4)
        for smiles, mol in random_molecules(20, seed=17):
            reference = morgan_fingerprint(mol)
            for _ in range(5):
                again = parse_smiles(respell(mol, rng))
                assert morgan_fingerprint(again) == reference, smiles

    def test_distinct_elements_differ(self):
        a = morgan_fingerprint(parse_smiles("C"))
        b = morgan_fingerprint(parse_smiles("N"))
        assert a != b

    def test_methane_sets_few_bits(self):
        f = morgan_fingerprint(parse_smiles("C"), radius=2)
        assert 1 <= f.popcount <= 3

    def test_deterministic_across_parses(self):
        a = morgan_fingerprint(parse_smiles("CC(=O)Nc1ccc(O)cc1"))
        b = morgan_fingerprint(parse_smiles("CC(=O)Nc1ccc(O)cc1"))
        assert a == b and a.popcount > 0


class TestTanimoto:
    def test_identical_nonzero(self):
        f = fp([1, 5, 9])
        assert tanimoto(f, f) == 1.0

    def test_disjoint(self):
        assert tanimoto(fp([0, 1]), fp([2, 3])) == 0.0

    def test_one_third(self):
        # overlap 1 of 2+2 set bits
        assert tanimoto(fp([0, 1]), fp([0, 2])) == pytest.approx(1 / 3)

    def test_both_empty(self):
        assert tanimoto(fp([]), fp([])) == 0.0

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            tanimoto(fp([0], nbits=16), fp([0], nbits=32))

    def test_symmetry_and_range(self):
        rng = random.Random(8)
        for _ in range(200):
            a = fp(rng.sample(range(64), rng.randrange(0, 20)), nbits=64)
            b = fp(rng.sample(range(64), rng.randrange(0, 20)), nbits=64)
            s = tanimoto(a, b)
            assert 0.0 <= s <= 1.0
            assert s == tanimoto(b, a)


def small_index(n=30, seed=23):
    index = AnalogueIndex(nbits=512)
    for pos, (smiles, mol) in enumerate(random_molecules(n, seed=seed)):
        index.add(smiles, label=pos % 2)
    return index


class TestTopK:
    def test_zero_k_empty(self):
        index = small_index()
        query = index.entries[0].fingerprint
        assert top_k(query, index, 0) == []
        assert index.query(index.entries[0].smiles, 0) == []

    def test_k_beyond_pool(self):
        index = small_index(10)
        hits = top_k(index.entries[0].fingerprint, index, 99)
        assert len(hits) == 10

    def test_exact_member_first(self):
        index = small_index()
        hits = top_k(index.entries[4].fingerprint, index, 3)
        assert hits[0].entry is index.entries[4]
        assert hits[0].similarity == 1.0

    def test_ties_break_toward_lower_entry_index(self):
        index = AnalogueIndex(nbits=512)
        index.add("CCO", label=0)
        index.add("OCC", label=1)  # same molecule, same fingerprint
        hits = top_k(index.entries[0].fingerprint, index, 2)
        assert [h.entry.label for h in hits] == [0, 1]
        assert hits[0].similarity == hits[1].similarity == 1.0

    def test_prefix_property(self):
        index = small_index(25)
        query = morgan_fingerprint(parse_smiles("CCOC(=O)C"), nbits=512)
        for k in range(0, 10):
            shorter = top_k(query, index, k)
            longer = top_k(query, index, k + 1)
            assert [h.entry.smiles for h in longer[:k]] == [
                h.entry.smiles for h in shorter
            ]

    def test_matches_full_scan_oracle(self):
        index = small_index(100, seed=29)
        query = morgan_fingerprint(parse_smiles("c1ccccc1CCN"), nbits=512)
        scored = [
            (tanimoto(query, e.fingerprint), pos)
            for pos, e in enumerate(index.entries)
        ]
        scored.sort(key=lambda t: (-t[0], t[1]))
        hits = top_k(query, index, 10)
        assert [index.entries[pos].smiles for _, pos in scored[:10]] == [
            h.entry.smiles for h in hits
        ]
        assert [s for s, _ in scored[:10]] == [h.similarity for h in hits]


class TestAnalogueIndex:
    def test_query_excludes_exact_smiles(self):
        index = AnalogueIndex(nbits=256)
        index.add("CCO", label=1)
        index.add("CCN", label=0)
        index.add("CCC", label=0)
        hits = index.query("CCO", 3)
        assert all(h.entry.smiles != "CCO" for h in hits)
        assert len(hits) == 2
        kept = index.query("CCO", 3, exclude_self=False)
        assert kept[0].entry.smiles == "CCO"

    def test_width_mismatch_on_add(self):
        index = AnalogueIndex(nbits=256)
        with pytest.raises(WidthMismatch):
            index.add("CC", label=0, fingerprint=fp([1], nbits=16))

    def test_entry_payload(self):
        index = AnalogueIndex()
        entry = index.add(
            "CCO",
            label=3.25,
            token_sequence=[4, 4, 9],
            descriptors={"MolWt": 46.069},
        )
        assert entry.token_sequence == [4, 4, 9]
        assert entry.descriptors["MolWt"] == 46.069

    def test_save_load_roundtrip(self, tmp_path):
        index = AnalogueIndex(nbits=512)
        index.add("CCO", label=1, token_sequence=[1, 2, 3],
                  descriptors={"TPSA": 20.23})
        index.add("c1ccccc1", label=0.5)
        path = tmp_path / "index.jsonl"
        index.save(path)
        again = AnalogueIndex.load(path)
        assert again.nbits == 512 and again.radius == index.radius
        assert len(again) == 2
        for a, b in zip(index.entries, again.entries):
            assert a.smiles == b.smiles
            assert a.fingerprint == b.fingerprint
            assert a.label == b.label
            assert a.token_sequence == b.token_sequence
            assert a.descriptors == b.descriptors

    def test_persisted_lines_carry_bit_positions(self, tmp_path):
        import json

        index = AnalogueIndex(nbits=128)
        index.add("CC", label=1)
        path = tmp_path / "index.jsonl"
        index.save(path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2  # header + one entry
        entry = json.loads(lines[1])
        assert entry["smiles"] == "CC"
        assert entry["label"] == 1
        assert entry["bits"] == index.entries[0].fingerprint.positions()

    def test_build_index_helper(self):
        index = build_index([("CCO", 1.0), ("CCN", 0.0)], nbits=256)
        assert len(index) == 2
        assert index.entries[0].label == 1.0
