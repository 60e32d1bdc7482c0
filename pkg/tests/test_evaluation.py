"""Datasets, splits, metrics, KNN, and the benchmark loop."""
import json
import math
import random

import pytest

from atomprior.evaluation import (
    Dataset,
    DegenerateLabels,
    EmptyPool,
    LengthMismatch,
    auroc,
    knn_predict,
    load_dataset,
    load_multilabel,
    murcko_framework,
    rmse,
    run_benchmark,
    run_knn_baseline,
    run_multilabel_benchmark,
    run_prompt_baseline,
    split,
    write_eval_result,
)
from atomprior.knowledge_base import build_knowledge_base
from atomprior.llm_client import DeterministicClock, LLMClient, mock_provider
from atomprior.molgraph import parse_smiles, write_smiles
from atomprior.prompts import FeatureSelection
from atomprior.retrieval import Fingerprint, IndexEntry, tanimoto
from atomprior.tokenizer import Codebook, tokenize
from conftest import random_molecules, respell


def write_csv(path, rows, header=("smiles", "label")):
    path.write_text(
        ",".join(header) + "\n" + "\n".join(",".join(map(str, r)) for r in rows)
        + "\n"
    )
    return path


class TestLoadDataset:
    def test_reads_header_driven_csv(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", [("CCO", 1), ("CCN", 0)])
        dataset = load_dataset(path)
        assert dataset.records == [
            {"smiles": "CCO", "label": 1},
            {"smiles": "CCN", "label": 0},
        ]
        assert dataset.n_dropped == 0

    def test_unparseable_smiles_dropped_with_count(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            [("CCO", 1), ("not_a_smiles((", 0), ("CCN", 1)],
        )
        dataset = load_dataset(path)
        assert len(dataset) == 2
        assert dataset.n_dropped == 1

    def test_bad_labels_dropped(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv", [("CCO", 1), ("CCN", ""), ("CCC", 2)]
        )
        dataset = load_dataset(path)
        assert len(dataset) == 1
        assert dataset.n_dropped == 2

    def test_regression_labels_kept_as_floats(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", [("CCO", -0.77), ("CCN", 1.5)])
        dataset = load_dataset(path, task_kind="regression")
        assert dataset.records[0]["label"] == -0.77

    def test_named_columns(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            [("CCO", "x", 1)],
            header=("mol", "junk", "activity"),
        )
        dataset = load_dataset(
            path, smiles_column="mol", label_column="activity"
        )
        assert dataset.records == [{"smiles": "CCO", "label": 1}]

    def test_missing_smiles_column_rejected(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", [("CCO", 1)], header=("a", "b"))
        with pytest.raises(ValueError):
            load_dataset(path)

    def test_multilabel_loads_one_dataset_per_column(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            [("CCO", 1, 0), ("CCN", "", 1), ("CCC", 0, 1)],
            header=("smiles", "tox_a", "tox_b"),
        )
        datasets = load_multilabel(path)
        assert set(datasets) == {"tox_a", "tox_b"}
        assert len(datasets["tox_a"]) == 2  # blank cell dropped
        assert len(datasets["tox_b"]) == 3


def toy_dataset(n=20, task_kind="classification", split_kind="random"):
    records = []
    for i, (smiles, _) in enumerate(random_molecules(n, seed=17)):
        label = i % 2 if task_kind == "classification" else float(i) / n
        records.append({"smiles": smiles, "label": label})
    return Dataset(
        records=records,
        task_kind=task_kind,
        task_instruction="Is the molecule active?",
        split_kind=split_kind,
    )


class TestSplit:
    def test_ninety_ten_arithmetic(self):
        dataset = toy_dataset(10)
        train, test = split(dataset)
        assert (len(train), len(test)) == (9, 1)

    def test_partition_preserves_records(self):
        dataset = toy_dataset(20)
        train, test = split(dataset)
        merged = sorted(r["smiles"] for r in train + test)
        assert merged == sorted(r["smiles"] for r in dataset.records)

    def test_deterministic_for_fixed_seed(self):
        dataset = toy_dataset(50)
        assert split(dataset, seed=42) == split(dataset, seed=42)
        assert split(dataset, seed=42) != split(dataset, seed=43)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            split(Dataset(records=[]))

    def test_scaffold_groups_fill_train_first(self):
        # framework sizes: 6-ring x5, naphthalene x3, 5-ring x2
        six = ["Cc1ccccc1", "CCc1ccccc1", "c1ccccc1O", "C1CCCCC1",
               "Clc1ccccc1"]
        naph = ["c1ccc2ccccc2c1", "Cc1ccc2ccccc2c1", "OCc1ccc2ccccc2c1"]
        five = ["C1CCCC1", "CC1CCCC1"]
        records = [{"smiles": s, "label": 0} for s in six + naph + five]
        dataset = Dataset(records=records, split_kind="scaffold")
        train, test = split(dataset, ratio=0.8)
        train_smiles = {r["smiles"] for r in train}
        assert train_smiles == set(six + naph)
        assert {r["smiles"] for r in test} == set(five)

    def test_same_framework_never_straddles_sides(self):
        dataset = toy_dataset(40, split_kind="scaffold")
        train, test = split(dataset)
        train_frames = {
            murcko_framework(parse_smiles(r["smiles"])) for r in train
        }
        test_frames = {
            murcko_framework(parse_smiles(r["smiles"])) for r in test
        }
        assert not (train_frames & test_frames)

    def test_two_spellings_share_a_framework(self):
        a = murcko_framework(parse_smiles("Cc1ccccc1"))
        b = murcko_framework(parse_smiles("c1ccccc1CC"))
        assert a == b
        # a saturated 6-ring reduces to the same bare framework
        assert a == murcko_framework(parse_smiles("C1CCCCC1"))


class TestMurckoFramework:
    def test_acyclic_molecules_share_empty_framework(self):
        assert murcko_framework(parse_smiles("CCO")) == ""
        assert murcko_framework(parse_smiles("CC(C)CC(=O)O")) == ""

    def test_ring_and_linker_retained(self):
        # biphenyl-like with a 2-carbon linker: 14 framework atoms
        framework = murcko_framework(parse_smiles("c1ccccc1CCc1ccccc1"))
        assert framework.startswith("bm:14:15:")

    def test_side_chains_pruned(self):
        assert murcko_framework(parse_smiles("c1ccccc1")) == murcko_framework(
            parse_smiles("CCCCc1ccccc1CCN")
        )

    def test_different_ring_sizes_differ(self):
        assert murcko_framework(parse_smiles("C1CCCC1")) != murcko_framework(
            parse_smiles("C1CCCCC1")
        )

    def test_respelling_invariant(self):
        rng = random.Random(5)
        for _, mol in random_molecules(25, seed=23):
            expected = murcko_framework(mol)
            for _ in range(3):
                assert murcko_framework(
                    parse_smiles(respell(mol, rng))
                ) == expected


class TestAuroc:
    def test_perfect_ranking(self):
        assert auroc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_inverted_ranking(self):
        assert auroc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0

    def test_all_ties_give_half(self):
        assert auroc([0.5] * 6, [1, 0, 1, 0, 1, 0]) == 0.5

    def test_tied_pair_counts_half(self):
        value = auroc([1.0, 0.5, 0.5, 0.0], [1, 1, 0, 0])
        assert value == pytest.approx((2 + 0.5 + 1) / 4)

    def test_degenerate_labels(self):
        with pytest.raises(DegenerateLabels):
            auroc([0.1, 0.9], [1, 1])
        with pytest.raises(DegenerateLabels):
            auroc([0.1, 0.9], [0, 0])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            auroc([0.1], [1, 0])

    def test_matches_pair_counting_oracle(self):
        rng = random.Random(99)
        for _ in range(30):
            n = rng.randint(4, 60)
            labels = [rng.randint(0, 1) for _ in range(n)]
            if len(set(labels)) < 2:
                labels[0], labels[1] = 0, 1
            scores = [rng.choice([0.1, 0.3, 0.5, 0.7, 0.9]) for _ in range(n)]
            wins = ties = total = 0
            for i in range(n):
                for j in range(n):
                    if labels[i] == 1 and labels[j] == 0:
                        total += 1
                        if scores[i] > scores[j]:
                            wins += 1
                        elif scores[i] == scores[j]:
                            ties += 1
            expected = (wins + 0.5 * ties) / total
            assert auroc(scores, labels) == pytest.approx(expected, abs=1e-12)

    def test_invariant_under_monotone_transforms(self):
        scores = [0.11, 0.42, 0.42, 0.73, 0.05, 0.99]
        labels = [0, 1, 0, 1, 0, 1]
        base = auroc(scores, labels)
        assert auroc([3 * s + 7 for s in scores], labels) == base
        assert auroc([math.exp(s) for s in scores], labels) == base


class TestRmse:
    def test_zero_when_equal(self):
        assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_case(self):
        assert rmse([0, 0], [3, 4]) == pytest.approx(math.sqrt(12.5))

    def test_single_element(self):
        assert rmse([5.0], [3.0]) == 2.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            rmse([1.0], [1.0, 2.0])

    def test_shift_invariance(self):
        preds = [0.2, 1.4, -3.0]
        labels = [0.0, 1.0, -2.5]
        assert rmse([p + 10 for p in preds], [y + 10 for y in labels]) == \
            pytest.approx(rmse(preds, labels))


def entry(positions, label, nbits=16):
    bits = Fingerprint.from_positions(positions, nbits)
    return IndexEntry(smiles=f"fp{positions}", fingerprint=bits, label=label)


class TestKnnPredict:
    def test_uniform_labels_any_mode(self):
        pool = [entry([0], 3.0), entry([1], 3.0), entry([2], 3.0)]
        query = Fingerprint.from_positions([0], 16)
        assert knn_predict(query, pool, 3) == 3.0
        assert knn_predict(query, pool, 3, weighted=True) == 3.0

    def test_weighted_hand_case(self):
        pool = [entry([0, 1], 1), entry([0], 2)]
        query = Fingerprint.from_positions([0, 1], 16)
        assert tanimoto(query, pool[1].fingerprint) == 0.5
        assert knn_predict(query, pool, 2, weighted=True) == \
            pytest.approx(4 / 3)
        assert knn_predict(query, pool, 2) == 1.5

    def test_zero_similarity_falls_back_to_mean(self):
        pool = [entry([1], 4.0), entry([2], 8.0)]
        query = Fingerprint.from_positions([9], 16)
        assert knn_predict(query, pool, 2, weighted=True) == 6.0

    def test_weighted_equals_unweighted_on_equal_sims(self):
        pool = [entry([0, 3], 1.0), entry([0, 5], 0.0)]
        query = Fingerprint.from_positions([0], 16)
        sims = [tanimoto(query, e.fingerprint) for e in pool]
        assert sims[0] == sims[1]
        assert knn_predict(query, pool, 2, weighted=True) == \
            knn_predict(query, pool, 2)

    def test_empty_pool(self):
        query = Fingerprint.from_positions([0], 16)
        with pytest.raises(EmptyPool):
            knn_predict(query, [], 1)

    def test_invalid_k(self):
        query = Fingerprint.from_positions([0], 16)
        with pytest.raises(ValueError):
            knn_predict(query, [entry([0], 1)], 0)


SELECTION = FeatureSelection(
    atom_features=["primary_symbol", "median_degree"],
    molecule_features=["TPSA", "LogP", "MolWt"],
    feature_descriptions={
        "primary_symbol": "element",
        "median_degree": "degree",
        "TPSA": "polarity",
        "LogP": "lipophilicity",
        "MolWt": "size",
    },
)


def pipeline_pieces(dataset):
    codebook = Codebook.random(size=32, dim=64, seed=3)
    kb = build_knowledge_base(
        (mol, tokenize(mol, codebook))
        for mol in (parse_smiles(r["smiles"]) for r in dataset.records)
    )
    return codebook, kb


def scripted_client(script, tmp_path=None, journal="journal.jsonl"):
    journal_path = tmp_path / journal if tmp_path else None
    return LLMClient(
        mock_provider(script),
        journal_path=journal_path,
        sleep=lambda _: None,
        clock=DeterministicClock(),
    )


def reply(confidence):
    label = "yes" if confidence > 50 else "no"
    return (
        f"<analysis>mock</analysis>\n<answer>{label}</answer>\n"
        f"<confidence>{confidence}</confidence>"
    )


class TestRunBenchmark:
    def test_five_record_run_scores_and_journals(self, tmp_path):
        dataset = toy_dataset(50)
        codebook, kb = pipeline_pieces(dataset)
        train, test = split(dataset)
        assert len(test) == 5
        confidences = [85, 20, 70, 30, 55]
        client = scripted_client([reply(c) for c in confidences], tmp_path)
        result = run_benchmark(
            dataset, codebook, kb, client, SELECTION, k=2, concurrency=1
        )
        assert result.metric_name == "AUROC"
        assert (result.n_scored, result.n_failed) == (5, 0)
        expected = auroc(
            [c / 100 for c in confidences], [r["label"] for r in test]
        )
        assert result.value == pytest.approx(expected)

        lines = (tmp_path / "journal.jsonl").read_text().splitlines()
        assert len(lines) == 5
        for line in lines:
            prompt = json.loads(line)["request"]["messages"][1]["content"]
            markers = ["Task: ", "FD: ", "SMILES: ", "DTS: ", "SAF: ",
                       "SMF ", "ISA: "]
            positions = [prompt.index(m) for m in markers]
            assert positions == sorted(positions)

    def test_parse_failures_counted_not_imputed(self, tmp_path):
        dataset = toy_dataset(50)
        codebook, kb = pipeline_pieces(dataset)
        script = [reply(80), "no tags at all", reply(30), reply(60),
                  reply(10)]
        client = scripted_client(script, tmp_path)
        result = run_benchmark(
            dataset, codebook, kb, client, SELECTION, k=1, concurrency=1
        )
        assert (result.n_scored, result.n_failed) == (4, 1)
        failed = [r for r in result.per_record if r.get("error")]
        assert len(failed) == 1
        assert "MissingAnswerTag" in failed[0]["error"]

    def test_zero_shot_sentinel_when_k_is_zero(self, tmp_path):
        dataset = toy_dataset(50)
        codebook, kb = pipeline_pieces(dataset)
        client = scripted_client([reply(c) for c in (90, 10, 80, 20, 60)],
                                 tmp_path)
        run_benchmark(
            dataset, codebook, kb, client, SELECTION, k=0, concurrency=1
        )
        for line in (tmp_path / "journal.jsonl").read_text().splitlines():
            prompt = json.loads(line)["request"]["messages"][1]["content"]
            assert "No similar examples available" in prompt
            assert "Similarity:" not in prompt

    def test_conflicting_reply_flagged_and_kept(self, tmp_path):
        dataset = toy_dataset(50)
        codebook, kb = pipeline_pieces(dataset)
        script = [
            "<answer>yes</answer><confidence>30</confidence>",
            reply(80), reply(20), reply(70), reply(40),
        ]
        client = scripted_client(script, tmp_path)
        result = run_benchmark(
            dataset, codebook, kb, client, SELECTION, k=1, concurrency=1
        )
        assert result.n_scored == 5
        flagged = [r for r in result.per_record if r.get("conflict")]
        assert len(flagged) == 1
        assert flagged[0]["score"] == 0.30

    def test_replay_reproduces_result_at_any_concurrency(self, tmp_path):
        from atomprior.llm_client import ReplayProvider

        dataset = toy_dataset(50)
        codebook, kb = pipeline_pieces(dataset)
        client = scripted_client([reply(c) for c in (85, 20, 70, 30, 55)],
                                 tmp_path)
        first = run_benchmark(
            dataset, codebook, kb, client, SELECTION, k=2, concurrency=1
        )
        replayed = LLMClient(
            ReplayProvider.from_journal(tmp_path / "journal.jsonl"),
            sleep=lambda _: None, clock=DeterministicClock(),
        )
        for workers in (1, 3):
            again = run_benchmark(
                dataset, codebook, kb,
                LLMClient(
                    ReplayProvider.from_journal(tmp_path / "journal.jsonl"),
                    sleep=lambda _: None, clock=DeterministicClock(),
                ),
                SELECTION, k=2, concurrency=workers,
            )
            assert again.value == first.value
            assert again.per_record == first.per_record
        del replayed

    def test_regression_run_reports_rmse(self, tmp_path):
        dataset = toy_dataset(50, task_kind="regression")
        codebook, kb = pipeline_pieces(dataset)
        _, test = split(dataset)
        preds = [0.1, 0.5, 0.3, 0.8, 0.2]
        script = [f"<prediction>{p}</prediction>" for p in preds]
        client = scripted_client(script, tmp_path)
        result = run_benchmark(
            dataset, codebook, kb, client, SELECTION, k=1, concurrency=1
        )
        assert result.metric_name == "RMSE"
        expected = rmse(preds, [r["label"] for r in test])
        assert result.value == pytest.approx(expected)


class TestMultilabel:
    def test_macro_average_skips_degenerate_labels(self, tmp_path):
        base = toy_dataset(50)
        degenerate = Dataset(
            records=[dict(r, label=1) for r in base.records],
            task_instruction=base.task_instruction,
        )
        codebook, kb = pipeline_pieces(base)
        script = [reply(c) for c in (85, 20, 70, 30, 55)] + \
            [reply(c) for c in (90, 80, 70, 60, 51)]
        client = scripted_client(script, tmp_path)
        results, macro = run_multilabel_benchmark(
            {"task_a": base, "task_b": degenerate},
            codebook=codebook, kb=kb, client=client, selection=SELECTION,
            k=1, concurrency=1,
        )
        assert results["task_b"] is None
        assert results["task_a"] is not None
        assert macro == results["task_a"].value


class TestBaselines:
    def test_knn_baseline_matches_manual_recompute(self):
        dataset = toy_dataset(50)
        result = run_knn_baseline(dataset, k=3)
        assert result.metric_name == "AUROC"
        assert result.n_failed == 0
        from atomprior.evaluation import build_train_index  # noqa: F401
        train, test = split(dataset)
        index = []
        for r in train:
            index.append(entry_from_smiles(r))
        for row, record in zip(result.per_record, test):
            fingerprint = morgan_of(record)
            assert row["score"] == pytest.approx(
                knn_predict(fingerprint, index, 3)
            )

    def test_weighted_knn_differs_when_sims_do(self):
        dataset = toy_dataset(50)
        plain = run_knn_baseline(dataset, k=5)
        weighted = run_knn_baseline(dataset, weighted=True, k=5)
        assert len(plain.per_record) == len(weighted.per_record)

    def test_da_baseline_zero_shot(self, tmp_path):
        dataset = toy_dataset(50)
        client = scripted_client([reply(c) for c in (85, 20, 70, 30, 55)],
                                 tmp_path)
        result = run_prompt_baseline(dataset, client, style="da", shots=0)
        assert result.n_scored == 5
        lines = (tmp_path / "journal.jsonl").read_text().splitlines()
        prompt = json.loads(lines[0])["request"]["messages"][1]["content"]
        assert "Example" not in prompt
        assert "ISA:" not in prompt

    def test_cot_baseline_few_shot_includes_examples(self, tmp_path):
        dataset = toy_dataset(50)
        client = scripted_client([reply(c) for c in (85, 20, 70, 30, 55)],
                                 tmp_path)
        run_prompt_baseline(dataset, client, style="cot", shots=2)
        lines = (tmp_path / "journal.jsonl").read_text().splitlines()
        prompt = json.loads(lines[0])["request"]["messages"][1]["content"]
        assert "Example 1: SMILES: " in prompt
        assert "Example 2: SMILES: " in prompt


def morgan_of(record):
    from atomprior.retrieval import morgan_fingerprint

    return morgan_fingerprint(parse_smiles(record["smiles"]), 2, 2048)


def entry_from_smiles(record):
    return IndexEntry(
        smiles=record["smiles"],
        fingerprint=morgan_of(record),
        label=record["label"],
    )


class TestWriteEvalResult:
    def test_artifact_files(self, tmp_path):
        dataset = toy_dataset(50)
        result = run_knn_baseline(dataset, k=3)
        write_eval_result(result, tmp_path / "out")
        summary = json.loads((tmp_path / "out" / "eval_result.json").read_text())
        assert summary["metric_name"] == "AUROC"
        assert summary["n_scored"] + summary["n_failed"] == \
            len(result.per_record)
        lines = (tmp_path / "out" / "per_record.jsonl").read_text().splitlines()
        assert len(lines) == len(result.per_record)
        assert json.loads(lines[0])["smiles"] == result.per_record[0]["smiles"]
