"""Datasets, splits, metrics, KNN baselines, and benchmark orchestration.

Splitting supports a seeded random shuffle and a scaffold split that groups
molecules by their ring-and-linker framework (every atom treated as carbon,
every bond as single), fills the training pool from the largest groups, and
sends the remainder to the test set — so no framework ever straddles the
two sides.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .atomcards import build_evidence_packet
from .descriptors import compute_molecule_descriptors
from .llm_client import ChatRequest, DEFAULT_CONCURRENCY
from .molgraph import Molecule, SmilesError, parse_smiles
from .prompts import (
    ResponseParseError,
    baseline_messages,
    parse_answer,
    stage3_messages,
)
from .retrieval import (
    AnalogueIndex,
    IndexEntry,
    morgan_fingerprint,
    top_k,
)
from .tokenizer import tokenize

DEFAULT_SPLIT_RATIO = 0.9
DEFAULT_SEED = 42


class DegenerateLabels(ValueError):
    """AUROC is undefined when only one class is present."""


class LengthMismatch(ValueError):
    pass


class EmptyPool(ValueError):
    pass


@dataclass
class Dataset:
    records: list
    task_kind: str = "classification"
    task_instruction: str = ""
    split_kind: str = "random"
    n_dropped: int = 0

    def __len__(self) -> int:
        return len(self.records)


def _coerce_label(raw, task_kind: str):
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError("non-finite label")
    if task_kind == "classification":
        as_int = int(value)
        if as_int != value or as_int not in (0, 1):
            raise ValueError(f"classification label must be 0/1, got {raw!r}")
        return as_int
    return value


def load_dataset(
    path,
    task_kind: str = "classification",
    task_instruction: str = "",
    split_kind: str = "random",
    smiles_column: str = "smiles",
    label_column: str | None = None,
) -> Dataset:
    """Read a header-driven CSV into a validated Dataset.

    Rows whose SMILES fail to parse, or whose label is missing or invalid,
    are dropped and counted in ``n_dropped``.  When ``label_column`` is
    None the first non-SMILES column is used.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: no CSV header")
        if smiles_column not in reader.fieldnames:
            raise ValueError(
                f"{path}: no column named {smiles_column!r} in header"
            )
        if label_column is None:
            candidates = [c for c in reader.fieldnames if c != smiles_column]
            if not candidates:
                raise ValueError(f"{path}: no label column")
            label_column = candidates[0]
        elif label_column not in reader.fieldnames:
            raise ValueError(
                f"{path}: no column named {label_column!r} in header"
            )
        records = []
        dropped = 0
        for row in reader:
            smiles = (row.get(smiles_column) or "").strip()
            raw_label = (row.get(label_column) or "").strip()
            try:
                parse_smiles(smiles)
                label = _coerce_label(raw_label, task_kind)
            except (SmilesError, ValueError):
                dropped += 1
                continue
            records.append({"smiles": smiles, "label": label})
    return Dataset(
        records=records,
        task_kind=task_kind,
        task_instruction=task_instruction,
        split_kind=split_kind,
        n_dropped=dropped,
    )


def load_multilabel(
    path,
    task_instruction: str = "",
    split_kind: str = "random",
    smiles_column: str = "smiles",
    label_columns=None,
) -> dict:
    """One classification Dataset per label column (one-vs-rest)."""
    with open(path, newline="", encoding="utf-8") as handle:
        header = csv.DictReader(handle).fieldnames or []
    if label_columns is None:
        label_columns = [c for c in header if c != smiles_column]
    return {
        column: load_dataset(
            path,
            task_kind="classification",
            task_instruction=task_instruction,
            split_kind=split_kind,
            smiles_column=smiles_column,
            label_column=column,
        )
        for column in label_columns
    }


# ---------------------------------------------------------------------------
# Scaffold framework


def murcko_framework(mol: Molecule) -> str:
    """Certificate of the molecule's ring-and-linker framework.

    Side chains are pruned by repeatedly deleting non-ring atoms of degree
    at most one; the survivors are compared as a bare graph (all atoms
    carbon, all bonds single) via iterated neighborhood refinement, so any
    spelling of the same framework maps to the same string.  Acyclic
    molecules share the empty framework "".
    """
    keep = set(range(len(mol.atoms)))
    adjacency = {i: set(mol.neighbors(i)) for i in keep}
    changed = True
    while changed:
        changed = False
        for i in sorted(keep):
            if mol.atoms[i].in_ring:
                continue
            if len(adjacency[i] & keep) <= 1:
                keep.discard(i)
                changed = True
    if not keep:
        return ""
    labels = {i: "C" for i in keep}
    for _ in range(min(len(keep), 12)):
        labels = {
            i: hashlib.sha256(
                (
                    labels[i]
                    + "|"
                    + ",".join(sorted(labels[j] for j in adjacency[i] & keep))
                ).encode()
            ).hexdigest()[:16]
            for i in keep
        }
    bond_count = sum(
        1 for b in mol.bonds if b.a in keep and b.b in keep
    )
    digest = hashlib.sha256(
        ",".join(sorted(labels.values())).encode()
    ).hexdigest()[:24]
    return f"bm:{len(keep)}:{bond_count}:{digest}"


def split(dataset: Dataset, ratio: float = DEFAULT_SPLIT_RATIO,
          seed: int = DEFAULT_SEED):
    """Partition records into (train pool, test set).

    Random: seeded shuffle.  Scaffold: group by framework, order groups by
    descending size (certificate as tiebreak), fill train first.
    """
    if not dataset.records:
        raise ValueError("cannot split an empty dataset")
    n_train = int(round(len(dataset.records) * ratio))
    if dataset.split_kind == "scaffold":
        groups: dict = {}
        for record in dataset.records:
            key = murcko_framework(parse_smiles(record["smiles"]))
            groups.setdefault(key, []).append(record)
        ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        train: list = []
        test: list = []
        for _, members in ordered:
            (train if len(train) + len(members) <= n_train else test).extend(
                members
            )
        return train, test
    indices = list(range(len(dataset.records)))
    random.Random(seed).shuffle(indices)
    train = [dataset.records[i] for i in indices[:n_train]]
    test = [dataset.records[i] for i in indices[n_train:]]
    return train, test


# ---------------------------------------------------------------------------
# Metrics


def _ranks(values) -> list:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2 + 1  # 1-based average rank of the tie block
        for position in range(i, j + 1):
            ranks[order[position]] = average
        i = j + 1
    return ranks


def auroc(scores, labels) -> float:
    """Rank-based AUROC; ties count one half, per Mann-Whitney U."""
    if len(scores) != len(labels):
        raise LengthMismatch(
            f"{len(scores)} scores vs {len(labels)} labels"
        )
    n_pos = sum(1 for y in labels if y == 1)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(
            f"need both classes, got {n_pos} positive / {n_neg} negative"
        )
    ranks = _ranks(scores)
    positive_rank_sum = sum(r for r, y in zip(ranks, labels) if y == 1)
    u = positive_rank_sum - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def rmse(preds, labels) -> float:
    if len(preds) != len(labels):
        raise LengthMismatch(f"{len(preds)} preds vs {len(labels)} labels")
    if not preds:
        raise ValueError("rmse of empty sequences")
    return math.sqrt(
        sum((p - y) ** 2 for p, y in zip(preds, labels)) / len(preds)
    )


# ---------------------------------------------------------------------------
# KNN baselines


def knn_predict(query, index, k: int, weighted: bool = False) -> float:
    """Label average of the k nearest entries by Tanimoto similarity.

    Weighted mode uses similarity-weighted averaging and falls back to the
    plain mean when every similarity is zero.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not isinstance(index, AnalogueIndex):
        pool = AnalogueIndex()
        pool.entries = list(index)
        index = pool
    if not index.entries:
        raise EmptyPool("no entries to retrieve from")
    hits = top_k(query, index, k)
    labels = [hit.entry.label for hit in hits]
    plain = sum(labels) / len(labels)
    if not weighted:
        return plain
    total = sum(hit.similarity for hit in hits)
    if total == 0.0:
        return plain
    return sum(hit.similarity * hit.entry.label for hit in hits) / total


# ---------------------------------------------------------------------------
# Benchmark orchestration


@dataclass
class EvalResult:
    metric_name: str
    value: float
    n_scored: int
    n_failed: int
    per_record: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "value": self.value,
            "n_scored": self.n_scored,
            "n_failed": self.n_failed,
        }


def build_train_index(train_records, codebook, radius: int, nbits: int) -> AnalogueIndex:
    index = AnalogueIndex(radius=radius, nbits=nbits)
    for record in train_records:
        mol = parse_smiles(record["smiles"])
        index.add(
            record["smiles"],
            record["label"],
            token_sequence=tokenize(mol, codebook),
            descriptors=compute_molecule_descriptors(mol).as_dict(),
        )
    return index


def _score_records(records, task_kind: str):
    """Reduce per-record rows to (metric_name, value, n_scored, n_failed)."""
    scored = [r for r in records if not r.get("error")]
    failed = len(records) - len(scored)
    if task_kind == "classification":
        value = auroc(
            [r["score"] for r in scored], [r["label"] for r in scored]
        )
        return "AUROC", value, len(scored), failed
    value = rmse(
        [r["prediction"] for r in scored], [r["label"] for r in scored]
    )
    return "RMSE", value, len(scored), failed


def run_benchmark(
    dataset: Dataset,
    codebook,
    kb,
    client,
    selection,
    radius: int = 2,
    nbits: int = 2048,
    k: int = 5,
    budget: int = 20,
    ratio: float = DEFAULT_SPLIT_RATIO,
    seed: int = DEFAULT_SEED,
    model_name: str = "",
    temperature: float = 0.0,
    max_tokens: int = 2000,
    concurrency: int = DEFAULT_CONCURRENCY,
) -> EvalResult:
    """Retrieval-augmented staged inference over the held-out split.

    Per test molecule: tokenize, retrieve k analogues from the training
    index, build evidence packets, render the stage-3 prompt, query the
    provider, and parse the reply.  Parse failures are excluded from the
    metric and counted; provider errors abort the run.  With a scripted
    (order-sensitive) provider use concurrency=1; the replay provider is
    keyed by request and safe at any concurrency.
    """
    train, test = split(dataset, ratio=ratio, seed=seed)
    index = build_train_index(train, codebook, radius, nbits)

    def evaluate(record):
        mol = parse_smiles(record["smiles"])
        tokens = tokenize(mol, codebook)
        fingerprint = morgan_fingerprint(mol, radius, nbits)
        hits = index.query_fingerprint(fingerprint, k) if k > 0 else []
        query_entry = IndexEntry(
            smiles=record["smiles"],
            fingerprint=fingerprint,
            label=record["label"],
            token_sequence=tokens,
            descriptors=compute_molecule_descriptors(mol).as_dict(),
        )
        query_packet = build_evidence_packet(
            query_entry, None, selection, kb, mol=mol, budget=budget
        )
        analogue_packets = [
            build_evidence_packet(
                hit.entry, hit.similarity, selection, kb, budget=budget
            )
            for hit in hits
        ]
        messages = stage3_messages(
            dataset.task_instruction, selection, query_packet,
            analogue_packets, dataset.task_kind,
        )
        response = client.chat(
            ChatRequest(
                messages=messages,
                temperature=temperature,
                max_tokens=max_tokens,
                model_name=model_name,
            )
        )
        row = {"smiles": record["smiles"], "label": record["label"]}
        try:
            parsed = parse_answer(response.content, dataset.task_kind)
        except ResponseParseError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            return row
        if dataset.task_kind == "classification":
            row["score"] = parsed.confidence / 100.0
            row["answer"] = parsed.label
            if parsed.conflict:
                row["conflict"] = True
        else:
            row["prediction"] = parsed.value
        return row

    if concurrency > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            rows = list(pool.map(evaluate, test))
    else:
        rows = [evaluate(record) for record in test]
    metric_name, value, n_scored, n_failed = _score_records(
        rows, dataset.task_kind
    )
    return EvalResult(metric_name, value, n_scored, n_failed, rows)


def run_multilabel_benchmark(datasets: dict, macro_only_kwargs=None, **kwargs):
    """One-vs-rest run per label plus the macro AUROC average.

    Labels whose test split ends up single-class are skipped (recorded as
    None) and excluded from the macro average.
    """
    del macro_only_kwargs
    results: dict = {}
    values = []
    for name, dataset in datasets.items():
        try:
            result = run_benchmark(dataset, **kwargs)
        except DegenerateLabels:
            results[name] = None
            continue
        results[name] = result
        values.append(result.value)
    macro = sum(values) / len(values) if values else float("nan")
    return results, macro


def run_knn_baseline(
    dataset: Dataset,
    weighted: bool = False,
    radius: int = 2,
    nbits: int = 2048,
    k: int = 10,
    ratio: float = DEFAULT_SPLIT_RATIO,
    seed: int = DEFAULT_SEED,
) -> EvalResult:
    """Pure retrieval baseline: similarity-averaged labels, no LLM."""
    train, test = split(dataset, ratio=ratio, seed=seed)
    if not train:
        raise EmptyPool("empty training pool")
    index = AnalogueIndex(radius=radius, nbits=nbits)
    for record in train:
        index.add(record["smiles"], record["label"])
    rows = []
    for record in test:
        fingerprint = morgan_fingerprint(
            parse_smiles(record["smiles"]), radius, nbits
        )
        prediction = knn_predict(fingerprint, index, k, weighted=weighted)
        row = {"smiles": record["smiles"], "label": record["label"]}
        if dataset.task_kind == "classification":
            row["score"] = prediction
        else:
            row["prediction"] = prediction
        rows.append(row)
    metric_name, value, n_scored, n_failed = _score_records(
        rows, dataset.task_kind
    )
    return EvalResult(metric_name, value, n_scored, n_failed, rows)


def run_prompt_baseline(
    dataset: Dataset,
    client,
    style: str = "da",
    shots: int = 0,
    radius: int = 2,
    nbits: int = 2048,
    ratio: float = DEFAULT_SPLIT_RATIO,
    seed: int = DEFAULT_SEED,
    model_name: str = "",
    temperature: float = 0.0,
    max_tokens: int = 2000,
    concurrency: int = 1,
) -> EvalResult:
    """Direct-answer / chain-of-thought baselines, zero- or few-shot.

    ``shots`` > 0 retrieves that many most-similar training molecules and
    prepends their (smiles, label) pairs to the prompt.
    """
    train, test = split(dataset, ratio=ratio, seed=seed)
    index = None
    if shots > 0:
        index = AnalogueIndex(radius=radius, nbits=nbits)
        for record in train:
            index.add(record["smiles"], record["label"])

    def evaluate(record):
        examples = []
        if index is not None:
            fingerprint = morgan_fingerprint(
                parse_smiles(record["smiles"]), radius, nbits
            )
            examples = [
                (hit.entry.smiles, hit.entry.label)
                for hit in index.query_fingerprint(fingerprint, shots)
            ]
        messages = baseline_messages(
            style, dataset.task_instruction, record["smiles"], examples,
            dataset.task_kind,
        )
        response = client.chat(
            ChatRequest(
                messages=messages,
                temperature=temperature,
                max_tokens=max_tokens,
                model_name=model_name,
            )
        )
        row = {"smiles": record["smiles"], "label": record["label"]}
        try:
            parsed = parse_answer(response.content, dataset.task_kind)
        except ResponseParseError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            return row
        if dataset.task_kind == "classification":
            row["score"] = parsed.confidence / 100.0
            row["answer"] = parsed.label
        else:
            row["prediction"] = parsed.value
        return row

    if concurrency > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            rows = list(pool.map(evaluate, test))
    else:
        rows = [evaluate(record) for record in test]
    metric_name, value, n_scored, n_failed = _score_records(
        rows, dataset.task_kind
    )
    return EvalResult(metric_name, value, n_scored, n_failed, rows)


def write_eval_result(result: EvalResult, output_dir) -> None:
    """EvalResult JSON plus one JSONL line per test record."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "eval_result.json").write_text(
        json.dumps(result.as_dict(), indent=2) + "\n"
    )
    with open(out / "per_record.jsonl", "w", encoding="utf-8") as handle:
        for row in result.per_record:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
