"""Aggregated per-token knowledge base.

Every atom instance in a corpus lands in the bucket of its discrete
token; buckets keep element mixtures, charge quantiles, hydrogen-bond
and environment ratios, and bonded-token co-occurrence counts.
Finalizing produces one flat profile record per token, including the
top bonded-neighbor tokens ranked by pointwise mutual information.

The serialized knowledge base is a bare JSON array of profile records.
"""
from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .descriptors import AtomAttributes, compute_atom_attributes
from .molgraph import ENV_TYPES, HYBRIDIZATIONS, Molecule

RESERVOIR_CAP = 100_000
RESERVOIR_SEED = 0x5EED
NEIGHBORS_TOP_N = 5

#: Sentinel returned by :func:`pmi` for a token pair never observed
#: across a bond.  Always excluded from ``neighbors_top``.
UNSEEN_PMI = float("-inf")


class MisalignedInput(ValueError):
    """Token or attribute list length does not match the atom count."""


class SchemaViolation(ValueError):
    """Knowledge-base JSON missing or mistyping a required field.

    ``path`` is a JSON-pointer to the offending location.
    """

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class CorpusStats:
    """Corpus-level token counts backing the PMI computation.

    ``pair_counts`` is keyed by unordered token pairs ``(min, max)``,
    one increment per bond.  ``co_counts`` is keyed by ordered pairs
    ``(t, t2)`` and counts atoms of token ``t`` having at least one
    bonded neighbor of token ``t2``; it backs ``co_occur_ratio``.
    """

    token_counts: dict = field(default_factory=dict)
    pair_counts: dict = field(default_factory=dict)
    total_atoms: int = 0
    total_adjacent_pairs: int = 0
    co_counts: dict = field(default_factory=dict)


def pmi(t1: int, t2: int, stats: CorpusStats) -> float:
    """log2( P(t1,t2) / (P(t1) P(t2)) ) over 1-hop bond adjacency.

    Returns the ``UNSEEN_PMI`` sentinel (negative infinity) when the
    pair never occurs across a bond.
    """
    key = (t1, t2) if t1 <= t2 else (t2, t1)
    joint = stats.pair_counts.get(key, 0)
    if joint == 0:
        return UNSEEN_PMI
    p_joint = joint / stats.total_adjacent_pairs
    p1 = stats.token_counts[t1] / stats.total_atoms
    p2 = stats.token_counts[t2] / stats.total_atoms
    return math.log2(p_joint / (p1 * p2))


def co_occur_ratio(t1: int, t2: int, stats: CorpusStats) -> float:
    """Fraction of token-``t1`` atoms with ≥1 bonded ``t2`` neighbor."""
    return stats.co_counts.get((t1, t2), 0) / stats.token_counts[t1]


def top_neighbors(
    t: int, stats: CorpusStats, n: int = NEIGHBORS_TOP_N
) -> list[dict]:
    """The ``n`` highest-PMI bonded neighbor tokens of ``t``.

    Sorted by PMI descending with ties broken by lower token id;
    unseen pairs (negative-infinity sentinel) never appear.
    """
    partners = set()
    for a, b in stats.pair_counts:
        if a == t:
            partners.add(b)
        if b == t:
            partners.add(a)
    scored = [
        (t2, pmi(t, t2, stats))
        for t2 in partners
        if stats.pair_counts.get((min(t, t2), max(t, t2)), 0) > 0
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return [
        {
            "token": t2,
            "pmi": value,
            "co_occur_ratio": co_occur_ratio(t, t2, stats),
        }
        for t2, value in scored[:n]
    ]


class _Reservoir:
    """Bounded value sample; exact below the cap, uniform above it."""

    def __init__(self, token: int, cap: int = RESERVOIR_CAP):
        self.values: list[float] = []
        self.seen = 0
        self.cap = cap
        self._rng = random.Random((RESERVOIR_SEED << 20) ^ token)

    def add(self, value: float) -> None:
        self.seen += 1
        if len(self.values) < self.cap:
            self.values.append(value)
        else:
            j = self._rng.randrange(self.seen)
            if j < self.cap:
                self.values[j] = value

    def extend(self, other: "_Reservoir") -> None:
        for v in other.values:
            self.add(v)


class _TokenBucket:
    def __init__(self, token: int):
        self.token = token
        self.count = 0
        self.symbols: Counter = Counter()
        self.hybridizations: Counter = Counter()
        self.donor = 0
        self.acceptor = 0
        self.aromatic = 0
        self.conjugated = 0
        self.env: Counter = Counter()
        self.charges = _Reservoir(token)
        self.tpsa = _Reservoir(token)
        self.degrees = _Reservoir(token)
        self.ring_sizes = _Reservoir(token)
        self.hetero_r1 = _Reservoir(token)
        self.inductive = _Reservoir(token)
        self.resonance = _Reservoir(token)

    def merge(self, other: "_TokenBucket") -> None:
        self.count += other.count
        self.symbols += other.symbols
        self.hybridizations += other.hybridizations
        self.donor += other.donor
        self.acceptor += other.acceptor
        self.aromatic += other.aromatic
        self.conjugated += other.conjugated
        self.env += other.env
        self.charges.extend(other.charges)
        self.tpsa.extend(other.tpsa)
        self.degrees.extend(other.degrees)
        self.ring_sizes.extend(other.ring_sizes)
        self.hetero_r1.extend(other.hetero_r1)
        self.inductive.extend(other.inductive)
        self.resonance.extend(other.resonance)


def _mode(counter: Counter, order: Sequence[str] | None = None) -> str:
    """Most frequent key; ties go to the earliest in ``order`` (or
    lexicographically smallest)."""
    best = max(counter.values())
    candidates = [k for k, v in counter.items() if v == best]
    if order is not None:
        return min(candidates, key=order.index)
    return min(candidates)


def _entropy_ratio(counter: Counter) -> float:
    """Shannon entropy normalized by log(#distinct); 0 for one symbol.

    Summed in sorted key order so the result is independent of the
    order the symbols were first seen in.
    """
    total = sum(counter.values())
    if len(counter) <= 1 or total == 0:
        return 0.0
    h = 0.0
    for _, v in sorted(counter.items()):
        p = v / total
        h -= p * math.log(p)
    return h / math.log(len(counter))


def _median(values: list[float]) -> float:
    if not values:
        return 0.0
    return float(np.percentile(values, 50))


def _quartiles(values: list[float]) -> tuple[float, float]:
    """(median, interquartile range) via linear interpolation."""
    if not values:
        return 0.0, 0.0
    q25, q50, q75 = np.percentile(values, [25, 50, 75])
    return float(q50), float(q75 - q25)


class KBAggregator:
    """Streaming accumulator; shards built separately can be merged."""

    def __init__(self):
        self.buckets: dict[int, _TokenBucket] = {}
        self.total_atoms = 0
        self.total_adjacent_pairs = 0
        self.pair_counts: Counter = Counter()  # unordered (t, t') per bond
        self.co_counts: Counter = Counter()  # ordered: atoms of t with t' nbr

    def add(
        self,
        mol: Molecule,
        tokens: Sequence[int],
        attrs: Sequence[AtomAttributes] | None = None,
    ) -> None:
        if len(tokens) != len(mol.atoms):
            raise MisalignedInput(
                f"{len(tokens)} tokens for {len(mol.atoms)} atoms"
            )
        if attrs is None:
            attrs = compute_atom_attributes(mol)
        elif len(attrs) != len(mol.atoms):
            raise MisalignedInput(
                f"{len(attrs)} attribute records for {len(mol.atoms)} atoms"
            )
        for i, atom in enumerate(mol.atoms):
            t = tokens[i]
            bucket = self.buckets.get(t)
            if bucket is None:
                bucket = self.buckets[t] = _TokenBucket(t)
            bucket.count += 1
            bucket.symbols[atom.element] += 1
            bucket.hybridizations[atom.hybridization] += 1
            bucket.donor += attrs[i].is_hbond_donor
            bucket.acceptor += attrs[i].is_hbond_acceptor
            bucket.aromatic += atom.aromatic
            bucket.conjugated += any(
                b.conjugated for b in mol.incident_bonds(i)
            )
            bucket.env[atom.env_type] += 1
            bucket.charges.add(attrs[i].gasteiger_charge)
            bucket.tpsa.add(attrs[i].tpsa_contrib)
            bucket.degrees.add(float(atom.degree))
            bucket.ring_sizes.add(float(atom.smallest_ring_size))
            bucket.hetero_r1.add(float(attrs[i].hetero_neighbors_r1))
            bucket.inductive.add(float(attrs[i].inductive_sign))
            bucket.resonance.add(float(attrs[i].resonance_sign))
        self.total_atoms += len(mol.atoms)
        self.total_adjacent_pairs += len(mol.bonds)
        for b in mol.bonds:
            ta, tb = tokens[b.a], tokens[b.b]
            self.pair_counts[(min(ta, tb), max(ta, tb))] += 1
        for i in range(len(mol.atoms)):
            for t2 in {tokens[j] for j in mol.neighbors(i)}:
                self.co_counts[(tokens[i], t2)] += 1

    def merge(self, other: "KBAggregator") -> None:
        for t, bucket in other.buckets.items():
            mine = self.buckets.get(t)
            if mine is None:
                self.buckets[t] = bucket
            else:
                mine.merge(bucket)
        self.total_atoms += other.total_atoms
        self.total_adjacent_pairs += other.total_adjacent_pairs
        self.pair_counts += other.pair_counts
        self.co_counts += other.co_counts

    # -- statistics ---------------------------------------------------

    def stats(self) -> CorpusStats:
        """Corpus-level counts as a read-only view (shared dicts)."""
        return CorpusStats(
            token_counts={t: b.count for t, b in self.buckets.items()},
            pair_counts=self.pair_counts,
            total_atoms=self.total_atoms,
            total_adjacent_pairs=self.total_adjacent_pairs,
            co_counts=self.co_counts,
        )

    def pmi(self, t1: int, t2: int) -> float:
        return pmi(t1, t2, self.stats())

    def neighbors_top(self, t: int, n: int = NEIGHBORS_TOP_N) -> list[dict]:
        return top_neighbors(t, self.stats(), n)

    def finalize(self) -> "KnowledgeBase":
        stats = self.stats()
        profiles = []
        for t in sorted(self.buckets):
            b = self.buckets[t]
            n = b.count
            g_q50, g_iqr = _quartiles(b.charges.values)
            symbol_dist = {
                k: v
                for k, v in sorted(
                    b.symbols.items(), key=lambda kv: (-kv[1], kv[0])
                )
            }
            env_dist = {
                e: b.env[e] for e in ENV_TYPES if b.env.get(e, 0) > 0
            }
            profiles.append(
                {
                    "token_id": t,
                    "support_count": n,
                    "primary_symbol": _mode(b.symbols),
                    "is_mixed": len(b.symbols) > 1,
                    "symbol_distribution": symbol_dist,
                    "mixture_entropy": _entropy_ratio(b.symbols),
                    "env_type": _mode(b.env, ENV_TYPES),
                    "env_distribution": env_dist,
                    "aromatic_ratio": b.aromatic / n,
                    "conjugated_ratio": b.conjugated / n,
                    "median_degree": _median(b.degrees.values),
                    "median_ring_size": _median(b.ring_sizes.values),
                    "hybridization": _mode(b.hybridizations, HYBRIDIZATIONS),
                    "electrics": {
                        "inductive": int(_median(b.inductive.values)),
                        "resonance": int(_median(b.resonance.values)),
                    },
                    "polarity": {
                        "gasteiger_q50": g_q50,
                        "gasteiger_iqr": g_iqr,
                        "tpsa_contrib_q50": _median(b.tpsa.values),
                    },
                    "hbond": {
                        "donor_ratio": b.donor / n,
                        "acceptor_ratio": b.acceptor / n,
                    },
                    "hetero_r1_median": _median(b.hetero_r1.values),
                    "neighbors_top": top_neighbors(t, stats),
                }
            )
        return KnowledgeBase(profiles=profiles)


def aggregate(
    corpus: Iterable[tuple],
) -> tuple[dict[int, dict], CorpusStats]:
    """Aggregate a stream of (molecule, tokens[, atom attributes]).

    Returns the per-token profile map and the corpus statistics the
    PMI figures were computed from.
    """
    agg = KBAggregator()
    for item in corpus:
        agg.add(*item)
    kb = agg.finalize()
    return {p["token_id"]: p for p in kb.profiles}, agg.stats()


# -- serialization ----------------------------------------------------

_SCALAR_FIELDS: tuple[tuple[str, type | tuple], ...] = (
    ("token_id", int),
    ("support_count", int),
    ("primary_symbol", str),
    ("is_mixed", bool),
    ("symbol_distribution", dict),
    ("mixture_entropy", (int, float)),
    ("env_type", str),
    ("env_distribution", dict),
    ("aromatic_ratio", (int, float)),
    ("conjugated_ratio", (int, float)),
    ("median_degree", (int, float)),
    ("median_ring_size", (int, float)),
    ("hybridization", str),
    ("electrics", dict),
    ("polarity", dict),
    ("hbond", dict),
    ("hetero_r1_median", (int, float)),
    ("neighbors_top", list),
)

_GROUP_FIELDS = {
    "electrics": ("inductive", "resonance"),
    "polarity": ("gasteiger_q50", "gasteiger_iqr", "tpsa_contrib_q50"),
    "hbond": ("donor_ratio", "acceptor_ratio"),
}

_NEIGHBOR_FIELDS = ("token", "pmi", "co_occur_ratio")


def _check_type(value, expected, path: str, name: str) -> None:
    if expected is int and isinstance(value, bool):
        raise SchemaViolation(f"field '{name}' must be an integer", path)
    if expected is bool:
        if not isinstance(value, bool):
            raise SchemaViolation(f"field '{name}' must be a boolean", path)
        return
    if isinstance(expected, tuple):
        if isinstance(value, bool) or not isinstance(value, expected):
            raise SchemaViolation(f"field '{name}' must be a number", path)
        return
    if not isinstance(value, expected):
        kind = {int: "an integer", str: "a string", dict: "an object",
                list: "an array"}[expected]
        raise SchemaViolation(f"field '{name}' must be {kind}", path)


def _validate_profile(prof, base: str) -> None:
    if not isinstance(prof, dict):
        raise SchemaViolation("profile must be an object", base)
    for name, expected in _SCALAR_FIELDS:
        if name not in prof:
            raise SchemaViolation(
                f"missing field '{name}'", f"{base}/{name}"
            )
        _check_type(prof[name], expected, f"{base}/{name}", name)
    for group, members in _GROUP_FIELDS.items():
        for member in members:
            path = f"{base}/{group}/{member}"
            if member not in prof[group]:
                raise SchemaViolation(f"missing field '{member}'", path)
            _check_type(prof[group][member], (int, float), path, member)
    for dist in ("symbol_distribution", "env_distribution"):
        for key, value in prof[dist].items():
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaViolation(
                    "count must be an integer", f"{base}/{dist}/{key}"
                )
    for i, item in enumerate(prof["neighbors_top"]):
        path = f"{base}/neighbors_top/{i}"
        if not isinstance(item, dict):
            raise SchemaViolation("neighbor must be an object", path)
        for member in _NEIGHBOR_FIELDS:
            if member not in item:
                raise SchemaViolation(
                    f"missing field '{member}'", f"{path}/{member}"
                )


@dataclass
class KnowledgeBase:
    """Finalized per-token profile records.

    Profiles are kept as plain dicts so unknown JSON fields survive a
    load/save cycle untouched; only the known fields are interpreted.
    """

    profiles: list[dict]

    def __post_init__(self):
        self._by_token = {p["token_id"]: p for p in self.profiles}

    def __len__(self) -> int:
        return len(self.profiles)

    def __contains__(self, token: int) -> bool:
        return token in self._by_token

    def profile(self, token: int) -> dict:
        return self._by_token[token]

    def get(self, token: int) -> dict | None:
        return self._by_token.get(token)

    @property
    def tokens(self) -> list[int]:
        return [p["token_id"] for p in self.profiles]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.profiles, indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeBase":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"not valid JSON: {exc}", "/") from exc
        return cls.from_document(doc)

    @classmethod
    def from_document(cls, doc) -> "KnowledgeBase":
        if not isinstance(doc, list):
            raise SchemaViolation(
                "knowledge base must be an array of profiles", "/"
            )
        for i, prof in enumerate(doc):
            _validate_profile(prof, f"/{i}")
        return cls(profiles=doc)


def save_kb(kb: KnowledgeBase, path: str | Path) -> None:
    kb.save(path)


def load_kb(path: str | Path) -> KnowledgeBase:
    return KnowledgeBase.load(path)


def build_knowledge_base(items: Iterable[tuple]) -> KnowledgeBase:
    """Aggregate (molecule, tokens[, attrs]) items into a finalized KB."""
    agg = KBAggregator()
    for item in items:
        agg.add(*item)
    return agg.finalize()
