"""Command-line surface: build-kb, index, stage1, infer, eval, baseline.

Every subcommand reads an optional config file plus dotted-key flag
overrides (flags win), writes its artifacts under ``paths.output_dir``,
and echoes the effective configuration there as ``config.txt``.  Exit
codes: 0 success, 1 runtime failure, 2 usage error (including an
unparseable query SMILES for ``infer``).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .atomcards import build_evidence_packet
from .config import (
    ConfigError,
    PipelineConfig,
    iter_keys,
    load_config,
    render_config,
)
from .descriptors import compute_molecule_descriptors
from .evaluation import (
    build_train_index,
    load_dataset,
    run_benchmark,
    run_knn_baseline,
    run_prompt_baseline,
    split,
    write_eval_result,
)
from .knowledge_base import build_knowledge_base
from .llm_client import (
    ChatRequest,
    DeterministicClock,
    LLMClient,
    MockProvider,
    HttpProvider,
    ReplayProvider,
    run_dialogue,
)
from .molgraph import SmilesError, parse_smiles
from .prompts import (
    FeatureSelection,
    ResponseParseError,
    parse_answer,
    parse_feature_selection,
    stage1_messages,
    stage3_messages,
)
from .retrieval import AnalogueIndex, IndexEntry, morgan_fingerprint
from .knowledge_base import KnowledgeBase
from .tokenizer import Codebook, tokenize

USAGE_EXIT = 2
RUNTIME_EXIT = 1


class CliError(RuntimeError):
    """Runtime failure with a user-facing message (exit 1)."""


def _config_epilog() -> str:
    lines = ["config keys (file or flag form, flags win):"]
    for key, _, display, help_text in iter_keys():
        shown = display if display != "" else "''"
        lines.append(f"  {key:<22} {help_text} (default: {shown})")
    return "\n".join(lines)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="config file path")
    for key, _, display, help_text in iter_keys():
        shown = display if display != "" else "''"
        parser.add_argument(
            f"--{key}", metavar="VALUE", default=None,
            help=f"{help_text} (default: {shown})",
        )


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--mock", metavar="SCRIPT",
        help="scripted provider: JSON file with a list of reply strings "
        "(forces concurrency 1)",
    )
    parser.add_argument(
        "--replay", metavar="JOURNAL",
        help="replay provider: serve responses recorded in a journal file",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atomprior",
        description="Atom-token priors, analogue retrieval, and staged "
        "LLM prompting for molecular property prediction.",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "build-kb", help="aggregate a SMILES corpus into the token KB",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _add_common(p)

    p = sub.add_parser(
        "index", help="fingerprint the training split into an analogue index",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _add_common(p)

    p = sub.add_parser(
        "stage1", help="run the three-round feature-selection dialogue",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _add_common(p)
    _add_provider_flags(p)

    p = sub.add_parser(
        "infer", help="score one SMILES end-to-end and print the answer",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("smiles", help="query molecule")
    _add_common(p)
    _add_provider_flags(p)
    p.add_argument("--selection", help="feature-selection JSON path")

    p = sub.add_parser(
        "eval", help="run the full retrieval-augmented benchmark",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _add_common(p)
    _add_provider_flags(p)
    p.add_argument("--selection", help="feature-selection JSON path")

    p = sub.add_parser(
        "baseline", help="run a no-KB baseline",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("style", choices=["knn", "wknn", "da", "cot"])
    p.add_argument("shots", choices=["zs", "fs"])
    _add_common(p)
    _add_provider_flags(p)

    return parser


def _overrides_from(args: argparse.Namespace) -> dict:
    raw = vars(args)
    return {
        key: raw[key]
        for key, _, _, _ in iter_keys()
        if raw.get(key) is not None
    }


def _prepare(args: argparse.Namespace) -> tuple[PipelineConfig, Path]:
    config = load_config(args.config, _overrides_from(args))
    output_dir = Path(config.paths.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / "config.txt").write_text(render_config(config))
    return config, output_dir


def _make_client(config, args, output_dir: Path) -> LLMClient:
    mock_path = getattr(args, "mock", None)
    replay_path = getattr(args, "replay", None)
    if mock_path and replay_path:
        raise CliError("--mock and --replay are mutually exclusive")
    if mock_path:
        script = json.loads(Path(mock_path).read_text())
        if not isinstance(script, list):
            raise CliError("--mock file must hold a JSON list of strings")
        provider = MockProvider(script)
    elif replay_path:
        provider = ReplayProvider.from_journal(replay_path)
    else:
        if not config.llm.endpoint:
            raise CliError(
                "no provider: set llm.endpoint or pass --mock/--replay"
            )
        provider = HttpProvider(config.llm.endpoint, config.llm.credential_env)
    scripted = bool(mock_path or replay_path)
    return LLMClient(
        provider,
        journal_path=output_dir / "journal.jsonl",
        sleep=(lambda _: None) if scripted else time.sleep,
        clock=DeterministicClock() if scripted else time.time,
    )


def _effective_concurrency(config, args) -> int:
    if getattr(args, "mock", None):
        return 1  # scripted replies are order-sensitive
    return config.llm.concurrency


def _require(path: str, what: str) -> Path:
    if not path:
        raise CliError(f"config gives no path for the {what}")
    resolved = Path(path)
    if not resolved.exists():
        raise CliError(f"{what} not found: {resolved}")
    return resolved


def _load_codebook(config) -> Codebook:
    path = config.paths.codebook
    if path and Path(path).exists():
        return Codebook.load(path)
    codebook = Codebook.random(seed=config.split.seed)
    if path:
        codebook.save(path)
    return codebook


def _load_selection(config, args) -> FeatureSelection:
    explicit = getattr(args, "selection", None)
    path = Path(explicit) if explicit else (
        Path(config.paths.output_dir) / "feature_selection.json"
    )
    if not path.exists():
        raise CliError(f"feature selection not found: {path}")
    doc = json.loads(path.read_text())
    return FeatureSelection(
        atom_features=doc["atom_features"],
        molecule_features=doc["molecule_features"],
        feature_descriptions=doc["feature_descriptions"],
        warnings=doc.get("warnings", []),
    )


def _load_task_dataset(config):
    return load_dataset(
        _require(config.paths.dataset, "dataset"),
        task_kind=config.task.kind,
        task_instruction=config.task.instruction,
        split_kind=config.split.kind,
    )


def cmd_build_kb(config, output_dir: Path) -> int:
    corpus_path = _require(config.paths.corpus, "corpus")
    codebook = _load_codebook(config)
    lines = [
        line.strip()
        for line in corpus_path.read_text().splitlines()
        if line.strip()
    ]
    pairs = []
    dropped = 0
    for line in lines:
        try:
            mol = parse_smiles(line)
        except SmilesError:
            dropped += 1
            continue
        pairs.append((mol, tokenize(mol, codebook)))
    if lines and dropped * 2 > len(lines):
        raise CliError(
            f"corpus mostly unparseable: {dropped}/{len(lines)} lines failed"
        )
    kb = build_knowledge_base(pairs)
    kb_path = config.paths.kb or str(output_dir / "kb.json")
    kb.save(kb_path)
    stats = {
        "lines": len(lines),
        "molecules": len(pairs),
        "dropped": dropped,
        "tokens_seen": len(kb),
        "atoms": sum(len(tokens) for _, tokens in pairs),
    }
    (output_dir / "build_kb_stats.json").write_text(
        json.dumps(stats, indent=2) + "\n"
    )
    print(
        f"knowledge base: {stats['tokens_seen']} tokens from "
        f"{stats['atoms']} atoms across {stats['molecules']} molecules "
        f"({dropped} lines dropped) -> {kb_path}"
    )
    return 0


def cmd_index(config, output_dir: Path) -> int:
    dataset = _load_task_dataset(config)
    codebook = _load_codebook(config)
    train, _ = split(dataset, ratio=config.split.ratio, seed=config.split.seed)
    index = build_train_index(
        train, codebook, config.retrieval.radius, config.retrieval.nbits
    )
    index_path = config.paths.index or str(output_dir / "index.jsonl")
    index.save(index_path)
    print(f"analogue index: {len(index)} training molecules -> {index_path}")
    return 0


def cmd_stage1(config, output_dir: Path, client: LLMClient) -> int:
    if not config.task.instruction:
        raise CliError("task.instruction is required for stage1")
    rounds = stage1_messages(config.task.instruction)
    responses, _ = run_dialogue(
        client, rounds,
        temperature=config.llm.temperature,
        max_tokens=config.llm.max_tokens,
        model_name=config.llm.model,
    )
    final = responses[-1].content
    try:
        selection = parse_feature_selection(final)
    except ResponseParseError as exc:
        raw_path = output_dir / "stage1_raw_response.txt"
        raw_path.write_text(final)
        print(
            f"feature selection failed ({type(exc).__name__}: {exc}); "
            f"raw response saved to {raw_path}",
            file=sys.stderr,
        )
        return RUNTIME_EXIT
    out_path = output_dir / "feature_selection.json"
    out_path.write_text(
        json.dumps(
            {
                "atom_features": selection.atom_features,
                "molecule_features": selection.molecule_features,
                "feature_descriptions": selection.feature_descriptions,
                "warnings": selection.warnings,
            },
            indent=2,
            ensure_ascii=False,
        )
        + "\n"
    )
    print(
        f"selected {len(selection.atom_features)} atom and "
        f"{len(selection.molecule_features)} molecule features "
        f"-> {out_path}"
    )
    return 0


def cmd_infer(config, output_dir: Path, client: LLMClient, args) -> int:
    try:
        mol = parse_smiles(args.smiles)
    except SmilesError as exc:
        print(f"unparseable SMILES: {exc}", file=sys.stderr)
        return USAGE_EXIT
    codebook = _load_codebook(config)
    kb = KnowledgeBase.load(_require(config.paths.kb, "knowledge base"))
    selection = _load_selection(config, args)
    index = AnalogueIndex.load(_require(config.paths.index, "analogue index"))
    tokens = tokenize(mol, codebook)
    fingerprint = morgan_fingerprint(
        mol, config.retrieval.radius, config.retrieval.nbits
    )
    hits = (
        index.query_fingerprint(fingerprint, config.retrieval.k)
        if config.retrieval.k > 0
        else []
    )
    hits = [h for h in hits if h.entry.smiles != args.smiles]
    query_entry = IndexEntry(
        smiles=args.smiles,
        fingerprint=fingerprint,
        label=None,
        token_sequence=tokens,
        descriptors=compute_molecule_descriptors(mol).as_dict(),
    )
    query_packet = build_evidence_packet(
        query_entry, None, selection, kb, mol=mol,
        budget=config.filter.budget,
    )
    analogue_packets = [
        build_evidence_packet(
            hit.entry, hit.similarity, selection, kb,
            budget=config.filter.budget,
        )
        for hit in hits
    ]
    messages = stage3_messages(
        config.task.instruction or "Predict the property of the molecule.",
        selection, query_packet, analogue_packets, config.task.kind,
    )
    response = client.chat(
        ChatRequest(
            messages=messages,
            temperature=config.llm.temperature,
            max_tokens=config.llm.max_tokens,
            model_name=config.llm.model,
        )
    )
    parsed = parse_answer(response.content, config.task.kind)
    if config.task.kind == "classification":
        print(f"answer: {parsed.label}  confidence: {parsed.confidence}")
    else:
        print(f"prediction: {parsed.value}")
    return 0


def cmd_eval(config, output_dir: Path, client: LLMClient, args) -> int:
    dataset = _load_task_dataset(config)
    codebook = _load_codebook(config)
    kb = KnowledgeBase.load(_require(config.paths.kb, "knowledge base"))
    selection = _load_selection(config, args)
    result = run_benchmark(
        dataset, codebook, kb, client, selection,
        radius=config.retrieval.radius,
        nbits=config.retrieval.nbits,
        k=config.retrieval.k,
        budget=config.filter.budget,
        ratio=config.split.ratio,
        seed=config.split.seed,
        model_name=config.llm.model,
        temperature=config.llm.temperature,
        max_tokens=config.llm.max_tokens,
        concurrency=_effective_concurrency(config, args),
    )
    write_eval_result(result, output_dir)
    print(
        f"{result.metric_name}: {result.value:.4f} "
        f"({result.n_scored} scored, {result.n_failed} failed)"
    )
    return 0


def cmd_baseline(config, output_dir: Path, args) -> int:
    dataset = _load_task_dataset(config)
    if args.style in ("knn", "wknn"):
        result = run_knn_baseline(
            dataset,
            weighted=args.style == "wknn",
            radius=config.retrieval.radius,
            nbits=config.retrieval.nbits,
            k=config.retrieval.k,
            ratio=config.split.ratio,
            seed=config.split.seed,
        )
    else:
        client = _make_client(config, args, output_dir)
        result = run_prompt_baseline(
            dataset, client,
            style=args.style,
            shots=config.retrieval.k if args.shots == "fs" else 0,
            radius=config.retrieval.radius,
            nbits=config.retrieval.nbits,
            ratio=config.split.ratio,
            seed=config.split.seed,
            model_name=config.llm.model,
            temperature=config.llm.temperature,
            max_tokens=config.llm.max_tokens,
            concurrency=_effective_concurrency(config, args),
        )
    write_eval_result(result, output_dir)
    print(
        f"{args.style}-{args.shots} {result.metric_name}: "
        f"{result.value:.4f} ({result.n_scored} scored, "
        f"{result.n_failed} failed)"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config, output_dir = _prepare(args)
        if args.command == "build-kb":
            return cmd_build_kb(config, output_dir)
        if args.command == "index":
            return cmd_index(config, output_dir)
        if args.command == "stage1":
            client = _make_client(config, args, output_dir)
            return cmd_stage1(config, output_dir, client)
        if args.command == "infer":
            client = _make_client(config, args, output_dir)
            return cmd_infer(config, output_dir, client, args)
        if args.command == "eval":
            client = _make_client(config, args, output_dir)
            return cmd_eval(config, output_dir, client, args)
        if args.command == "baseline":
            return cmd_baseline(config, output_dir, args)
        raise CliError(f"unknown command: {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (CliError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
