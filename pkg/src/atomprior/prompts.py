"""Prompt rendering for the staged pipeline, plus parsers for model replies.

Templates live as text assets under ``templates/``; every renderer is a pure
function of its inputs, so repeated calls yield byte-identical strings.  Slot
substitution uses plain ``str.replace`` because some templates contain literal
JSON braces that ``str.format`` would choke on.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .atomcards import (
    ATOM_FEATURE_NAMES,
    MOLECULE_FEATURE_NAMES,
    render_label,
    render_molecule_features,
)

NO_ANALOGUES_SENTINEL = "No similar examples available"


class ResponseParseError(ValueError):
    """A model reply could not be turned into a structured result."""


class NoJsonFound(ResponseParseError):
    pass


class EmptySelection(ResponseParseError):
    pass


class MissingAnswerTag(ResponseParseError):
    pass


class MissingConfidenceTag(ResponseParseError):
    pass


class UnparsableNumber(ResponseParseError):
    pass


def _template(name: str) -> str:
    path = resources.files("atomprior").joinpath("templates", f"{name}.txt")
    text = path.read_text(encoding="utf-8")
    # assets end with a single newline for editor hygiene; it is not part of
    # the rendered prompt
    if text.endswith("\n"):
        text = text[:-1]
    return text


def _fill(template: str, slots: dict) -> str:
    out = template
    for key, value in slots.items():
        out = out.replace("{" + key + "}", value)
    return out


@dataclass
class FeatureSelection:
    """Validated output of the feature-selection dialogue."""

    atom_features: list
    molecule_features: list
    feature_descriptions: dict
    warnings: list = field(default_factory=list)


@dataclass
class ParsedAnswer:
    """Structured form of a property-prediction reply.

    Classification fills ``label`` and ``confidence``; regression fills
    ``value``.  ``conflict`` marks a yes/no label whose confidence sits on
    the wrong side of 50 — the answer is kept and scoring uses the
    confidence regardless.
    """

    analysis: str | None
    label: str | None = None
    value: float | None = None
    confidence: int | None = None
    conflict: bool = False
    warnings: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Stage I


def stage1_messages(task_instruction: str) -> list:
    """Three dialogue rounds, each a list of {'role', 'content'} dicts.

    The caller threads the assistant reply of each round into the next
    call's message history; this function only renders the fresh system
    and user turns for every round.
    """
    if not task_instruction:
        raise ValueError("task_instruction must be non-empty")
    rounds = []
    for n in (1, 2, 3):
        system = _template(f"stage1_round{n}_system")
        user = _fill(
            _template(f"stage1_round{n}_user"),
            {"instruction": task_instruction},
        )
        rounds.append(
            [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ]
        )
    return rounds


def _extract_json_object(text: str):
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        return json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        break
        start = text.find("{", start + 1)
    raise NoJsonFound("no parseable JSON object in response")


def _screen_names(raw, allowed, kind: str, warnings: list) -> list:
    names = []
    for name in raw or []:
        if name in allowed:
            if name not in names:
                names.append(name)
        else:
            warnings.append(f"dropped unknown {kind} feature {name!r}")
    return names


def parse_feature_selection(response: str) -> FeatureSelection:
    """Extract and validate the JSON feature selection from a reply.

    Tolerates surrounding prose and markdown fences; unknown feature names
    are dropped with a warning, never passed through.
    """
    data = _extract_json_object(response)
    if not isinstance(data, dict):
        raise NoJsonFound("top-level JSON value is not an object")
    warnings: list = []
    atoms = _screen_names(
        data.get("atom_features"), ATOM_FEATURE_NAMES, "atom", warnings
    )
    mols = _screen_names(
        data.get("molecule_features"), MOLECULE_FEATURE_NAMES, "molecule",
        warnings,
    )
    if not atoms and not mols:
        raise EmptySelection("no valid features selected")
    raw_desc = data.get("feature_descriptions") or {}
    descriptions = {}
    for name in atoms + mols:
        text = raw_desc.get(name)
        if not isinstance(text, str) or not text:
            warnings.append(f"missing description for {name!r}")
            text = ""
        descriptions[name] = text
    for extra in raw_desc:
        if extra not in descriptions:
            warnings.append(f"dropped description for unselected {extra!r}")
    return FeatureSelection(
        atom_features=atoms,
        molecule_features=mols,
        feature_descriptions=descriptions,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# Stage III


def _packet_fields(packet) -> dict:
    cards = "\n".join(card.render() for card in packet.atom_cards)
    return {
        "smiles": packet.smiles,
        "query_tokens": packet.token_sequence_rendered,
        "atom_features": cards,
        "molecule_features": render_molecule_features(
            packet.molecule_features
        ),
    }


def stage3_prompt(
    task_instruction: str,
    selection: FeatureSelection,
    query_packet,
    analogue_packets,
    task_kind: str = "classification",
) -> str:
    """Render the user turn of the final inference prompt."""
    if analogue_packets:
        similar = "\n\n".join(p.render() for p in analogue_packets)
    else:
        similar = NO_ANALOGUES_SENTINEL
    slots = {
        "instruction": task_instruction,
        "feature_descriptions": json.dumps(
            selection.feature_descriptions, ensure_ascii=False, indent=2
        ),
        "similar_analysis": similar,
    }
    slots.update(_packet_fields(query_packet))
    name = "stage3_user" if task_kind == "classification" else \
        "stage3_regression_user"
    return _fill(_template(name), slots)


def stage3_messages(
    task_instruction: str,
    selection: FeatureSelection,
    query_packet,
    analogue_packets,
    task_kind: str = "classification",
) -> list:
    system = "stage3_system" if task_kind == "classification" else \
        "stage3_regression_system"
    return [
        {"role": "system", "content": _template(system)},
        {
            "role": "user",
            "content": stage3_prompt(
                task_instruction, selection, query_packet, analogue_packets,
                task_kind,
            ),
        },
    ]


# ---------------------------------------------------------------------------
# Baselines


def _render_examples(examples) -> str:
    lines = []
    for n, (smiles, label) in enumerate(examples, start=1):
        lines.append(f"Example {n}: SMILES: {smiles} Answer: {render_label(label)}")
    return "\n".join(lines)


def baseline_prompt(
    style: str,
    task_instruction: str,
    smiles: str,
    examples=(),
    task_kind: str = "classification",
) -> str:
    """Render a direct-answer or chain-of-thought baseline user turn.

    ``examples`` holds retrieved (smiles, label) pairs; a non-empty list
    makes the prompt few-shot, rendered one example per line above the task.
    """
    if style not in ("da", "cot"):
        raise ValueError(f"unknown baseline style {style!r}")
    suffix = "" if task_kind == "classification" else "_regression"
    body = _fill(
        _template(f"baseline_{style}{suffix}_user"),
        {
            "TASK_NAME": task_instruction,
            "QUESTION": task_instruction,
            "SMILES": smiles,
        },
    )
    if examples:
        return _render_examples(examples) + "\n\n" + body
    return body


def baseline_messages(
    style: str,
    task_instruction: str,
    smiles: str,
    examples=(),
    task_kind: str = "classification",
) -> list:
    suffix = "" if task_kind == "classification" else "_regression"
    return [
        {
            "role": "system",
            "content": _template(f"baseline_{style}{suffix}_system"),
        },
        {
            "role": "user",
            "content": baseline_prompt(
                style, task_instruction, smiles, examples, task_kind
            ),
        },
    ]


# ---------------------------------------------------------------------------
# Answer parsing

_ANALYSIS_RE = re.compile(r"<analysis>(.*?)</analysis>", re.DOTALL)
_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_CONFIDENCE_RE = re.compile(r"<confidence>(.*?)</confidence>", re.DOTALL)
_PREDICTION_RE = re.compile(r"<prediction>(.*?)</prediction>", re.DOTALL)


def _parse_confidence(raw: str, warnings: list) -> int:
    text = raw.strip().rstrip("%")
    try:
        value = int(text)
    except ValueError:
        try:
            value = int(round(float(text)))
        except ValueError:
            raise UnparsableNumber(
                f"confidence {raw!r} is not a number"
            ) from None
    if value < 0 or value > 100:
        clamped = max(0, min(100, value))
        warnings.append(f"confidence {value} clamped to {clamped}")
        value = clamped
    return value


def parse_answer(response: str, task_kind: str = "classification") -> ParsedAnswer:
    """Parse a prediction reply into its tags.

    Raises MissingAnswerTag / MissingConfidenceTag / UnparsableNumber on
    malformed replies; callers count such records as failed rather than
    imputing a score.
    """
    analysis_match = _ANALYSIS_RE.search(response)
    analysis = analysis_match.group(1).strip() if analysis_match else None
    warnings: list = []

    if task_kind == "regression":
        match = _PREDICTION_RE.search(response)
        if not match:
            raise MissingAnswerTag("no <prediction> tag in response")
        try:
            value = float(match.group(1).strip())
        except ValueError:
            raise UnparsableNumber(
                f"prediction {match.group(1)!r} is not a number"
            ) from None
        return ParsedAnswer(analysis=analysis, value=value, warnings=warnings)

    label = None
    for match in _ANSWER_RE.finditer(response):
        candidate = match.group(1).strip().lower()
        if candidate in ("yes", "no"):
            label = candidate
            break
    if label is None:
        raise MissingAnswerTag("no yes/no <answer> tag in response")
    conf_match = _CONFIDENCE_RE.search(response)
    if not conf_match:
        raise MissingConfidenceTag("no <confidence> tag in response")
    confidence = _parse_confidence(conf_match.group(1), warnings)
    conflict = (label == "yes" and confidence <= 50) or (
        label == "no" and confidence >= 50
    )
    if conflict:
        warnings.append(
            f"label {label!r} conflicts with confidence {confidence}"
        )
    return ParsedAnswer(
        analysis=analysis,
        label=label,
        confidence=confidence,
        conflict=conflict,
        warnings=warnings,
    )
