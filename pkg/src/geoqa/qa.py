"""QA pair authoring, prompt construction, and answer comparison.

Questions are grounded in a context: every '@'-referenced place name
must resolve in the context's place index, and gold answers are typed
by the declared format. Pairs are immutable once created; ids are
content-addressed so identical drafts get identical ids on every run.
"""

from __future__ import annotations

import enum
import hashlib
import re
import string
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable

from .context import Context, render_formatted, render_structured
from .errors import HookFailure, InvalidGold, MissingOptions, UnresolvedPlace
from .jsonutil import canonical_dumps

PROMPT_TEMPLATE_VERSION = "v1"

_TERMINAL_PUNCT = re.compile(r"[?.!,;:]+$")


class AnswerFormat(str, enum.Enum):
    YES_NO = "YesNo"
    SINGLE_CHOICE = "SingleChoice"
    MULTIPLE_CHOICE = "MultipleChoice"
    OPEN_ENDED = "OpenEnded"


CHOICE_FORMATS = (AnswerFormat.SINGLE_CHOICE, AnswerFormat.MULTIPLE_CHOICE)


@dataclass(frozen=True)
class QADraft:
    question: str
    format: AnswerFormat
    gold: object
    options: tuple[str, ...] = ()
    categories: tuple[str, ...] = ()


@dataclass(frozen=True)
class QAPair:
    id: str
    context_id: str
    question: str
    format: AnswerFormat
    gold: object
    options: tuple[str, ...] = ()
    categories: tuple[str, ...] = ()


@dataclass(frozen=True)
class PromptBundle:
    context_rendering: str
    prompt_text: str
    qa_ref: str


def find_place_references(text: str, known_names: list[str]) -> tuple[list[str], list[str]]:
    """Extract '@'-references from text.

    At each '@', the longest known display name starting there (ignoring
    case) wins. With no match, the candidate runs to the next '@' or
    newline with trailing punctuation stripped, then gets reported as
    unresolved.
    """
    resolved: list[str] = []
    unresolved: list[str] = []
    by_length = sorted(known_names, key=len, reverse=True)
    i = 0
    while True:
        i = text.find("@", i)
        if i < 0:
            break
        rest = text[i + 1 :]
        match = next(
            (n for n in by_length if rest[: len(n)].casefold() == n.casefold()), None
        )
        if match is not None:
            resolved.append(match)
            i += 1 + len(match)
            continue
        stop = len(rest)
        for sep in ("@", "\n"):
            pos = rest.find(sep)
            if pos >= 0:
                stop = min(stop, pos)
        candidate = rest[:stop]
        cut = re.search(r"[?.!,;:]", candidate)
        if cut:
            candidate = candidate[: cut.start()]
        candidate = _TERMINAL_PUNCT.sub("", candidate).strip()
        if candidate:
            unresolved.append(candidate)
        i += 1
    return resolved, unresolved


def _gold_texts(fmt: AnswerFormat, gold: object, options: tuple[str, ...]) -> list[str]:
    """The text content the gold answer is made of (for '@' checks and
    the answer-in-context property). Yes/No carries no context fact."""
    if fmt is AnswerFormat.OPEN_ENDED:
        return [str(gold)]
    if fmt is AnswerFormat.SINGLE_CHOICE:
        return [options[gold]]
    if fmt is AnswerFormat.MULTIPLE_CHOICE:
        return [options[i] for i in gold]
    return []


def _validate_gold(draft: QADraft) -> object:
    fmt = draft.format
    gold = draft.gold
    if fmt in CHOICE_FORMATS:
        if len(draft.options) < 2:
            raise MissingOptions(f"{fmt.value} requires at least 2 options")
    elif draft.options:
        raise InvalidGold(f"{fmt.value} takes no options")
    if fmt is AnswerFormat.YES_NO:
        if gold not in ("Yes", "No"):
            raise InvalidGold(f"YesNo gold must be 'Yes' or 'No', got {gold!r}")
        return gold
    if fmt is AnswerFormat.SINGLE_CHOICE:
        if not isinstance(gold, int) or isinstance(gold, bool):
            raise InvalidGold(f"SingleChoice gold must be an option index, got {gold!r}")
        if not (0 <= gold < len(draft.options)):
            raise InvalidGold(f"gold index {gold} out of range for {len(draft.options)} options")
        return gold
    if fmt is AnswerFormat.MULTIPLE_CHOICE:
        try:
            indices = tuple(sorted(set(int(i) for i in gold)))
        except (TypeError, ValueError):
            raise InvalidGold(f"MultipleChoice gold must be option indices, got {gold!r}")
        if not indices:
            raise InvalidGold("MultipleChoice gold must be non-empty")
        if any(not (0 <= i < len(draft.options)) for i in indices):
            raise InvalidGold(f"gold indices {indices} out of range")
        return indices
    if not isinstance(gold, str) or not gold.strip():
        raise InvalidGold(f"OpenEnded gold must be non-empty text, got {gold!r}")
    return gold


def create_qa(ctx: Context, draft: QADraft) -> QAPair:
    """Validate a draft against the context and mint an immutable pair.

    The id is a digest of (context, content): editing produces a new id,
    re-creating the same draft reproduces the same id.
    """
    gold = _validate_gold(draft)
    known = list(ctx.place_index)
    texts = [draft.question] + _gold_texts(draft.format, gold, draft.options)
    for text in texts:
        _, unresolved = find_place_references(text, known)
        if unresolved:
            raise UnresolvedPlace(unresolved[0])
    digest = hashlib.sha256(
        canonical_dumps(
            {
                "context_id": ctx.id,
                "question": draft.question,
                "format": draft.format.value,
                "options": list(draft.options),
                "gold": list(gold) if isinstance(gold, tuple) else gold,
                "categories": list(draft.categories),
            }
        ).encode("utf-8")
    ).hexdigest()
    return QAPair(
        id=f"qa-{digest[:12]}",
        context_id=ctx.id,
        question=draft.question,
        format=draft.format,
        gold=gold,
        options=draft.options,
        categories=draft.categories,
    )


_INSTRUCTIONS = {
    AnswerFormat.YES_NO: "Answer Yes or No.",
    AnswerFormat.SINGLE_CHOICE: "Answer with the number of the correct option.",
    AnswerFormat.MULTIPLE_CHOICE: (
        "Answer with the numbers of all correct options, separated by commas."
    ),
    AnswerFormat.OPEN_ENDED: "Answer concisely using facts from the context.",
}


@lru_cache(maxsize=None)
def _prompt_template(version: str = PROMPT_TEMPLATE_VERSION) -> string.Template:
    text = (
        resources.files("geoqa")
        .joinpath(f"templates/prompt/{version}/qa.txt")
        .read_text("utf-8")
    )
    return string.Template(text)


def build_prompt(ctx: Context, pair: QAPair, rendering: str = "formatted") -> PromptBundle:
    """Embed exactly one context rendering and one question. Options are
    numbered from 1, matching what compare_answer expects back."""
    if pair.context_id != ctx.id:
        raise ValueError(f"qa {pair.id} belongs to context {pair.context_id}, not {ctx.id}")
    if rendering not in ("structured", "formatted"):
        raise ValueError(f"rendering must be structured or formatted, got {rendering!r}")
    context_text = render_structured(ctx) if rendering == "structured" else render_formatted(ctx)
    tail = ""
    if pair.options:
        tail += "Options:\n" + "\n".join(
            f"{i}. {opt}" for i, opt in enumerate(pair.options, start=1)
        )
        tail += "\n"
    tail += _INSTRUCTIONS[pair.format]
    prompt = _prompt_template().substitute(
        context=context_text, question=pair.question, tail=tail
    )
    return PromptBundle(context_rendering=rendering, prompt_text=prompt, qa_ref=pair.id)


def _norm(text: str) -> str:
    return " ".join(text.split()).casefold()


def compare_answer(pair: QAPair, model_response: str) -> str:
    """Verdict: ``correct``, ``incorrect``, or ``unparseable``.

    Choice answers are read as a leading 1-based option number (an
    optional word like "Option" may precede it) or as exact option text;
    Yes/No reads a leading yes/no; OpenEnded is normalized exact match.
    """
    if pair.format is AnswerFormat.YES_NO:
        m = re.match(r"\s*(yes|no)\b", model_response, re.IGNORECASE)
        if not m:
            return "unparseable"
        answer = "Yes" if m.group(1).lower() == "yes" else "No"
        return "correct" if answer == pair.gold else "incorrect"

    if pair.format is AnswerFormat.SINGLE_CHOICE:
        index = _extract_single_choice(pair, model_response)
        if index is None:
            return "unparseable"
        return "correct" if index == pair.gold else "incorrect"

    if pair.format is AnswerFormat.MULTIPLE_CHOICE:
        indices = _extract_multi_choice(pair, model_response)
        if indices is None:
            return "unparseable"
        return "correct" if indices == set(pair.gold) else "incorrect"

    return "correct" if _norm(model_response) == _norm(str(pair.gold)) else "incorrect"


def _extract_single_choice(pair: QAPair, response: str) -> int | None:
    m = re.match(r"\s*(?:option\s*)?(\d+)\b", response, re.IGNORECASE)
    if m:
        number = int(m.group(1))
        return number - 1 if 1 <= number <= len(pair.options) else -1
    normalized = _norm(response)
    for i, option in enumerate(pair.options):
        if normalized == _norm(option):
            return i
    return None


def _extract_multi_choice(pair: QAPair, response: str) -> set[int] | None:
    first_line = response.strip().splitlines()[0] if response.strip() else ""
    numbers = re.findall(r"\d+", first_line)
    if numbers:
        indices = {int(n) - 1 for n in numbers}
        return {i if 0 <= i < len(pair.options) else -1 for i in indices}
    parts = [p for p in re.split(r",|;| and ", first_line, flags=re.IGNORECASE) if p.strip()]
    indices = set()
    for part in parts:
        normalized = _norm(part)
        matched = next(
            (i for i, opt in enumerate(pair.options) if _norm(opt) == normalized), None
        )
        if matched is None:
            return None
        indices.add(matched)
    return indices or None


GenerationHook = Callable[[Context], QADraft]


def stub_generation_hook(ctx: Context) -> QADraft:
    """Deterministic built-in hook: templates a question from the last
    entry. A place-details entry with a rating yields a rating question;
    otherwise the first place yields an address question; a routes-only
    entry yields a duration question."""
    if not ctx.entries:
        raise ValueError("context has no entries")
    last = ctx.entries[-1]
    places = last.normalized.places
    if places and places[0].rating is not None:
        place = places[0]
        return QADraft(
            question=f"What is the rating of @{place.display_name}?",
            format=AnswerFormat.OPEN_ENDED,
            gold=str(place.rating),
        )
    if places:
        place = places[0]
        return QADraft(
            question=f"What is the address of @{place.display_name}?",
            format=AnswerFormat.OPEN_ENDED,
            gold=place.short_address,
        )
    if last.normalized.routes:
        route = last.normalized.routes[0]
        return QADraft(
            question="How many minutes does Route 1 take?",
            format=AnswerFormat.OPEN_ENDED,
            gold=str(round(route.duration_seconds / 60)),
        )
    raise ValueError("last entry has no places or routes to ask about")


def generate_question_draft(ctx: Context, hook: GenerationHook | None = None) -> QADraft:
    """Run the generation hook (default: the deterministic stub). The
    returned draft still must pass create_qa; assistance never bypasses
    validation."""
    chosen = hook or stub_generation_hook
    try:
        return chosen(ctx)
    except Exception as exc:
        raise HookFailure(f"question generation hook failed: {exc}") from exc
