from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoqa.context import Context, render_formatted, render_structured
from geoqa.errors import HookFailure, InvalidGold, MissingOptions, UnresolvedPlace
from geoqa.model import Tool
from geoqa.qa import (
    AnswerFormat,
    QADraft,
    build_prompt,
    compare_answer,
    create_qa,
    find_place_references,
    generate_question_draft,
)

from helpers import append_synthetic, make_place


@pytest.fixture()
def ctx():
    context = Context(id="ctx-0001", title="Paris")
    louvre = make_place(
        1, display_name="Louvre Museum", rating=4.7, short_address="Rue de Rivoli, Paris"
    )
    orsay = make_place(2, display_name="Orsay Museum", rating=4.6)
    context = append_synthetic(
        context, Tool.TEXT_SEARCH, {"query": "museums"}, places=[louvre, orsay]
    )
    return append_synthetic(
        context, Tool.PLACE_DETAILS, {"place_id": "p1"}, places=[louvre], minute=1
    )


class TestPlaceReferences:
    def test_longest_known_name_wins(self):
        resolved, unresolved = find_place_references(
            "Compare @Louvre Museum Shop and @Louvre Museum.",
            ["Louvre Museum", "Louvre Museum Shop"],
        )
        assert resolved == ["Louvre Museum Shop", "Louvre Museum"]
        assert unresolved == []

    def test_unknown_reference_reported_verbatim(self):
        _, unresolved = find_place_references("Where is @Eiffel Tower?", ["Louvre Museum"])
        assert unresolved == ["Eiffel Tower"]

    def test_bare_at_sign_ignored(self):
        resolved, unresolved = find_place_references("mail me @ home? no", [])
        assert resolved == []
        assert unresolved == ["home"]


class TestCreateQA:
    def test_yes_no_created(self, ctx):
        pair = create_qa(
            ctx,
            QADraft(
                question="Is @Louvre Museum rated above 4?",
                format=AnswerFormat.YES_NO,
                gold="Yes",
            ),
        )
        assert pair.id.startswith("qa-")
        assert pair.context_id == ctx.id

    def test_single_choice_gold_out_of_range(self, ctx):
        with pytest.raises(InvalidGold):
            create_qa(
                ctx,
                QADraft(
                    question="Pick one",
                    format=AnswerFormat.SINGLE_CHOICE,
                    gold=5,
                    options=("a", "b", "c", "d"),
                ),
            )

    def test_choice_needs_two_options(self, ctx):
        with pytest.raises(MissingOptions):
            create_qa(
                ctx,
                QADraft(
                    question="Pick one",
                    format=AnswerFormat.SINGLE_CHOICE,
                    gold=0,
                    options=("only",),
                ),
            )

    def test_unresolved_place_is_named(self, ctx):
        with pytest.raises(UnresolvedPlace) as exc:
            create_qa(
                ctx,
                QADraft(
                    question="What is the rating of @British Museum?",
                    format=AnswerFormat.OPEN_ENDED,
                    gold="4.8",
                ),
            )
        assert exc.value.place_name == "British Museum"

    def test_yes_no_gold_typing(self, ctx):
        with pytest.raises(InvalidGold):
            create_qa(
                ctx,
                QADraft(question="Open?", format=AnswerFormat.YES_NO, gold="maybe"),
            )

    def test_ids_are_content_addressed(self, ctx):
        draft = QADraft(
            question="What is the rating of @Louvre Museum?",
            format=AnswerFormat.OPEN_ENDED,
            gold="4.7",
        )
        a = create_qa(ctx, draft)
        b = create_qa(ctx, draft)
        edited = create_qa(
            ctx,
            QADraft(
                question="What is the rating of @Orsay Museum?",
                format=AnswerFormat.OPEN_ENDED,
                gold="4.6",
            ),
        )
        assert a.id == b.id
        assert edited.id != a.id

    def test_multiple_choice_gold_normalized_sorted(self, ctx):
        pair = create_qa(
            ctx,
            QADraft(
                question="Which are museums?",
                format=AnswerFormat.MULTIPLE_CHOICE,
                gold=(2, 0),
                options=("Louvre Museum", "Seine", "Orsay Museum"),
            ),
        )
        assert pair.gold == (0, 2)


class TestBuildPrompt:
    def make_pair(self, ctx, **overrides):
        kwargs = dict(
            question="What is the rating of @Louvre Museum?",
            format=AnswerFormat.OPEN_ENDED,
            gold="4.7",
        )
        kwargs.update(overrides)
        return create_qa(ctx, QADraft(**kwargs))

    def test_formatted_rendering_embedded_verbatim(self, ctx):
        pair = self.make_pair(ctx)
        bundle = build_prompt(ctx, pair, "formatted")
        assert render_formatted(ctx) in bundle.prompt_text
        assert pair.question in bundle.prompt_text

    def test_structured_prompt_is_longer(self, ctx):
        pair = self.make_pair(ctx)
        formatted = build_prompt(ctx, pair, "formatted")
        structured = build_prompt(ctx, pair, "structured")
        assert len(structured.prompt_text) > len(formatted.prompt_text)
        assert render_structured(ctx) in structured.prompt_text

    def test_deterministic(self, ctx):
        pair = self.make_pair(ctx)
        assert build_prompt(ctx, pair).prompt_text == build_prompt(ctx, pair).prompt_text

    def test_options_numbered_from_one(self, ctx):
        pair = self.make_pair(
            ctx,
            question="Which museum is rated 4.7?",
            format=AnswerFormat.SINGLE_CHOICE,
            gold=0,
            options=("Louvre Museum", "Orsay Museum"),
        )
        bundle = build_prompt(ctx, pair)
        assert "1. Louvre Museum" in bundle.prompt_text
        assert "2. Orsay Museum" in bundle.prompt_text

    def test_wrong_context_rejected(self, ctx):
        pair = self.make_pair(ctx)
        other = Context(id="ctx-9999", title="other")
        with pytest.raises(ValueError):
            build_prompt(other, pair)


def single_choice_pair(gold=2):
    from geoqa.qa import QAPair

    return QAPair(
        id="qa-x",
        context_id="ctx-0001",
        question="Which option?",
        format=AnswerFormat.SINGLE_CHOICE,
        gold=gold,
        options=("Alpha", "Beta", "Gamma", "Delta"),
    )


class TestCompareAnswer:
    def test_one_based_number_maps_to_index(self):
        pair = single_choice_pair(gold=2)
        assert compare_answer(pair, "Option 3: Gamma") == "correct"
        assert compare_answer(pair, "3") == "correct"
        assert compare_answer(pair, "1") == "incorrect"

    def test_option_text_accepted(self):
        pair = single_choice_pair(gold=2)
        assert compare_answer(pair, "  gamma ") == "correct"
        assert compare_answer(pair, "beta") == "incorrect"

    def test_unparseable_single_choice(self):
        pair = single_choice_pair()
        assert compare_answer(pair, "it depends") == "unparseable"

    def test_yes_no(self):
        from geoqa.qa import QAPair

        pair = QAPair(
            id="qa-y",
            context_id="c",
            question="Open?",
            format=AnswerFormat.YES_NO,
            gold="Yes",
        )
        assert compare_answer(pair, "No.") == "incorrect"
        assert compare_answer(pair, "  YES, definitely") == "correct"
        assert compare_answer(pair, "affirmative") == "unparseable"

    def test_multiple_choice_number_list(self):
        from geoqa.qa import QAPair

        pair = QAPair(
            id="qa-m",
            context_id="c",
            question="Which?",
            format=AnswerFormat.MULTIPLE_CHOICE,
            gold=(0, 2),
            options=("Alpha", "Beta", "Gamma"),
        )
        assert compare_answer(pair, "1 and 3") == "correct"
        assert compare_answer(pair, "1, 2") == "incorrect"
        assert compare_answer(pair, "Alpha, Gamma") == "correct"
        assert compare_answer(pair, "none of those words") == "unparseable"

    def test_open_ended_normalized_match(self):
        from geoqa.qa import QAPair

        pair = QAPair(
            id="qa-o",
            context_id="c",
            question="Rating?",
            format=AnswerFormat.OPEN_ENDED,
            gold="Rue de Rivoli, Paris",
        )
        assert compare_answer(pair, "  rue De   rivoli, paris ") == "correct"
        assert compare_answer(pair, "somewhere else") == "incorrect"

    @given(st.sampled_from(["yes", "Yes", "YES", " yes "]), st.text(max_size=10))
    def test_yes_prefix_invariant_under_noise(self, prefix, suffix):
        from geoqa.qa import QAPair

        pair = QAPair(
            id="qa-y",
            context_id="c",
            question="Open?",
            format=AnswerFormat.YES_NO,
            gold="Yes",
        )
        assert compare_answer(pair, f"{prefix}. {suffix}") == "correct"


class TestGenerationHook:
    def test_stub_builds_rating_question(self, ctx):
        draft = generate_question_draft(ctx)
        assert draft.question == "What is the rating of @Louvre Museum?"
        assert draft.format is AnswerFormat.OPEN_ENDED
        assert draft.gold == "4.7"
        pair = create_qa(ctx, draft)
        assert pair.question == draft.question

    def test_stub_falls_back_to_address(self):
        context = Context(id="c", title="t")
        context = append_synthetic(
            context,
            Tool.TEXT_SEARCH,
            {"query": "x"},
            places=[make_place(5, display_name="Plain Place", rating=None)],
        )
        draft = generate_question_draft(context)
        assert "address" in draft.question
        assert draft.gold == "5 Example Street"

    def test_raising_hook_wrapped(self, ctx):
        def exploding(_):
            raise RuntimeError("llm offline")

        with pytest.raises(HookFailure):
            generate_question_draft(ctx, exploding)

    def test_hook_draft_still_validated(self, ctx):
        def rogue(_):
            return QADraft(
                question="Rating of @Atlantis?",
                format=AnswerFormat.OPEN_ENDED,
                gold="5.0",
            )

        draft = generate_question_draft(ctx, rogue)
        with pytest.raises(UnresolvedPlace):
            create_qa(ctx, draft)
