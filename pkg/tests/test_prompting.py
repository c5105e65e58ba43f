import random

import pytest

from scenloop.prompting import (BudgetImpossible, Message, PromptState,
                                TrainingExample, UnknownCounter, append_feedback,
                                build_initial_prompt, count_tokens, heuristic4,
                                prompt_log_lines, serialize_messages,
                                serialize_payload, trim_to_budget)


def _example(i: int, pair_tokens: int = 512) -> TrainingExample:
    # an example pair measures desc + fenced code; size both halves in bytes
    half = pair_tokens // 2
    desc = "d" * (half * 4)
    fence_overhead = len("```scenic\n") + len("```")
    code = "c" * (half * 4 - fence_overhead)
    return TrainingExample(f"ex{i}", desc, code)


SYSTEM_300 = "s" * 1200
DESCRIPTION_50 = "u" * 200


def test_heuristic4_counts():
    assert count_tokens("") == 0
    assert count_tokens("x" * 2048) == 512
    assert count_tokens("x" * 2049) == 513


def test_counter_monotone_under_concatenation():
    rng = random.Random(0)
    for _ in range(200):
        a = "a" * rng.randrange(0, 50)
        b = "b" * rng.randrange(0, 50)
        assert count_tokens(a + b) >= max(count_tokens(a), count_tokens(b))


def test_unknown_counter():
    with pytest.raises(UnknownCounter):
        count_tokens("x", "nosuch")


def test_example_pair_measures_as_sized():
    pair = _example(0).as_pair()
    assert heuristic4(pair[0].content) + heuristic4(pair[1].content) == 512


def test_twelve_pairs_selected_at_6500():
    examples = [_example(i) for i in range(16)]
    state = build_initial_prompt(examples, DESCRIPTION_50, random.Random(1),
                                 6500, SYSTEM_300)
    assert len(state.pairs) == 12
    assert state.total_tokens() == 300 + 50 + 12 * 512
    assert state.tail[-1] == Message("user", DESCRIPTION_50)


def test_budget_impossible_when_system_alone_exceeds():
    with pytest.raises(BudgetImpossible):
        build_initial_prompt([], DESCRIPTION_50, random.Random(0), 100, SYSTEM_300)


def test_selection_matches_greedy_prefix_oracle():
    rng_sizes = random.Random(7)
    examples = [_example(i, pair_tokens=rng_sizes.randrange(100, 900, 2))
                for i in range(16)]
    for seed in range(10):
        state = build_initial_prompt(examples, DESCRIPTION_50, random.Random(seed),
                                     6500, SYSTEM_300)
        shuffled = list(examples)
        random.Random(seed).shuffle(shuffled)
        total = 350
        expected = []
        for ex in shuffled:
            pair = ex.as_pair()
            cost = heuristic4(pair[0].content) + heuristic4(pair[1].content)
            if total + cost > 6500:
                break  # greedy prefix: stop at the first pair that overflows
            expected.append(ex.description)
            total += cost
        assert [p[0].content for p in state.pairs] == expected


def test_feedback_prefixes_exact():
    examples = [_example(i) for i in range(3)]
    state = build_initial_prompt(examples, "desc", random.Random(0), 6500, "sys")
    state = append_feedback(state, "error", "Unknown identifier 'behavour'")
    assert state.tail[-1].content == "An error has occurred: Unknown identifier 'behavour'"
    assert state.tail[-1].role == "user"
    state = append_feedback(state, "comment", "Use a higher safety distance")
    assert state.tail[-1].content == "Comment: Use a higher safety distance"
    state = append_feedback(state, "assistant", "here is code")
    assert state.tail[-1] == Message("assistant", "here is code")
    # system and pairs untouched by appends
    assert state.system.content == "sys"
    assert len(state.pairs) == 3


def test_trim_drops_exactly_one_pair():
    # state at 6,400 tokens; a 300-token feedback overflows by 200 and one
    # 512-token pair comes off the top: 6,188
    examples = [_example(i) for i in range(11)]
    filler = Message("assistant", "f" * (418 * 4))
    state = build_initial_prompt(examples, DESCRIPTION_50, random.Random(2),
                                 6500, SYSTEM_300)
    state = PromptState(state.system, state.pairs, state.tail + (filler,), 6500)
    assert state.total_tokens() == 6400
    trimmed = append_feedback(state, "error", "e" * (300 * 4 - len("An error has occurred: ")))
    assert len(trimmed.pairs) == 10
    assert trimmed.total_tokens() == 6188


def test_trim_is_identity_under_budget():
    examples = [_example(i) for i in range(4)]
    state = build_initial_prompt(examples, "desc", random.Random(0), 6500, "sys")
    assert trim_to_budget(state) == state


def test_pairs_drop_in_selection_order():
    examples = [_example(i) for i in range(12)]
    state = build_initial_prompt(examples, DESCRIPTION_50, random.Random(3),
                                 6500, SYSTEM_300)
    order = [p[0].content for p in state.pairs]
    grown = state
    while grown.pairs:
        remaining = [p[0].content for p in grown.pairs]
        assert remaining == order[len(order) - len(remaining):]
        grown = append_feedback(grown, "comment", "x" * (512 * 4))
    assert grown.pairs == ()


def test_tail_trimming_keeps_final_user_message():
    tail = (Message("user", "u" * 100), Message("assistant", "a" * 100),
            Message("user", "f" * 100))
    state = PromptState(Message("system", "s" * 40), (), tail, budget=50)
    trimmed = trim_to_budget(state)
    assert trimmed.tail == (Message("user", "f" * 100),)
    assert trimmed.total_tokens() == 35


def test_budget_impossible_when_final_user_cannot_fit():
    state = PromptState(Message("system", "s" * 200), (),
                        (Message("user", "u" * 400),), budget=100)
    with pytest.raises(BudgetImpossible):
        trim_to_budget(state)


def test_system_never_dropped_and_order_preserved():
    examples = [_example(i, 128) for i in range(6)]
    state = build_initial_prompt(examples, "desc", random.Random(5), 2000, "sys")
    state = append_feedback(state, "assistant", "code1")
    state = append_feedback(state, "error", "boom")
    state = append_feedback(state, "assistant", "code2")
    roles = [m.role for m in state.messages()]
    assert roles[0] == "system"
    assert roles[1:-4:2] == ["example_user"] * len(state.pairs)
    assert [m.role for m in state.tail] == ["user", "assistant", "user", "assistant"]


def test_serialization_deterministic_and_encodings():
    examples = [_example(0, 64)]
    state = build_initial_prompt(examples, "desc", random.Random(0), 1000, "sys")
    a = serialize_payload(state)
    b = serialize_payload(state)
    assert a == b
    wired = serialize_messages(state)
    assert wired[1] == {"role": "system", "name": "example_user",
                        "content": state.pairs[0][0].content}
    plain = serialize_messages(state, "plain")
    assert plain[1]["role"] == "user"
    assert plain[2]["role"] == "assistant"
    assert "name" not in plain[1]


def test_prompt_log_roundtrips_roles():
    import json
    examples = [_example(0, 64)]
    state = build_initial_prompt(examples, "desc", random.Random(0), 1000, "sys")
    lines = prompt_log_lines(state)
    parsed = [json.loads(line) for line in lines]
    assert parsed[0]["role"] == "system"
    assert parsed[1]["role"] == "example_user"
    assert parsed[-1] == {"role": "user", "content": "desc"}
