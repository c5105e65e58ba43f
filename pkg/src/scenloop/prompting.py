"""Prompt assembly, token accounting and trimming.

A PromptState is a value: system message, few-shot example pairs, dialogue
tail, budget. Every operation returns a new state whose measured size fits
the budget, or raises BudgetImpossible. The few-shot block shrinks
oldest-first as the dialogue grows; the system message and the most recent
user message are never dropped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from random import Random
from typing import Callable

ERROR_PREFIX = "An error has occurred: "
COMMENT_PREFIX = "Comment: "

ROLE_SYSTEM = "system"
ROLE_USER = "user"
ROLE_ASSISTANT = "assistant"
ROLE_EXAMPLE_USER = "example_user"
ROLE_EXAMPLE_ASSISTANT = "example_assistant"


class BudgetImpossible(Exception):
    """Even the untrimmable messages exceed the token budget."""


class UnknownCounter(KeyError):
    pass


def heuristic4(text: str) -> int:
    return math.ceil(len(text.encode("utf-8")) / 4)


_COUNTERS: dict[str, Callable[[str], int]] = {"heuristic4": heuristic4}


def register_counter(name: str, fn: Callable[[str], int]) -> None:
    _COUNTERS[name] = fn


def count_tokens(text: str, counter: str = "heuristic4") -> int:
    try:
        fn = _COUNTERS[counter]
    except KeyError:
        raise UnknownCounter(counter) from None
    return fn(text)


@dataclass(frozen=True)
class Message:
    role: str
    content: str


@dataclass(frozen=True)
class TrainingExample:
    name: str
    description: str
    code: str  # preprocessed scenario code, without docstring

    def as_pair(self) -> tuple[Message, Message]:
        fenced = f"```scenic\n{self.code}```"
        return (Message(ROLE_EXAMPLE_USER, self.description),
                Message(ROLE_EXAMPLE_ASSISTANT, fenced))


@dataclass(frozen=True)
class PromptState:
    system: Message
    pairs: tuple[tuple[Message, Message], ...]
    tail: tuple[Message, ...]
    budget: int
    counter: str = "heuristic4"

    def messages(self) -> list[Message]:
        out = [self.system]
        for user, assistant in self.pairs:
            out.extend((user, assistant))
        out.extend(self.tail)
        return out

    def total_tokens(self) -> int:
        return sum(count_tokens(m.content, self.counter) for m in self.messages())

    def last_user_message(self) -> Message:
        for m in reversed(self.tail):
            if m.role == ROLE_USER:
                return m
        raise ValueError("prompt state has no user message")


def build_initial_prompt(examples: list[TrainingExample], description: str,
                         rng: Random, budget: int, system_text: str,
                         counter: str = "heuristic4") -> PromptState:
    """Shuffle the examples, then greedily keep the prefix that fits.

    The budget covers system text + selected pairs + the description, which
    becomes the final user message.
    """
    system = Message(ROLE_SYSTEM, system_text)
    tail = (Message(ROLE_USER, description),)
    base = count_tokens(system_text, counter) + count_tokens(description, counter)
    if base > budget:
        raise BudgetImpossible(
            f"system text and description alone measure {base} tokens "
            f"against a budget of {budget}")
    shuffled = list(examples)
    rng.shuffle(shuffled)
    pairs: list[tuple[Message, Message]] = []
    total = base
    for example in shuffled:
        pair = example.as_pair()
        cost = (count_tokens(pair[0].content, counter)
                + count_tokens(pair[1].content, counter))
        if total + cost > budget:
            break
        pairs.append(pair)
        total += cost
    return PromptState(system, tuple(pairs), tail, budget, counter)


def append_feedback(state: PromptState, kind: str, text: str) -> PromptState:
    """Append an error, a user comment, or an assistant response, then trim."""
    if kind == "error":
        message = Message(ROLE_USER, ERROR_PREFIX + text)
    elif kind == "comment":
        message = Message(ROLE_USER, COMMENT_PREFIX + text)
    elif kind == "assistant":
        message = Message(ROLE_ASSISTANT, text)
    else:
        raise ValueError(f"unknown feedback kind {kind!r}")
    return trim_to_budget(replace(state, tail=state.tail + (message,)))


def trim_to_budget(state: PromptState) -> PromptState:
    """Drop example pairs oldest-first, then old dialogue (user, assistant)
    chunks, keeping the system message and the final user message."""
    if state.total_tokens() <= state.budget:
        return state
    pairs = list(state.pairs)
    while pairs and _measure(state, pairs, state.tail) > state.budget:
        pairs.pop(0)
    tail = list(state.tail)
    if _measure(state, pairs, tail) > state.budget:
        final_user = max(i for i, m in enumerate(tail) if m.role == ROLE_USER)
        while _measure(state, pairs, tail) > state.budget:
            droppable = [i for i, m in enumerate(tail) if i != final_user]
            if not droppable:
                raise BudgetImpossible(
                    f"system message and final user message alone exceed the "
                    f"budget of {state.budget} tokens")
            first = droppable[0]
            # drop (user, assistant) chunks together when both are droppable
            if (tail[first].role == ROLE_USER and first + 1 < len(tail)
                    and first + 1 != final_user
                    and tail[first + 1].role == ROLE_ASSISTANT):
                del tail[first:first + 2]
                final_user -= 2 if first + 1 < final_user else 0
            else:
                del tail[first]
                final_user -= 1 if first < final_user else 0
    return replace(state, pairs=tuple(pairs), tail=tuple(tail))


def _measure(state: PromptState, pairs: list, tail: list | tuple) -> int:
    total = count_tokens(state.system.content, state.counter)
    for user, assistant in pairs:
        total += count_tokens(user.content, state.counter)
        total += count_tokens(assistant.content, state.counter)
    for m in tail:
        total += count_tokens(m.content, state.counter)
    return total


def serialize_messages(state: PromptState, example_encoding: str = "name-attr") -> list[dict]:
    """Chat-completions wire form of the prompt.

    ``name-attr`` encodes example turns as system messages carrying a
    participant name; ``plain`` downgrades them to user/assistant roles for
    endpoints that reject name attributes.
    """
    out: list[dict] = []
    for m in state.messages():
        if m.role in (ROLE_EXAMPLE_USER, ROLE_EXAMPLE_ASSISTANT):
            if example_encoding == "name-attr":
                out.append({"role": "system", "name": m.role, "content": m.content})
            else:
                role = ROLE_USER if m.role == ROLE_EXAMPLE_USER else ROLE_ASSISTANT
                out.append({"role": role, "content": m.content})
        else:
            out.append({"role": m.role, "content": m.content})
    return out


def serialize_payload(state: PromptState, example_encoding: str = "name-attr") -> str:
    return json.dumps(serialize_messages(state, example_encoding),
                      sort_keys=True, separators=(",", ":"))


def prompt_log_lines(state: PromptState) -> list[str]:
    return [json.dumps({"role": m.role, "content": m.content}, sort_keys=True)
            for m in state.messages()]
