from __future__ import annotations

import random

import pytest

from sketchsum.corpus import Dialogue, DialogueSample, ReferenceSummary, Turn

_WORDS = (
    "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo lima "
    "mike november oscar papa quebec romeo sierra tango"
).split()


def make_dialogue(texts: list[str], dialogue_id: str = "d") -> Dialogue:
    """Alternating-speaker dialogue from plain turn texts."""
    speakers = ("A", "B")
    turns = tuple(
        Turn(index=i + 1, speaker=speakers[i % 2], text=text)
        for i, text in enumerate(texts)
    )
    return Dialogue(id=dialogue_id, turns=turns)


def random_dialogue(rng: random.Random, n_turns: int, dialogue_id: str = "d") -> Dialogue:
    texts = [
        " ".join(rng.choice(_WORDS) for _ in range(rng.randint(2, 6)))
        for _ in range(n_turns)
    ]
    return make_dialogue(texts, dialogue_id)


@pytest.fixture
def fig1_sample() -> DialogueSample:
    """Nine-turn concert-invitation dialogue with a three-sentence reference."""
    texts = [
        ("Morgan", "What's up? How is your day going?"),
        ("Suzanne", "It's just one of many boring days at work."),
        ("Morgan", "Are you having a break now?"),
        ("Suzanne", "Yes, a well-deserved break."),
        ("Morgan", "Do you feel like going to a concert next week?"),
        ("Suzanne", "Which concert do you mean?"),
        ("Morgan", "Coldplay at Madison Square Garden."),
        ("Suzanne", "Why not? I would love to go."),
        ("Morgan", "Great, I will buy the tickets."),
    ]
    dialogue = Dialogue(
        id="fig1",
        turns=tuple(Turn(i + 1, s, t) for i, (s, t) in enumerate(texts)),
    )
    summary = ReferenceSummary(
        (
            "Suzanne is at work and is having a well-deserved break now.",
            "Morgan invites Suzanne to a Coldplay concert at Madison Square Garden next week.",
            "Suzanne would love to go and Morgan will buy the tickets.",
        )
    )
    return DialogueSample(dialogue=dialogue, summary=summary)


@pytest.fixture
def rent_dialogue() -> Dialogue:
    """Thirteen-turn rent-money dialogue used for the extractive baseline checks."""
    texts = [
        ("Kelly", "I still haven't received the rent money. Did you check with your bank?"),
        ("John", "Yes. I definitely sent it last week."),
        ("Kelly", "But I still don't have it. Can you please check that you sent it to the right account."),
        ("John", "Ok. Give me 5 min."),
        ("Kelly", "OK"),
        ("John", "I checked and the money did go out of my account last week."),
        ("Kelly", "What account number did you send it to?"),
        ("John", "44-1278"),
        ("Kelly", "No wonder! My account number is 44-1279. You sent it to someone else's account."),
        ("John", "...! I'm really sorry!"),
        ("Kelly", "I still need the rent money though."),
        ("John", "I'm really sorry I'll have to go to the bank tomorrow and ask if they can re-send it to the right account."),
        ("Kelly", "Thanks !"),
    ]
    return Dialogue(
        id="rent",
        turns=tuple(Turn(i + 1, s, t) for i, (s, t) in enumerate(texts)),
    )
