import random

import pytest

from eventseq.domain import EventSet, TimeGrid, TimeMode
from eventseq.tokenizer import ReferenceTokenizer, VocabFile

WORDS = [
    "add", "oil", "stir", "the", "pan", "heat", "into", "mix", "a", "man",
    "pours", "water", "cuts", "onion", "slowly", "then", "fry", "chicken",
    "salt", "pepper", "bowl", "whisk", "eggs", "flip", "plate", "serve",
]


@pytest.fixture(scope="session")
def vocab_file():
    return VocabFile.build(WORDS, num_sentinels=32)


@pytest.fixture(scope="session")
def tokenizer(vocab_file):
    return ReferenceTokenizer(vocab_file, 100)


@pytest.fixture(scope="session")
def vocab(tokenizer):
    return tokenizer.vocab_spec


@pytest.fixture(scope="session")
def grid():
    return TimeGrid(TimeMode.RELATIVE, 100)


def random_event_set(rng: random.Random, max_events: int = 20) -> EventSet:
    duration = rng.uniform(10.0, 600.0)
    events = []
    for _ in range(rng.randint(0, max_events)):
        a = rng.uniform(0.0, duration)
        b = rng.uniform(0.0, duration)
        if a > b:
            a, b = b, a
        caption = " ".join(rng.choices(WORDS, k=rng.randint(1, 8)))
        events.append((a, b, caption))
    return EventSet.build(duration, events)
