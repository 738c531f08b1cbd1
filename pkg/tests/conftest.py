import random

import pytest

from hybridmon.conditions import EventSignature, SignatureSet


@pytest.fixture
def two_signatures() -> SignatureSet:
    """Alphabet used throughout the condition and formula tests."""
    return SignatureSet(
        [
            EventSignature("a", frozenset({"x", "y"})),
            EventSignature("b", frozenset({"z"})),
        ]
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
