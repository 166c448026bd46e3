# strategies.py
#
# Hypothesis strategies shared by the property tests.

import hypothesis.strategies as st

from genverify import random_tournament

seeds = st.integers(min_value=0, max_value=(1 << 64) - 1)


@st.composite
def tournaments(draw, min_n=1, max_n=10):
    """A seeded random tournament; shrinking works on (n, seed)."""
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    return random_tournament(n, draw(seeds))


@st.composite
def terminal_sets(draw, tournament, size):
    """Two disjoint vertex lists of length `size`, in drawn order."""
    chosen = draw(
        st.lists(
            st.sampled_from(tournament.vertices),
            min_size=2 * size,
            max_size=2 * size,
            unique=True,
        )
    )
    return chosen[:size], chosen[size:]
