import math
import random
from typing import Any, Callable, Dict, List, Sequence, Tuple

import pytest

from scalarprod.arith import QQ
from scalarprod.parsing import parse_operator
from scalarprod.sequences import Recurrence, SequenceWindow, required_initial_indices, unroll
from scalarprod.utils import Normalization
from scalarprod.weyl import AlgebraSignature, WeylOperator


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20230817)


@pytest.fixture
def p2_signature() -> AlgebraSignature:
    return AlgebraSignature(p_vars=("p1", "p2"))


@pytest.fixture
def t_signature() -> AlgebraSignature:
    return AlgebraSignature(t_vars=("t",), blocks=("dt",))


@pytest.fixture
def op() -> Callable[[str, AlgebraSignature], WeylOperator]:
    return parse_operator


@pytest.fixture
def random_operator(rng: random.Random) -> Callable[..., WeylOperator]:
    """Random operators with small integer coefficients in the p-letters."""

    def make(signature: AlgebraSignature, terms: int = 4, degree: int = 3) -> WeylOperator:
        width = 2 * signature.n
        out = []
        for _ in range(terms):
            m = [0] * signature.width
            for _ in range(rng.randint(0, degree)):
                m[rng.randrange(width)] += 1
            out.append((tuple(m), signature.field(rng.choice([-3, -2, -1, 1, 2, 5]))))
        return WeylOperator.from_terms(signature, out)

    return make


@pytest.fixture
def tableaux_counts() -> Dict[int, List[int]]:
    """Published numbers of k-uniform tableaux of size kn."""
    # fmt: off
    return {
        1: [1, 1, 2, 4, 10, 26, 76, 232, 764, 2620, 9496, 35696, 140152, 568504],
        2: [
            1, 1, 3, 11, 56, 348, 2578, 22054, 213798, 2313638, 27627434, 360646314,
            5107177312, 77954299144,
        ],
        3: [
            1, 1, 4, 23, 214, 2698, 44288, 902962, 22262244, 648446612, 21940389584,
            849992734124,
        ],
        4: [
            1, 1, 5, 42, 641, 14751, 478711, 20758650, 1158207312, 80758709676,
            6877184737416, 701994697409136,
        ],
    }
    # fmt: on


@pytest.fixture
def cubic_graph_counts() -> List[int]:
    """Labeled 3-regular graphs on n = 0..19 vertices."""
    # fmt: off
    return [
        1, 0, 0, 0, 1, 0, 70, 0, 19355, 0, 11180820, 0, 11555272575, 0, 19506631814670, 0,
        50262958713792825, 0, 187747837889699887800, 0,
    ]
    # fmt: on


@pytest.fixture
def unrolled_counts() -> Callable[..., Tuple[Any, ...]]:
    """Counts up to the length of ``counts``, unrolled from as few of them as ``rec`` needs."""

    def make(
        rec: Recurrence, counts: Sequence[int], normalization: Normalization
    ) -> Tuple[Any, ...]:
        values = [QQ(c) for c in counts]
        if normalization is Normalization.egf:
            values = [v / math.factorial(n) for n, v in enumerate(values)]
        need = max(required_initial_indices(rec), default=-1) + 1
        assert need < len(counts)
        init = SequenceWindow(0, values[:need], normalization)
        return unroll(rec, init, len(counts) - 1).counts()

    return make


@pytest.fixture
def three_uniform_tableaux() -> Recurrence:
    """The published recurrence of the 3-uniform tableaux counts."""
    return Recurrence.from_text(
        "a(n) + a(n+1) - (3*n+12)*a(n+2) - 4*a(n+3) + (6*n+35)*a(n+4) - 15*a(n+5)"
        " + (9*n^2+93*n+242)*a(n+6) + (18*n+126)*a(n+7) - (9*n^2+159*n+698)*a(n+8)"
        " + (9*n^2+147*n+606)*a(n+9) - (18*n^2+366*n+1884)*a(n+10)"
        " - (48*n+552)*a(n+11) + (24*n+288)*a(n+12) = 0"
    )
