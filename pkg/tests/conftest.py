from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from twodescent.curve import TwoTorsionModel


def random_small_curves(count: int, coeff_bound: int, seed: int) -> list[TwoTorsionModel]:
    """Random integral curves y^2 = x^3 + ax^2 + bx with |a|, |b| <= bound."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        a = rng.randint(-coeff_bound, coeff_bound)
        b = rng.randint(-coeff_bound, coeff_bound)
        if b == 0 or a * a == 4 * b:
            continue
        out.append(TwoTorsionModel.over_q(a, b))
    return out


@pytest.fixture(scope="session")
def small_curve_corpus():
    return random_small_curves(30, 20, seed=20260810)
