from fractions import Fraction

import pytest

from retaliation.decay import Linear
from retaliation.game import GameParams


@pytest.fixture
def worked_game():
    """v=10000, c=4000, r=2000 with 10% linear decay: T_A = 6, T_D = 8."""
    return GameParams(10000, 4000, 2000, Linear(Fraction(1, 10)))


@pytest.fixture
def attack_game():
    """Cheap attack, small reputation cost: A fights once and D gives up."""
    return GameParams(10000, 8900, 200, Linear(Fraction(1, 10)))


def bundled_log(name: str) -> str:
    from importlib.resources import files

    return (files("retaliation.data") / f"{name}.csv").read_text()
