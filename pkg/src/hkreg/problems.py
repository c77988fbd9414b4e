"""Model problem definitions: boundary conditions, target fraction, source."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

_TOL = 1e-12


def _on_left_or_bottom(x: float, y: float) -> bool:
    return abs(x) < _TOL or abs(y) < _TOL


def _everywhere(x: float, y: float) -> bool:
    return True


@dataclass(frozen=True)
class ProblemSpec:
    id: str
    dirichlet: Callable[[float, float], bool]
    c: float
    f: float = 1.0

    def is_dirichlet(self, x: float, y: float) -> bool:
        return self.dirichlet(x, y)


# Problem A: two Dirichlet sides (x=0 and y=0), the other two insulated.
PROBLEM_A = ProblemSpec("A", _on_left_or_bottom, c=0.4)
# Problem B: the whole boundary held at zero temperature.
PROBLEM_B = ProblemSpec("B", _everywhere, c=0.5)

PROBLEMS = {"A": PROBLEM_A, "B": PROBLEM_B}


def get_problem(name: str) -> ProblemSpec:
    try:
        return PROBLEMS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}, expected one of {sorted(PROBLEMS)}") from None
