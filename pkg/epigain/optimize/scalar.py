"""
Bounded scalar maximization.

Golden-section search with safeguarded parabolic interpolation (Brent's
method on a closed interval). A parabolic step is taken only when it lands
inside the current bracket and is shorter than half the step before last;
otherwise the bracket shrinks by the golden ratio.
"""

import math
from typing import Callable

from pydantic import BaseModel, ConfigDict, Field

from epigain.errors import OptimizerError

Objective = Callable[[float], float]

_SQRT_EPS = math.sqrt(2.2e-16)
_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))


class ScalarMaximum(BaseModel):
    """Outcome of one bounded maximization."""

    model_config = ConfigDict(frozen=True)

    argmax: float
    maximum: float
    converged: bool
    evaluations: int = Field(..., ge=1)


class _BestSoFar:
    """Highest value seen; ties go to the lowest argument."""

    def __init__(self) -> None:
        self.x = math.nan
        self.value = -math.inf

    def offer(self, x: float, value: float) -> None:
        if value > self.value or (value == self.value and x < self.x):
            self.x, self.value = x, value


def maximize_scalar(
    f: Objective,
    lo: float,
    hi: float,
    tol: float = 1e-5,
    max_iters: int = 500,
) -> ScalarMaximum:
    """
    Locate a local maximum of f on [lo, hi].

    Args:
        f: Objective
        lo: Lower bound
        hi: Upper bound
        tol: Absolute tolerance on the argument
        max_iters: Budget of objective evaluations

    Returns:
        ScalarMaximum with the best point seen; converged is False when the
        evaluation budget ran out first

    Raises:
        ValueError: If the bounds are not finite or lo >= hi
        OptimizerError: If f returns a non-finite value
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise ValueError(f"Invalid bracket [{lo}, {hi}]")
    if tol <= 0 or max_iters < 1:
        raise ValueError("tol must be positive and max_iters at least 1")

    best = _BestSoFar()

    def cost(x: float) -> float:
        value = f(x)
        if not math.isfinite(value):
            raise OptimizerError(x, value)
        best.offer(x, value)
        return -value

    a, b = lo, hi
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = cost(x)
    evaluations = 1
    step = previous_step = 0.0
    converged = True

    mid = 0.5 * (a + b)
    tol1 = _SQRT_EPS * abs(x) + tol / 3.0
    tol2 = 2.0 * tol1

    while abs(x - mid) > tol2 - 0.5 * (b - a):
        golden = True
        if abs(previous_step) > tol1:
            golden = False
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            r = previous_step
            previous_step = step

            if abs(p) < abs(0.5 * q * r) and q * (a - x) < p < q * (b - x):
                step = p / q
                trial = x + step
                if trial - a < tol2 or b - trial < tol2:
                    step = tol1 if mid >= x else -tol1
            else:
                golden = True

        if golden:
            previous_step = (a - x) if x >= mid else (b - x)
            step = _GOLDEN * previous_step

        direction = 1.0 if step >= 0.0 else -1.0
        u = x + direction * max(abs(step), tol1)
        fu = cost(u)
        evaluations += 1

        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv = w, fw
            w, fw = x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv = w, fw
                w, fw = u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu

        mid = 0.5 * (a + b)
        tol1 = _SQRT_EPS * abs(x) + tol / 3.0
        tol2 = 2.0 * tol1

        if evaluations >= max_iters:
            converged = False
            break

    return ScalarMaximum(
        argmax=best.x,
        maximum=best.value,
        converged=converged,
        evaluations=evaluations,
    )
