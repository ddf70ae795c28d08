"""Seeded random response functions for the bifurcation experiments."""
from __future__ import annotations

import numpy as np

from .errors import DegenerateDrawError
from .network import Monoid
from .polyalg import PolyField, monomial_basis

__all__ = ["draw_response", "slope_sum"]


def slope_sum(f: PolyField, n: int) -> float:
    """Sum of the state slopes of ``f``: the eigenvalue of ``Γ_f`` on the diagonal."""
    return float(f.linear_part()[0, :n].sum())


def draw_response(monoid: Monoid, seed: int | np.random.Generator, degree: int = 3, *, hyperbolic_sign: int | None = -1,
                  min_gap: float = 0.3, low: float = 0.2, high: float = 2.0,
                  max_tries: int = 1000) -> PolyField:
    """Random response with ``f(0, 0) = 0`` and vanishing first-slot slope.

    Coefficients are uniform in ``±[low, high]``. The slope sum (the eigenvalue
    transverse to the center space) is kept at least ``min_gap`` away from 0
    and, when ``hyperbolic_sign`` is given, of that sign. Redraws use the same
    seeded stream, so the result is a function of ``seed`` alone; a
    ``Generator`` may be passed instead to continue an existing stream.
    """
    n = monoid.size
    basis = monomial_basis(n + 1, degree)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_tries):
        mag = rng.uniform(low, high, size=basis.size)
        sign = rng.choice([-1.0, 1.0], size=basis.size)
        coeffs = mag * sign
        coeffs[0] = 0.0                 # constant
        coeffs[1] = 0.0                 # slope in the unit cell's own state
        s = coeffs[1:n + 1].sum()
        if abs(s) < min_gap:
            continue
        if hyperbolic_sign is not None and np.sign(s) != np.sign(hyperbolic_sign):
            continue
        return PolyField.from_dense(basis, coeffs[:, None], degree)
    raise DegenerateDrawError(f"no admissible draw in {max_tries} tries (seed {seed})")
