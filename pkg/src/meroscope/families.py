"""Seeded random test families shared by the CLI suites and the tests."""

from __future__ import annotations

import numpy as np

from .core import ComplexPoly, RationalFn
from .poles import random_disk


def random_poles(
    rng: np.random.Generator,
    count: int,
    radius: float = 0.8,
    min_sep: float = 0.05,
    r_min: float = 0.0,
) -> np.ndarray:
    """``count`` points with ``r_min <= |w| <= radius`` and pairwise distance ``>= min_sep``."""
    while True:
        if r_min > 0:
            w = np.sqrt(rng.uniform(r_min**2, radius**2, count)) * np.exp(2j * np.pi * rng.uniform(0, 1, count))
        else:
            w = random_disk(rng, radius, count)
        if count < 2:
            return w
        gaps = np.abs(w[:, None] - w[None, :])
        if gaps[~np.eye(count, dtype=bool)].min() >= min_sep:
            return w


def random_residues(rng: np.random.Generator, count: int, r_min: float = 0.25, r_max: float = 1.5) -> np.ndarray:
    """Residues with moduli in ``[r_min, r_max]`` and uniform phases."""
    return rng.uniform(r_min, r_max, count) * np.exp(2j * np.pi * rng.uniform(0, 1, count))


def random_minus(
    rng: np.random.Generator,
    poles: int,
    radius: float = 0.8,
    min_sep: float = 0.05,
    residues: tuple[float, float] = (0.25, 1.5),
) -> RationalFn:
    """Proper rational ``f_minus = sum r_j / (z - w_j)`` with simple poles in the disk."""
    if poles == 0:
        return RationalFn(ComplexPoly(), ComplexPoly([1.0]))
    w = random_poles(rng, poles, radius, min_sep)
    return RationalFn.from_poles(w, random_residues(rng, poles, *residues))


def random_rational(
    rng: np.random.Generator,
    poles: int,
    radius: float = 0.8,
    min_sep: float = 0.05,
    plus_degree: int = 3,
) -> RationalFn:
    """``f_minus`` from :func:`random_minus` plus a random polynomial of degree ``<= plus_degree``."""
    minus = random_minus(rng, poles, radius, min_sep)
    plus = ComplexPoly(random_disk(rng, 1.0, int(rng.integers(0, plus_degree + 1)) + 1))
    return RationalFn(minus.num + minus.den * plus, minus.den)


def witness_family(rng: np.random.Generator, m: int) -> RationalFn:
    """``f_minus`` with ``m + 1`` well separated poles near the circle.

    Pole moduli lie in ``[0.6, 0.8]`` with pairwise distance at least 0.4;
    residue moduli lie in ``[0.5, 1.5]``.  For such functions a violating
    pair exists whose ``|f_n + p|`` stays within a double-precision dynamic
    range on the circle.
    """
    w = random_poles(rng, m + 1, radius=0.8, min_sep=0.4, r_min=0.6)
    return RationalFn.from_poles(w, random_residues(rng, m + 1, 0.5, 1.5))
