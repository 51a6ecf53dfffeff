"""
Farey series and primitive lattice directions
"""
import logging
import math
from functools import reduce
from typing import Dict, Iterable

import numpy as np
from scipy.special import zeta
from sympy import mobius, totient

from fastdvm.exceptions import ConfigError
from fastdvm.models import DirectionSet, FareySeries

logger = logging.getLogger(__name__)


def _check_args(d: int, n_bar: int) -> None:
    if d not in (2, 3):
        raise ConfigError(f"dimension must be 2 or 3, got {d}", kind="invalid-dimension")
    if n_bar < 1:
        raise ConfigError(f"direction order must be >= 1, got {n_bar}", kind="truncation-order")


class FareyService:
    """Service for Farey enumeration, line counting and counting diagnostics"""

    @staticmethod
    def gcd_many(xs: Iterable[int]) -> int:
        """
        Greatest common divisor of a list of integers (signs ignored)

        Raises:
            ConfigError: empty or all-zero input
        """
        values = [abs(int(x)) for x in xs]
        if not values or not any(values):
            raise ConfigError("gcd of an empty or all-zero list is undefined", kind="all-zero-gcd")
        return reduce(math.gcd, values)

    @staticmethod
    def _farey_mask(d: int, n_bar: int):
        axis = np.arange(n_bar + 1)
        coords = np.meshgrid(*([axis] * d), indexing="ij")
        mask = coords[-1] >= 1
        for lo, hi in zip(coords[:-1], coords[1:]):
            mask &= lo <= hi
        mask &= np.gcd.reduce(np.stack(coords), axis=0) == 1
        return coords, mask

    @staticmethod
    def farey_series(d: int, n_bar: int) -> FareySeries:
        """Nondecreasing coprime tuples 0 <= p <= q (<= r) <= n_bar, sorted lexicographically"""
        _check_args(d, n_bar)
        coords, mask = FareyService._farey_mask(d, n_bar)
        elements = np.stack([c[mask] for c in coords], axis=1)
        return FareySeries(order=n_bar, d=d, elements=tuple(tuple(int(x) for x in row) for row in elements))

    @staticmethod
    def farey_size(d: int, n_bar: int) -> int:
        _check_args(d, n_bar)
        _, mask = FareyService._farey_mask(d, n_bar)
        return int(mask.sum())

    @staticmethod
    def count_lines_formula(d: int, n_bar: int) -> int:
        """
        Closed-form line count: 4(|F1| - 1) in 2D, 24(|F2| - |F1|) - 2 A1 in 3D.

        Diagnostic only; enumerate_directions is authoritative.
        """
        _check_args(d, n_bar)
        lines_2d = 4 * (FareyService.farey_size(2, n_bar) - 1)
        if d == 2:
            return lines_2d
        return 24 * (FareyService.farey_size(3, n_bar) - FareyService.farey_size(2, n_bar)) - 2 * lines_2d

    @staticmethod
    def enumerate_directions(d: int, n_bar: int) -> DirectionSet:
        """
        Canonical primitive vectors of max-norm <= n_bar.

        Every nonzero k in [-n_bar, n_bar]^d is m * e for exactly one
        returned e and one nonzero integer m.
        """
        _check_args(d, n_bar)
        axis = np.arange(-n_bar, n_bar + 1)
        points = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
        points = points[np.gcd.reduce(np.abs(points), axis=1) == 1]

        # first nonzero component positive
        nonzero = points != 0
        first = np.argmax(nonzero, axis=1)
        points = points[points[np.arange(len(points)), first] > 0]

        dirs = sorted(tuple(int(x) for x in p) for p in points)
        logger.debug(f"enumerated {len(dirs)} directions for d={d}, n_bar={n_bar}")
        return DirectionSet(order=n_bar, d=d, dirs=tuple(dirs))

    @staticmethod
    def line_count_report(d: int, n_bar: int) -> Dict[str, int]:
        """Farey size with both line counts; logs when the closed form disagrees"""
        farey_size = FareyService.farey_size(d, n_bar)
        formula = FareyService.count_lines_formula(d, n_bar)
        enumerated = len(FareyService.enumerate_directions(d, n_bar))
        if formula != enumerated:
            logger.warning(
                f"closed-form line count {formula} differs from enumeration {enumerated} (d={d}, n_bar={n_bar})"
            )
        return {
            "n_bar": n_bar,
            "farey_size": farey_size,
            "formula_count": formula,
            "enumerated_count": enumerated,
        }

    # Arithmetic-function diagnostics

    @staticmethod
    def totient_sum(n_bar: int) -> int:
        """phi(1) + ... + phi(n_bar); |F1| is one more"""
        return int(sum(int(totient(n)) for n in range(1, n_bar + 1)))

    @staticmethod
    def farey_count_mobius(n_bar: int) -> int:
        """|F1| = 1 + (1/2) sum_{k <= n_bar} mu(k) ([n_bar/k]^2 + [n_bar/k])"""
        total = 0
        for k in range(1, n_bar + 1):
            q = n_bar // k
            total += int(mobius(k)) * (q * q + q)
        return 1 + total // 2

    @staticmethod
    def leading_term(d: int, n_bar: int) -> float:
        """3 n^2 / pi^2 in 2D, n^3 / (6 zeta(3)) in 3D"""
        if d == 2:
            return 3.0 * n_bar ** 2 / math.pi ** 2
        return n_bar ** 3 / (6.0 * float(zeta(3)))

    @staticmethod
    def stated_leading_term(d: int, n_bar: int) -> float:
        """Printed 3D constant n^3 / (12 zeta(3)); its ratio tends to 2"""
        if d == 2:
            return FareyService.leading_term(2, n_bar)
        return n_bar ** 3 / (12.0 * float(zeta(3)))

    @staticmethod
    def asymptotic_ratio(d: int, n_bar: int) -> float:
        return FareyService.farey_size(d, n_bar) / FareyService.leading_term(d, n_bar)


# Singleton instance
farey_service = FareyService()
