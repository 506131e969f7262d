"""Named law constructors and their closed-form behaviour under the maps.

Stable laws enter through their spectral weights on {-1, +1}; the
exponential law enters through its one-sided jump density e^{-lam x}/x,
whose image under the power-clock map has an incomplete-gamma density.
Gaussian and compound-Poisson constructors round out the test corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import incomplete_gamma_upper
from .triplets import (
    Atom,
    ExponentialTail,
    LevyMeasure,
    LevyTriplet,
    StablePower,
)

__all__ = [
    "StableSpec",
    "StableComposeResult",
    "stable_triplet",
    "stable_compose_closed_form",
    "exponential_triplet",
    "exp_pushforward_density",
    "exp_composed_density",
    "gaussian_triplet",
    "compound_poisson_triplet",
]


@dataclass(frozen=True)
class StableSpec:
    """Stable law with tail index p and spectral masses at +1 / -1.

    The skew aggregate gamma_bar = gamma_plus - gamma_minus drives every
    shift formula. p = 1 with nonzero gamma_bar is accepted (the algebra
    below holds verbatim) even though such laws are not strictly stable.
    """

    p: float
    gamma_plus: float
    gamma_minus: float = 0.0
    shift: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.p < 2.0):
            raise ValueError("stable index p must lie strictly in (0, 2)")
        if self.gamma_plus < 0.0 or self.gamma_minus < 0.0:
            raise ValueError("spectral masses must be nonnegative")
        if self.gamma_plus + self.gamma_minus <= 0.0:
            raise ValueError("at least one spectral mass must be positive")

    @property
    def gamma_bar(self) -> float:
        return self.gamma_plus - self.gamma_minus


@dataclass(frozen=True)
class StableComposeResult:
    """Composition of two maps on a stable law: a convolution power and a shift."""

    power_c: float
    x0: float


def stable_triplet(s: StableSpec) -> LevyTriplet:
    """Triplet [a, 0, stable power measure] of the spec'd stable law."""
    return LevyTriplet(
        shift=s.shift,
        gaussian_variance=0.0,
        measure=LevyMeasure(named=(StablePower(s.p, s.gamma_plus, s.gamma_minus),)),
    )


def stable_compose_closed_form(alpha: float, beta: float, s: StableSpec) -> StableComposeResult:
    """Closed form of the composed map on a stable law.

    The image is the power_c-th convolution power of the input convolved
    with a point mass at x0:

        power_c = alpha beta / ((alpha + p)(beta + p)),
        x0 = alpha beta (alpha + beta + p + 1)
             / ((alpha+1)(beta+1)(alpha+p)(beta+p)) * ((p-1) a + gamma_bar).

    Non-singular and symmetric in alpha, beta (alpha = beta is fine).
    """
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("alpha and beta must be positive")
    p = s.p
    power_c = alpha * beta / ((alpha + p) * (beta + p))
    x0 = (
        alpha * beta * (alpha + beta + p + 1.0)
        / ((alpha + 1.0) * (beta + 1.0) * (alpha + p) * (beta + p))
        * ((p - 1.0) * s.shift + s.gamma_bar)
    )
    return StableComposeResult(power_c=power_c, x0=x0)


def exponential_triplet(lam: float) -> LevyTriplet:
    """Exponential law with rate lam as a triplet.

    The jump density is e^{-lam x}/x on (0, inf). The shift
    (1 - e^{-lam})/lam undoes the unit-ball compensation so the exponent
    comes out exactly -log(1 - iy/lam), the log-characteristic function
    of the exponential distribution.
    """
    if not lam > 0.0:
        raise ValueError("rate lam must be positive")
    a = (1.0 - math.exp(-lam)) / lam
    return LevyTriplet(shift=a, gaussian_variance=0.0, measure=LevyMeasure(named=(ExponentialTail(lam),)))


def exp_pushforward_density(beta: float, lam: float, x: float) -> float:
    """Jump density of the mapped exponential law at x > 0.

    Closed form lam * beta * (lam x)^(beta-1) * Gamma(-beta, lam x).
    """
    if not (beta > 0.0 and lam > 0.0 and x > 0.0):
        raise ValueError("beta, lam and x must all be positive")
    z = lam * x
    if z > 700.0:
        return 0.0
    return lam * beta * z ** (beta - 1.0) * incomplete_gamma_upper(-beta, z)


def exp_composed_density(alpha: float, beta: float, lam: float, x: float) -> float:
    """Jump density at x of the exponential law pushed through both maps.

    A variable-coefficient combination of two incomplete gamma functions:

        alpha beta lam / (beta - alpha)
            * [ (lam x)^(alpha-1) Gamma(-alpha, lam x)
                - (lam x)^(beta-1) Gamma(-beta, lam x) ].

    Symmetric under swapping alpha and beta; alpha = beta is rejected
    (use two sequential pushforwards instead).
    """
    if not (alpha > 0.0 and beta > 0.0 and lam > 0.0 and x > 0.0):
        raise ValueError("alpha, beta, lam and x must all be positive")
    if alpha == beta:
        raise ValueError("alpha = beta has no two-gamma form; map sequentially instead")
    z = lam * x
    if z > 700.0:
        return 0.0
    bracket = z ** (alpha - 1.0) * incomplete_gamma_upper(-alpha, z) - z ** (
        beta - 1.0
    ) * incomplete_gamma_upper(-beta, z)
    return alpha * beta * lam / (beta - alpha) * bracket


def gaussian_triplet(a: float, variance: float) -> LevyTriplet:
    """Gaussian law [a, variance, 0]; variance 0 degenerates to a point mass."""
    return LevyTriplet(shift=a, gaussian_variance=variance, measure=LevyMeasure.zero())


def compound_poisson_triplet(atoms) -> LevyTriplet:
    """Compound Poisson law [0, 0, atoms] from (location, mass) pairs."""
    parsed = tuple(
        at if isinstance(at, Atom) else Atom(float(at[0]), float(at[1])) for at in atoms
    )
    return LevyTriplet(shift=0.0, gaussian_variance=0.0, measure=LevyMeasure(atoms=parsed))
