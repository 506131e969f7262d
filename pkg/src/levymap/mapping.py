"""The power-clock random integral map and its compositions.

For beta > 0 the map sends an infinitely divisible law nu to the law of
int_0^1 t^{1/beta} dY_nu(t). On exponents this is

    Phi -> int_0^1 Phi(t^{1/beta} y) dt = int_0^1 Phi(u y) beta u^{beta-1} du,

and on triplets [a, R, M]:

    a -> beta/(beta+1) (a + b),     b = int_{|x|>1} x |x|^{-1-beta} M(dx),
    R -> beta/(beta+2) R,
    M -> image of M under (t, x) -> t^{1/beta} x, t uniform on (0, 1].

Composing two maps collapses to a single random integral against the
time change r(u) = (beta u^alpha - alpha u^beta)/(beta - alpha)
(u^beta (1 - beta log u) when alpha = beta), and the composed triplet has
closed forms: every parameter is the same linear combination
beta/(beta-alpha) * (alpha-image) - alpha/(beta-alpha) * (beta-image)
that appears in r itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .catalog import exp_composed_density, exp_pushforward_density
from .numerics import adaptive_quad, monotone_inverse
from .triplets import (
    Atom,
    CharExponent,
    ExponentialTail,
    GridDensity,
    LevyMeasure,
    LevyTriplet,
    StablePower,
    convolution_power,
    convolve,
    truncated_mean,
)

__all__ = [
    "TimeChange",
    "RandomIntegralSpec",
    "InternalConsistencyError",
    "time_change",
    "time_change_limit_gap",
    "map_triplet",
    "map_exponent",
    "pushforward_measure",
    "compose_triplet",
    "compose_exponent",
    "factorization_residual",
    "inclusion_factor",
]

DEFAULT_GRID_RESOLUTION = 2048
_INNER_SPAN = 1e-6  # grids span [inner_span * scale, scale], log-spaced


class InternalConsistencyError(RuntimeError):
    """A provably-positive quantity came out negative: implementation bug."""


@dataclass(frozen=True)
class TimeChange:
    """Monotone reparameterization of [0, 1] with derivative and inverse.

    kind "distinct_pair" is (beta u^alpha - alpha u^beta)/(beta - alpha),
    kind "equal_pair" its alpha -> beta limit u^beta (1 - beta log u),
    kind "identity" the trivial clock. All kinds fix 0 and 1 and increase
    strictly; the distinct pair is symmetric in (alpha, beta).
    """

    kind: str
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def __call__(self, u):
        u_in = np.asarray(u, dtype=float)
        scalar = u_in.ndim == 0
        uu = np.atleast_1d(u_in)
        if self.kind == "identity":
            out = uu.copy()
        else:
            out = np.zeros_like(uu)
            pos = uu > 0.0
            up = uu[pos]
            logu = np.log(up)
            if self.kind == "equal_pair":
                b = self.beta
                out[pos] = up**b * (1.0 - b * logu)
            else:
                a, b = self.alpha, self.beta
                delta = b - a
                # u^a (1 - a expm1(delta log u)/delta): stable as delta -> 0
                out[pos] = up**a * (1.0 - a * np.expm1(delta * logu) / delta)
        return float(out[0]) if scalar else out

    def derivative(self, u):
        u_in = np.asarray(u, dtype=float)
        scalar = u_in.ndim == 0
        uu = np.atleast_1d(u_in)
        if self.kind == "identity":
            out = np.ones_like(uu)
        else:
            logu = np.log(uu)
            if self.kind == "equal_pair":
                b = self.beta
                out = -(b**2) * uu ** (b - 1.0) * logu
            else:
                a, b = self.alpha, self.beta
                delta = b - a
                out = a * b * uu ** (a - 1.0) * (-np.expm1(delta * logu)) / delta
        return float(out[0]) if scalar else out

    def inverse(self, t: float, tol: float = 1e-12) -> float:
        if self.kind == "identity":
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"t={t} outside [0, 1]")
            return float(t)
        if self.kind == "distinct_pair" and self.beta == 2.0 * self.alpha:
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"t={t} outside [0, 1]")
            return float((1.0 - math.sqrt(1.0 - t)) ** (1.0 / self.alpha))
        return monotone_inverse(lambda u: float(self(u)), t, tol=tol)


def time_change(alpha: float, beta: float) -> TimeChange:
    """The time change collapsing the composition of the two maps."""
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("alpha and beta must be positive")
    if alpha == beta:
        return TimeChange(kind="equal_pair", alpha=beta, beta=beta)
    # symmetric in (alpha, beta); storing them ordered keeps the expm1
    # argument nonpositive, so small-u evaluation cannot overflow
    lo, hi = sorted((alpha, beta))
    return TimeChange(kind="distinct_pair", alpha=lo, beta=hi)


def time_change_limit_gap(beta: float, eps: float, n_grid: int = 1001) -> float:
    """sup_u |r_(beta-eps, beta)(u) - r_(beta, beta)(u)| on a uniform grid."""
    if not (0.0 < eps < beta):
        raise ValueError("need 0 < eps < beta")
    u = np.linspace(0.0, 1.0, n_grid)
    return float(np.max(np.abs(time_change(beta - eps, beta)(u) - time_change(beta, beta)(u))))


@dataclass(frozen=True)
class RandomIntegralSpec:
    """Data of a random integral int_(0,1] h(u) dY(r(u)) for Monte Carlo."""

    integrand: Callable
    clock: TimeChange
    driver: LevyTriplet

    @staticmethod
    def single_map(beta: float, driver: LevyTriplet) -> "RandomIntegralSpec":
        """h(t) = t^{1/beta} against the plain clock."""
        if not beta > 0.0:
            raise ValueError("beta must be positive")
        e = 1.0 / beta
        return RandomIntegralSpec(
            integrand=lambda t: np.power(t, e),
            clock=TimeChange(kind="identity"),
            driver=driver,
        )

    @staticmethod
    def composed_map(alpha: float, beta: float, driver: LevyTriplet) -> "RandomIntegralSpec":
        """h(u) = u against the composition time change."""
        return RandomIntegralSpec(
            integrand=lambda u: np.asarray(u, dtype=float),
            clock=time_change(alpha, beta),
            driver=driver,
        )


def _log_grid(scale: float, resolution: int) -> np.ndarray:
    return np.geomspace(_INNER_SPAN * scale, scale, resolution)


def _materialize(profile: Callable, x_abs: np.ndarray, negative: bool) -> GridDensity:
    """Grid density on one sign side from an exact density profile.

    ``profile`` takes |x| on the support; negative side grids mirror it.
    Knot values are floored at zero after checking nothing is genuinely
    negative (which would flag a broken signed combination upstream).
    """
    vals = np.asarray(profile(x_abs), dtype=float)
    if np.any(vals < -1e-9):
        raise InternalConsistencyError(
            f"density came out negative ({vals.min():.3e}); "
            "the signed measure combination should be provably nonnegative"
        )
    vals = np.maximum(vals, 0.0)

    def signed(q):
        q = np.asarray(q, dtype=float)
        on_side = q < 0.0 if negative else q > 0.0
        out = np.zeros_like(q)
        if on_side.any():
            out[on_side] = np.maximum(profile(np.abs(q[on_side])), 0.0)
        return out

    if negative:
        return GridDensity(-x_abs[::-1], vals[::-1], profile=signed)
    return GridDensity(x_abs, vals, profile=signed)


def _atom_push_profile(at: Atom, beta: float):
    """Image density of a point mass: mass * beta s^{beta-1} / |x| at s|x|."""
    ax = abs(at.x)
    def profile(q):
        q = np.asarray(q, dtype=float)
        s = q / ax
        out = np.zeros_like(s)
        ok = (s > 0.0) & (s <= 1.0 + 1e-12)
        out[ok] = at.mass * beta * np.minimum(s[ok], 1.0) ** (beta - 1.0) / ax
        return out
    return profile


def _atom_compose_profile(at: Atom, alpha: float, beta: float):
    """Image density of a point mass under both maps (closed form)."""
    ax = abs(at.x)
    coef = at.mass * alpha * beta / ((beta - alpha) * ax)
    def profile(q):
        q = np.asarray(q, dtype=float)
        s = np.clip(q / ax, 0.0, 1.0)
        out = np.zeros_like(s)
        ok = s > 0.0
        sk = s[ok]
        out[ok] = coef * (sk ** (alpha - 1.0) - sk ** (beta - 1.0))
        return out
    return profile


def _exp_push_profile(comp: ExponentialTail, beta: float):
    w, lam = comp.weight, comp.lam
    def profile(q):
        q = np.atleast_1d(np.asarray(q, dtype=float))
        return np.array([w * exp_pushforward_density(beta, lam, xi) if xi > 0 else 0.0 for xi in q])
    return profile


def _exp_compose_profile(comp: ExponentialTail, alpha: float, beta: float):
    w, lam = comp.weight, comp.lam
    def profile(q):
        q = np.atleast_1d(np.asarray(q, dtype=float))
        return np.array([w * exp_composed_density(alpha, beta, lam, xi) if xi > 0 else 0.0 for xi in q])
    return profile


def _power_integral(e: float, s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    """int_{s0}^{s1} s^e ds, elementwise, with the log case at e = -1."""
    if e == -1.0:
        return np.log(s1 / s0)
    return (s1 ** (e + 1.0) - s0 ** (e + 1.0)) / (e + 1.0)


def _grid_side(grid: GridDensity, negative: bool):
    """Knots of one sign side of a grid, as increasing absolute values."""
    if negative:
        knots = -grid.x[grid.x < 0.0][::-1]
    else:
        knots = grid.x[grid.x > 0.0]
    return knots


def _grid_push_profile(grid: GridDensity, beta: float, negative: bool):
    """Image density of a grid component on one sign side.

    density_out(w) = beta int s^{beta-2} density_in(w/s) ds over the s-range
    hitting the input support. Exact panel sums for plain interpolants,
    adaptive quadrature against the exact profile when one is attached.
    """
    knots = _grid_side(grid, negative)
    x_lo, x_hi = knots[0], knots[-1]
    sign = -1.0 if negative else 1.0

    if grid.profile is None:
        xs = knots
        vs = grid.interp_density(sign * knots)
        if grid.x[0] < 0.0 < grid.x[-1]:
            # the interpolant of a sign-spanning grid is nonzero between
            # the innermost knots; cover (0, x_lo] with one extra panel
            xs = np.concatenate([[0.0], xs])
            vs = np.concatenate([[grid.interp_density(0.0)], vs])
        # panel-linear representation density(v) = A_j + B_j v on [xs[j], xs[j+1]]
        B = np.diff(vs) / np.diff(xs)
        A = vs[:-1] - B * xs[:-1]

        def profile(q):
            q = np.atleast_1d(np.asarray(q, dtype=float))
            out = np.zeros_like(q)
            for i, w in enumerate(q):
                if w <= 0.0 or w > x_hi:
                    continue
                with np.errstate(divide="ignore"):
                    s_hi = np.minimum(1.0, w / xs[:-1])
                    s_lo = np.maximum(w / x_hi, w / xs[1:])
                ok = s_hi > s_lo
                if not ok.any():
                    continue
                sh, sl = s_hi[ok], s_lo[ok]
                out[i] = beta * float(
                    np.sum(A[ok] * _power_integral(beta - 2.0, sl, sh))
                    + w * np.sum(B[ok] * _power_integral(beta - 3.0, sl, sh))
                )
            return out

        return profile

    def profile(q):
        q = np.atleast_1d(np.asarray(q, dtype=float))
        out = np.zeros_like(q)
        for i, w in enumerate(q):
            if w <= 0.0 or w > x_hi:
                continue
            s_min = w / x_hi
            s_max = min(1.0, w / x_lo)
            if s_max <= s_min:
                continue
            res = adaptive_quad(
                lambda s: grid.density(sign * w / s) * beta * s ** (beta - 2.0),
                s_min,
                s_max,
                tol=1e-12,
            )
            out[i] = res.value.real
        return out

    return profile


def pushforward_measure(
    beta: float, m: LevyMeasure, resolution: int = DEFAULT_GRID_RESOLUTION
) -> LevyMeasure:
    """Image of a jump measure under (t, x) -> t^{1/beta} x, t uniform.

    Stable power components stay in family (weights scale by
    beta/(beta+p)); everything else materializes as a grid density
    carrying its exact image density as profile.
    """
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    atoms_out = ()
    grids = []
    named = []
    for at in m.atoms:
        neg = at.x < 0.0
        grids.append(_materialize(_atom_push_profile(at, beta), _log_grid(abs(at.x), resolution), neg))
    for comp in m.named:
        if isinstance(comp, StablePower):
            scale = beta / (beta + comp.p)
            named.append(StablePower(comp.p, comp.c_plus * scale, comp.c_minus * scale))
        else:
            x_hi = 46.0 / comp.lam
            grids.append(_materialize(_exp_push_profile(comp, beta), _log_grid(x_hi, resolution), False))
    for grid in m.grids:
        for negative in (False, True):
            knots = _grid_side(grid, negative)
            if knots.size == 0:
                continue
            grids.append(
                _materialize(
                    _grid_push_profile(grid, beta, negative),
                    _log_grid(knots[-1], resolution),
                    negative,
                )
            )
    return LevyMeasure(atoms=atoms_out, grids=tuple(grids), named=tuple(named))


def map_triplet(
    beta: float, t: LevyTriplet, resolution: int = DEFAULT_GRID_RESOLUTION
) -> LevyTriplet:
    """Closed-form image of a triplet under the power-clock map."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    b = truncated_mean(t.measure, beta)
    return LevyTriplet(
        shift=beta / (beta + 1.0) * (t.shift + b),
        gaussian_variance=beta / (beta + 2.0) * t.gaussian_variance,
        measure=pushforward_measure(beta, t.measure, resolution),
    )


def map_exponent(beta: float, phi: CharExponent, tol: float = 1e-10) -> CharExponent:
    """Exponent route: Phi'(y) = int_0^1 Phi(u y) beta u^{beta-1} du."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")

    def one(y: float) -> complex:
        if y == 0.0:
            return 0.0j
        res = adaptive_quad(
            lambda u: np.asarray(phi(u * y)) * beta * u ** (beta - 1.0),
            0.0,
            1.0,
            tol=tol,
        )
        return res.value

    def eval_phi(y):
        y_in = np.asarray(y, dtype=float)
        if y_in.ndim == 0:
            return one(float(y_in))
        return np.array([one(float(v)) for v in y_in])

    return CharExponent(eval=eval_phi, provenance="quadrature-composed")


def compose_exponent(
    alpha: float, beta: float, phi: CharExponent, tol: float = 1e-10
) -> CharExponent:
    """Both maps at once: Phi'(y) = int_0^1 Phi(u y) r'(u) du."""
    clock = time_change(alpha, beta)

    def one(y: float) -> complex:
        if y == 0.0:
            return 0.0j
        res = adaptive_quad(
            lambda u: np.asarray(phi(u * y)) * clock.derivative(u),
            0.0,
            1.0,
            tol=tol,
        )
        return res.value

    def eval_phi(y):
        y_in = np.asarray(y, dtype=float)
        if y_in.ndim == 0:
            return one(float(y_in))
        return np.array([one(float(v)) for v in y_in])

    return CharExponent(eval=eval_phi, provenance="quadrature-composed")


def _composed_shift(alpha: float, beta: float, t: LevyTriplet) -> float:
    """Composed shift, with the two displayed forms cross-checked."""
    b_a = truncated_mean(t.measure, alpha)
    b_b = truncated_mean(t.measure, beta)
    delta = beta - alpha
    a_alpha = alpha / (alpha + 1.0) * (t.shift + b_a)
    a_beta = beta / (beta + 1.0) * (t.shift + b_b)
    combination = beta / delta * a_alpha - alpha / delta * a_beta
    direct = alpha * beta / ((1.0 + alpha) * (1.0 + beta)) * t.shift + alpha * beta / delta * (
        b_a / (alpha + 1.0) - b_b / (beta + 1.0)
    )
    if abs(combination - direct) > 1e-9 * max(1.0, abs(combination)):
        warnings.warn(
            f"composed-shift displays disagree: {combination!r} vs {direct!r}",
            RuntimeWarning,
        )
    return direct


def compose_triplet(
    alpha: float,
    beta: float,
    t: LevyTriplet,
    resolution: int = DEFAULT_GRID_RESOLUTION,
) -> LevyTriplet:
    """Closed-form triplet of the composition of the two maps.

    For alpha != beta every parameter is the linear combination
    beta/(beta-alpha) (alpha-image) - alpha/(beta-alpha) (beta-image);
    the measure combination is evaluated densitywise (it is a positive
    measure, enforced by a -1e-9 floor). alpha = beta falls back to
    applying the single map twice, where the closed forms are singular.
    """
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("alpha and beta must be positive")
    if alpha == beta:
        return map_triplet(beta, map_triplet(beta, t, resolution), resolution)

    delta = beta - alpha
    shift = _composed_shift(alpha, beta, t)
    variance = alpha / (2.0 + alpha) * beta / (2.0 + beta) * t.gaussian_variance

    grids = []
    named = []
    for at in t.measure.atoms:
        grids.append(
            _materialize(
                _atom_compose_profile(at, alpha, beta),
                _log_grid(abs(at.x), resolution),
                at.x < 0.0,
            )
        )
    for comp in t.measure.named:
        if isinstance(comp, StablePower):
            scale = alpha * beta / ((alpha + comp.p) * (beta + comp.p))
            named.append(StablePower(comp.p, comp.c_plus * scale, comp.c_minus * scale))
        else:
            x_hi = 46.0 / comp.lam
            grids.append(
                _materialize(_exp_compose_profile(comp, alpha, beta), _log_grid(x_hi, resolution), False)
            )
    for grid in t.measure.grids:
        for negative in (False, True):
            knots = _grid_side(grid, negative)
            if knots.size == 0:
                continue
            p_a = _grid_push_profile(grid, alpha, negative)
            p_b = _grid_push_profile(grid, beta, negative)
            combined = (
                lambda q, p_a=p_a, p_b=p_b: beta / delta * p_a(q) - alpha / delta * p_b(q)
            )
            grids.append(_materialize(combined, _log_grid(knots[-1], resolution), negative))

    return LevyTriplet(
        shift=shift,
        gaussian_variance=variance,
        measure=LevyMeasure(grids=tuple(grids), named=tuple(named)),
    )


def factorization_residual(
    alpha: float, beta: float, phi: CharExponent, y: float, tol: float = 1e-10
) -> complex:
    """(beta-alpha) Phi_comp(y) - beta Phi_alpha(y) + alpha Phi_beta(y).

    Zero (up to quadrature) by the convolution factorization identity;
    all three terms come from the quadrature route.
    """
    if not 0.0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta")
    phi_ab = compose_exponent(alpha, beta, phi, tol=tol)
    phi_a = map_exponent(alpha, phi, tol=tol)
    phi_b = map_exponent(beta, phi, tol=tol)
    return (beta - alpha) * phi_ab(y) - beta * phi_a(y) + alpha * phi_b(y)


def inclusion_factor(alpha: float, beta: float, nu: LevyTriplet,
                     resolution: int = DEFAULT_GRID_RESOLUTION) -> LevyTriplet:
    """The law rho with (beta-map of rho) = (alpha-map of nu).

    rho = (alpha-map of nu^{*(1 - alpha/beta)}) convolved with
    nu^{*(alpha/beta)}; witnesses that the alpha-map range sits inside
    the beta-map range.
    """
    if not 0.0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta (strictly)")
    left = map_triplet(alpha, convolution_power(nu, 1.0 - alpha / beta), resolution)
    right = convolution_power(nu, alpha / beta)
    return convolve(left, right)
