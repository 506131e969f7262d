"""Levy-Khintchine data model on the real line.

An infinitely divisible law is held as a triplet [shift, gaussian
variance, jump measure]; its log-characteristic function is

    Phi(y) = i a y - R y^2 / 2
             + int (e^{iyx} - 1 - iyx 1_{[-1,1]}(x)) M(dx),

with the closed unit ball as the compensation region. Jump measures are
formal sums of atoms, piecewise-linear grid densities and two analytic
families (one-sided exponential tail, two-sided stable power). A measure
is admissible iff  int min(1, x^2) M(dx) < infinity.

Grid densities materialized by the mapping module keep, alongside the
knot values, the exact density they sample (``profile``); integrals
prefer the profile so that repeated mappings do not accumulate
piecewise-linear interpolation error. Serialization and sampling see
only the knots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .numerics import gk15_panel_nodes, incomplete_gamma_upper, refine_edges

__all__ = [
    "Atom",
    "ExponentialTail",
    "StablePower",
    "GridDensity",
    "LevyMeasure",
    "LevyTriplet",
    "CharExponent",
    "MeasureValidation",
    "InvalidMeasureError",
    "validate_measure",
    "levy_exponent",
    "convolve",
    "convolution_power",
    "shift_delta",
    "truncated_mean",
]

_EULER_GAMMA = 0.5772156649015328606


class InvalidMeasureError(ValueError):
    """The jump measure fails the min(1, x^2) integrability criterion."""


@dataclass(frozen=True)
class Atom:
    """Point mass of the jump measure: ``mass`` at location ``x``."""

    x: float
    mass: float


@dataclass(frozen=True)
class ExponentialTail:
    """Density weight * e^{-lam x} / x on (0, infinity)."""

    lam: float
    weight: float = 1.0


@dataclass(frozen=True)
class StablePower:
    """Density c_plus x^{-p-1} on (0, inf) and c_minus |x|^{-p-1} on (-inf, 0)."""

    p: float
    c_plus: float
    c_minus: float = 0.0


class GridDensity:
    """Piecewise-linear density on strictly increasing nonzero abscissae.

    Zero outside the abscissa range. ``profile``, when given, is the exact
    density the knots sample; it is consulted by integration routines but
    never serialized. Construction rejects grids whose implied unevaluated
    min(1, x^2)-mass between the origin and the innermost abscissa exceeds
    1e-6, so that truncation toward 0 stays visible.
    """

    __slots__ = ("x", "values", "profile")

    def __init__(self, x, values, profile: Optional[Callable] = None):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or values.ndim != 1 or x.size != values.size:
            raise InvalidMeasureError("grid abscissae and values must be 1-D and equally long")
        if x.size < 2:
            raise InvalidMeasureError("grid needs at least two abscissae")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(values)):
            raise InvalidMeasureError("grid entries must be finite")
        if np.any(x == 0.0):
            raise InvalidMeasureError("grid abscissae must be nonzero")
        if np.any(np.diff(x) <= 0.0):
            raise InvalidMeasureError("grid abscissae must be strictly increasing")
        if np.any(values < 0.0):
            raise InvalidMeasureError("grid density values must be nonnegative")
        inner = None
        if x[0] > 0.0:
            inner = (abs(x[0]), values[0])
        elif x[-1] < 0.0:
            inner = (abs(x[-1]), values[-1])
        if inner is not None:
            edge, v = inner
            implied = v * (edge**3 / 3.0 if edge <= 1.0 else 1.0 / 3.0 + edge - 1.0)
            if implied > 1e-6:
                raise InvalidMeasureError(
                    f"unevaluated min(1,x^2)-mass {implied:.3e} at the inner grid edge "
                    "exceeds 1e-6; extend the grid toward 0"
                )
        x.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "profile", profile)

    def __setattr__(self, name, value):
        raise AttributeError("GridDensity is immutable")

    def interp_density(self, q) -> np.ndarray:
        """Piecewise-linear interpolant, zero outside the grid support."""
        return np.interp(np.asarray(q, dtype=float), self.x, self.values, left=0.0, right=0.0)

    def density(self, q) -> np.ndarray:
        """Exact profile when available, interpolant otherwise."""
        if self.profile is not None:
            return np.asarray(self.profile(np.asarray(q, dtype=float)), dtype=float)
        return self.interp_density(q)

    def __eq__(self, other):
        return (
            isinstance(other, GridDensity)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return (
            f"GridDensity(n={self.x.size}, support=[{self.x[0]:.6g}, {self.x[-1]:.6g}], "
            f"profile={'yes' if self.profile is not None else 'no'})"
        )


NamedComponent = Union[ExponentialTail, StablePower]


@dataclass(frozen=True)
class LevyMeasure:
    """Formal sum of atoms, grid densities and named analytic components."""

    atoms: tuple = ()
    grids: tuple = ()
    named: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "grids", tuple(self.grids))
        object.__setattr__(self, "named", tuple(self.named))

    @property
    def is_zero(self) -> bool:
        return not (self.atoms or self.grids or self.named)

    @staticmethod
    def zero() -> "LevyMeasure":
        return LevyMeasure()

    @staticmethod
    def from_atoms(*pairs) -> "LevyMeasure":
        return LevyMeasure(atoms=tuple(Atom(float(x), float(m)) for x, m in pairs))


@dataclass(frozen=True)
class MeasureValidation:
    """Outcome of the integrability check, with the computed integral."""

    valid: bool
    integral: float
    problems: tuple = ()


def _grid_edges(grid: GridDensity) -> np.ndarray:
    """Panel edges for integrating over a grid: knots plus splits at +-1."""
    edges = list(grid.x)
    for brk in (-1.0, 1.0):
        if grid.x[0] < brk < grid.x[-1] and brk not in grid.x:
            edges.append(brk)
    return np.array(sorted(edges))


def _grid_integral(grid: GridDensity, fn: Callable[[np.ndarray], np.ndarray]) -> float:
    """Fixed-panel integral of fn(x) * density(x) over the grid support."""
    pts, wts = gk15_panel_nodes(_grid_edges(grid))
    return float(np.sum(wts * grid.density(pts) * fn(pts)))


def validate_measure(m: LevyMeasure) -> MeasureValidation:
    """Check int min(1, x^2) M(dx) < infinity and report its value."""
    problems = []
    total = 0.0
    for a in m.atoms:
        if a.x == 0.0 or not math.isfinite(a.x):
            problems.append(f"atom at x={a.x}: location must be nonzero and finite")
            continue
        if not a.mass > 0.0:
            problems.append(f"atom at x={a.x}: mass {a.mass} must be positive")
            continue
        total += a.mass * min(1.0, a.x * a.x)
    for comp in m.named:
        if isinstance(comp, ExponentialTail):
            if not comp.lam > 0.0:
                problems.append(f"exponential tail: rate {comp.lam} must be positive")
                continue
            if comp.weight < 0.0:
                problems.append(f"exponential tail: weight {comp.weight} must be nonnegative")
                continue
            lam = comp.lam
            total += comp.weight * (
                (1.0 - (1.0 + lam) * math.exp(-lam)) / lam**2
                + incomplete_gamma_upper(0.0, lam)
            )
        elif isinstance(comp, StablePower):
            if not (0.0 < comp.p < 2.0):
                problems.append(
                    f"stable power: tail index p={comp.p} must lie strictly in (0, 2)"
                )
                continue
            if comp.c_plus < 0.0 or comp.c_minus < 0.0:
                problems.append("stable power: tail weights must be nonnegative")
                continue
            total += (comp.c_plus + comp.c_minus) * (1.0 / (2.0 - comp.p) + 1.0 / comp.p)
        else:
            problems.append(f"unknown named component {type(comp).__name__}")
    for grid in m.grids:
        total += _grid_integral(grid, lambda x: np.minimum(1.0, x * x))
    if not math.isfinite(total):
        problems.append("min(1, x^2) integral is not finite")
    return MeasureValidation(valid=not problems, integral=total, problems=tuple(problems))


@dataclass(frozen=True)
class LevyTriplet:
    """[shift, gaussian_variance, measure]; validated at construction."""

    shift: float = 0.0
    gaussian_variance: float = 0.0
    measure: LevyMeasure = field(default_factory=LevyMeasure)

    def __post_init__(self):
        if not math.isfinite(self.shift):
            raise ValueError("shift must be finite")
        if not (self.gaussian_variance >= 0.0 and math.isfinite(self.gaussian_variance)):
            raise ValueError("gaussian_variance must be finite and nonnegative")
        report = validate_measure(self.measure)
        if not report.valid:
            raise InvalidMeasureError("; ".join(report.problems))


@dataclass(frozen=True)
class CharExponent:
    """Log-characteristic function y -> Phi(y), with a provenance tag.

    ``eval`` accepts a float or a 1-D ndarray and returns matching complex
    output. Invariants: Phi(0) = 0, Phi(-y) = conj(Phi(y)), Re Phi <= 0.
    """

    eval: Callable
    provenance: str

    def __call__(self, y):
        return self.eval(y)


def _kernel(y: float, x: np.ndarray) -> np.ndarray:
    """Integrand e^{iyx} - 1 - iyx 1_{|x|<=1} of the jump part."""
    return np.exp(1j * y * x) - 1.0 - 1j * y * x * (np.abs(x) <= 1.0)


def _stable_psi_positive(p: float, y: np.ndarray) -> np.ndarray:
    """int_0^inf (e^{iyx} - 1 - iyx 1_{x<=1}) x^{-p-1} dx for y > 0."""
    if p == 1.0:
        return -0.5 * math.pi * y + 1j * y * (1.0 - _EULER_GAMMA - np.log(y))
    return (
        math.gamma(-p) * np.power(y, p) * np.exp(-0.5j * math.pi * p)
        + 1j * y / (p - 1.0)
    )


def _stable_exponent(comp: StablePower, y: np.ndarray) -> np.ndarray:
    out = np.zeros(y.shape, dtype=complex)
    nz = y != 0.0
    ya = np.abs(y[nz])
    psi = _stable_psi_positive(comp.p, ya)
    val = comp.c_plus * psi + comp.c_minus * np.conj(psi)
    out[nz] = np.where(y[nz] > 0.0, val, np.conj(val))
    return out


def _exponential_exponent(comp: ExponentialTail, y: np.ndarray) -> np.ndarray:
    lam = comp.lam
    return comp.weight * (
        -np.log(1.0 - 1j * y / lam) - 1j * y * (1.0 - math.exp(-lam)) / lam
    )


class _GridExponentPart:
    """Jump-part contribution of one grid density, evaluated per y.

    Node positions and density values on the knot panels are cached once;
    panels wide relative to the oscillation length 1/|y| are re-subdivided
    on the fly (only where their mass matters) so coarse user grids stay
    accurate at large |y|.
    """

    def __init__(self, grid: GridDensity):
        self.grid = grid
        self.edges = _grid_edges(grid)
        pts, wts = gk15_panel_nodes(self.edges)
        self.pts = pts
        self.wdens = wts * grid.density(pts)
        self.widths = np.diff(self.edges)
        self.panel_mass = np.abs(self.wdens).reshape(-1, 15).sum(axis=1)

    def __call__(self, y: float) -> complex:
        ay = abs(y)
        needs = (ay * self.widths > 0.5) & (
            self.panel_mass * (2.0 + ay * np.maximum(np.abs(self.edges[:-1]), np.abs(self.edges[1:])))
            > 1e-16
        )
        if not needs.any():
            return complex(np.sum(self.wdens * _kernel(y, self.pts)))
        keep = np.repeat(~needs, 15)
        total = complex(np.sum(self.wdens[keep] * _kernel(y, self.pts[keep])))
        for i in np.nonzero(needs)[0]:
            sub = refine_edges(self.edges[i : i + 2], 0.5 / ay)
            pts, wts = gk15_panel_nodes(sub)
            total += complex(np.sum(wts * self.grid.density(pts) * _kernel(y, pts)))
        return total


def levy_exponent(t: LevyTriplet) -> CharExponent:
    """Build the exponent of a triplet; analytic wherever possible.

    Atoms are summed exactly, the named families use closed forms, grid
    densities are integrated with fixed Gauss-Kronrod panels aligned to
    their knots (split at +-1 for the compensation kink).
    """
    a = t.shift
    R = t.gaussian_variance
    m = t.measure
    atom_x = np.array([at.x for at in m.atoms])
    atom_w = np.array([at.mass for at in m.atoms])
    grid_parts = [_GridExponentPart(g) for g in m.grids]
    named = m.named

    def eval_phi(y):
        y_in = np.asarray(y, dtype=float)
        scalar = y_in.ndim == 0
        ys = np.atleast_1d(y_in)
        out = 1j * a * ys - 0.5 * R * ys**2
        out = out.astype(complex)
        if atom_x.size:
            comp = np.abs(atom_x) <= 1.0
            for i, yv in enumerate(ys):
                out[i] += np.sum(
                    atom_w * (np.exp(1j * yv * atom_x) - 1.0 - 1j * yv * atom_x * comp)
                )
        for comp in named:
            if isinstance(comp, ExponentialTail):
                out += _exponential_exponent(comp, ys)
            else:
                out += _stable_exponent(comp, ys)
        for part in grid_parts:
            for i, yv in enumerate(ys):
                out[i] += part(float(yv))
        return out[0] if scalar else out

    return CharExponent(eval=eval_phi, provenance="analytic-from-triplet")


def convolve(t1: LevyTriplet, t2: LevyTriplet) -> LevyTriplet:
    """Convolution of laws: shifts and variances add, measures concatenate."""
    return LevyTriplet(
        shift=t1.shift + t2.shift,
        gaussian_variance=t1.gaussian_variance + t2.gaussian_variance,
        measure=LevyMeasure(
            atoms=t1.measure.atoms + t2.measure.atoms,
            grids=t1.measure.grids + t2.measure.grids,
            named=t1.measure.named + t2.measure.named,
        ),
    )


def _scale_named(comp: NamedComponent, c: float) -> NamedComponent:
    if isinstance(comp, ExponentialTail):
        return ExponentialTail(lam=comp.lam, weight=comp.weight * c)
    return StablePower(p=comp.p, c_plus=comp.c_plus * c, c_minus=comp.c_minus * c)


def _scale_grid(grid: GridDensity, c: float) -> GridDensity:
    profile = None
    if grid.profile is not None:
        base = grid.profile
        profile = lambda q: c * np.asarray(base(q))  # noqa: E731
    return GridDensity(grid.x, c * grid.values, profile=profile)


def convolution_power(t: LevyTriplet, c: float) -> LevyTriplet:
    """The c-th convolution power: every triplet component scales by c."""
    if not (c > 0.0 and math.isfinite(c)):
        raise ValueError("convolution power requires c > 0")
    m = t.measure
    return LevyTriplet(
        shift=c * t.shift,
        gaussian_variance=c * t.gaussian_variance,
        measure=LevyMeasure(
            atoms=tuple(Atom(at.x, c * at.mass) for at in m.atoms),
            grids=tuple(_scale_grid(g, c) for g in m.grids),
            named=tuple(_scale_named(n, c) for n in m.named),
        ),
    )


def shift_delta(t: LevyTriplet, x0: float) -> LevyTriplet:
    """Convolve with a point mass at x0: only the shift moves."""
    return LevyTriplet(t.shift + x0, t.gaussian_variance, t.measure)


def _truncated_mean_named(comp: NamedComponent, beta: float) -> float:
    if isinstance(comp, ExponentialTail):
        # int_1^inf x^{-1-beta} e^{-lam x} dx = lam^beta Gamma(-beta, lam)
        return comp.weight * comp.lam**beta * incomplete_gamma_upper(-beta, comp.lam)
    return (comp.c_plus - comp.c_minus) / (beta + comp.p)


def truncated_mean(m: LevyMeasure, beta: float) -> float:
    """b = int_{|x|>1} x |x|^{-1-beta} M(dx), the tail mean of the measure."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    total = 0.0
    for at in m.atoms:
        if abs(at.x) > 1.0:
            total += at.mass * at.x * abs(at.x) ** (-1.0 - beta)
    for comp in m.named:
        total += _truncated_mean_named(comp, beta)
    for grid in m.grids:
        for lo, hi in ((1.0, grid.x[-1]), (grid.x[0], -1.0)):
            if hi <= lo:
                continue
            knots = grid.x[(grid.x > lo) & (grid.x < hi)]
            edges = np.concatenate([[lo], knots, [hi]])
            pts, wts = gk15_panel_nodes(edges)
            total += float(
                np.sum(wts * grid.density(pts) * pts * np.abs(pts) ** (-1.0 - beta))
            )
    if not math.isfinite(total):
        raise ValueError("truncated tail mean is not finite")
    return total
