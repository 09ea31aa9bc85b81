"""Muckenhoupt weights, weighted norms, the Hölder index relation, and a
dyadic Calderón–Zygmund decomposition.

Weight convention: norms take the measure *density* directly — callers
working with a weight w at exponent p pass density = w^p.  The
``as_density`` helper performs that conversion explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as sintegrate

from . import grid as g
from .errors import (
    ConfigurationError,
    ContractError,
    DegenerateDomainError,
    ParameterError,
)


@dataclass(frozen=True)
class WeightFn:
    """Nonnegative locally integrable weight.

    ``power`` is set for the |x|^a fixtures, unlocking exact closed-form
    cube integrals; generic weights fall back to adaptive quadrature.
    """

    dimension: int
    rule: Callable[..., np.ndarray]
    tag: str = "generic"
    power: float | None = None

    def pow(self, s: float) -> "WeightFn":
        if self.power is not None:
            return power_weight(self.power * s, self.dimension)
        rule = self.rule
        return WeightFn(self.dimension, lambda *xs: rule(*xs) ** s,
                        tag=f"({self.tag})^{s:g}")


def constant_weight(n: int = 1, c: float = 1.0) -> WeightFn:
    return WeightFn(n, lambda *xs: np.full_like(np.asarray(xs[0], float), c),
                    tag=f"const:{c:g}", power=None)


def power_weight(a: float, n: int = 1) -> WeightFn:
    """|x|^a; exact cube integrals require a > -n."""
    if a <= -n:
        raise ParameterError(f"|x|^{a} is not locally integrable in R^{n}")

    def rule(*xs):
        r = np.sqrt(sum(np.asarray(x, float) ** 2 for x in xs))
        with np.errstate(divide="ignore"):
            return r ** a

    return WeightFn(n, rule, tag=f"power:{a:g}", power=a)


def power_ap_range(a: float, p: float, n: int = 1) -> bool:
    """Membership |x|^a in A_p, i.e. -n < a < n(p-1)."""
    if p <= 1:
        raise ParameterError("need p > 1")
    return -n < a < n * (p - 1)


def dual_exponent(p: float) -> float:
    if p <= 1:
        raise ParameterError("dual exponent needs p > 1")
    return p / (p - 1)


def dual_weight(w: WeightFn, p: float) -> WeightFn:
    """w^(1-p'), the density appearing opposite w in the A_p product."""
    return w.pow(1.0 - dual_exponent(p))


def as_density(w: WeightFn, p: float) -> WeightFn:
    """Measure density w^p of the space L^p(w^p)."""
    return w.pow(p)


# ---------------------------------------------------------------------------
# cube integrals


def _power_antideriv(x: np.ndarray, a: float) -> np.ndarray:
    """Antiderivative of |x|^a in 1-D: sign(x)|x|^(a+1)/(a+1)."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** (a + 1.0) / (a + 1.0)


def cube_integral(w: WeightFn, box: g.Box) -> float:
    """Integral of w over a box; closed form for 1-D power weights."""
    if w.power is not None and w.dimension == 1:
        lo = box.corner[0]
        return float(_power_antideriv(lo + box.side, w.power)
                     - _power_antideriv(lo, w.power))
    if w.dimension == 1:
        lo = box.corner[0]
        pts = [p for p in (0.0,) if lo < p < lo + box.side]
        val, _ = sintegrate.quad(lambda x: float(w.rule(np.array([x]))[0]),
                                 lo, lo + box.side, points=pts or None,
                                 limit=200)
        return float(val)
    lo0, lo1 = box.corner
    val, _ = sintegrate.dblquad(
        lambda y, x: float(np.atleast_1d(w.rule(np.array([x]), np.array([y])))[0]),
        lo0, lo0 + box.side, lo1, lo1 + box.side)
    return float(val)


def cube_average(w: WeightFn, box: g.Box) -> float:
    return cube_integral(w, box) / box.volume


def set_integral(w: WeightFn, pieces: Sequence[g.Box]) -> float:
    """Integral of w over a disjoint finite union of boxes."""
    return sum(cube_integral(w, piece) for piece in pieces)


# ---------------------------------------------------------------------------
# A_p constant


@dataclass(frozen=True)
class ApEstimate:
    """Certified lower bound for [w]_{A_p} over a finite cube family."""

    p: float
    value: float
    cube: g.Box
    family_size: int

    def __post_init__(self):
        if self.value < 1.0 - 1e-9:
            raise ContractError("A_p estimate below 1 violates Jensen")


def ap_constant(w: WeightFn, p: float, cubes: Sequence[g.Box]) -> ApEstimate:
    """max over the family of (avg_Q w)(avg_Q w^(1-p'))^(p-1)."""
    if p <= 1:
        raise ParameterError("A_p constants are defined for p > 1")
    cubes = list(cubes)
    if not cubes:
        raise ParameterError("cube family must be nonempty")
    sigma = dual_weight(w, p)
    best = -np.inf
    best_cube = cubes[0]
    if w.power is not None and w.dimension == 1:
        los = np.array([q.corner[0] for q in cubes])
        sides = np.array([q.side for q in cubes])
        aw = (_power_antideriv(los + sides, w.power)
              - _power_antideriv(los, w.power)) / sides
        asg = (_power_antideriv(los + sides, sigma.power)
               - _power_antideriv(los, sigma.power)) / sides
        vals = aw * asg ** (p - 1.0)
        i = int(np.argmax(vals))
        best, best_cube = float(vals[i]), cubes[i]
    else:
        for q in cubes:
            aw = cube_average(w, q)
            asg = cube_average(sigma, q)
            if aw <= 0 or asg <= 0:
                raise DegenerateDomainError(
                    f"weight has zero average on cube {q}")
            v = aw * asg ** (p - 1.0)
            if v > best:
                best, best_cube = v, q
    return ApEstimate(p=p, value=max(best, 1.0), cube=best_cube,
                      family_size=len(cubes))


# ---------------------------------------------------------------------------
# weighted norms


def node_density(w: WeightFn, f: g.SampledFunction) -> np.ndarray:
    """Density sampled at f's nodes; singular nodes of power weights get
    the exact cell-average value so trapezoid sums stay finite."""
    vals = np.asarray(w.rule(*f.meshes()), dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        if w.power is None or w.dimension != 1:
            raise ConfigurationError("weight is singular at a grid node")
        x = f.coords()[0]
        half = f.h / 2.0
        cell = (_power_antideriv(x + half, w.power)
                - _power_antideriv(x - half, w.power)) / f.h
        vals = np.where(bad, cell, vals)
    return vals


def weighted_lp_norm(
    f: g.SampledFunction,
    density: WeightFn | None,
    p: float,
    mask: np.ndarray | None = None,
) -> float:
    """(integral |f|^p density dx)^(1/p); quasi-norms p < 1 permitted."""
    if p <= 0:
        raise ParameterError("exponent must be positive")
    dens = 1.0 if density is None else node_density(density, f)
    quad = g.trapezoid_mass(f)
    if mask is not None:
        quad = np.where(mask, quad, 0.0)
    total = float(np.sum(np.abs(f.values) ** p * dens * quad))
    return total ** (1.0 / p)


def holder_index(ps: Sequence[float]) -> float:
    """p with 1/p = sum of 1/p_i."""
    ps = list(ps)
    if not ps:
        raise ParameterError("need at least one exponent")
    for pi in ps:
        if not (1.0 < pi < np.inf):
            raise ParameterError(f"exponent {pi} outside (1, inf)")
    return 1.0 / sum(1.0 / pi for pi in ps)


# ---------------------------------------------------------------------------
# Calderón–Zygmund decomposition


def merge_intervals(pieces: Sequence[g.Box]) -> list[g.Box]:
    """Disjoint ordered union of 1-D boxes."""
    ivals = sorted((p.corner[0], p.corner[0] + p.side) for p in pieces)
    out: list[tuple[float, float]] = []
    for lo, hi in ivals:
        if out and lo <= out[-1][1] + 1e-12:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return [g.interval(lo, hi) for lo, hi in out]


def _overlap_measure(pieces: Sequence[g.Box], q: g.Box) -> float:
    """|E ∩ Q| for E a disjoint union of boxes."""
    total = 0.0
    for piece in pieces:
        part = 1.0
        for lo, plo, side, pside in zip(q.corner, piece.corner,
                                        (q.side,) * q.dimension,
                                        (piece.side,) * piece.dimension):
            left = max(lo, plo)
            right = min(lo + side, plo + pside)
            part *= max(0.0, right - left)
        total += part
    return total


def cz_decompose(
    pieces: Sequence[g.Box],
    lam: float,
    root: g.Box,
    max_depth: int = 24,
) -> list[g.Box]:
    """Maximal dyadic subcubes of ``root`` on which the average of the
    indicator of E = union(pieces) exceeds ``lam``.

    E must be a finite union of boxes; 1-D unions are merged first, in
    2-D the pieces must already be disjoint.  Selected cubes are returned
    in deterministic depth-first order.
    """
    if not (0 < lam < 1):
        raise ParameterError("height must lie in (0, 1)")
    if not pieces:
        return []
    n = root.dimension
    if n == 1:
        pieces = merge_intervals(pieces)
    selected: list[g.Box] = []

    def descend(q: g.Box, depth: int) -> None:
        meas = _overlap_measure(pieces, q)
        if meas <= 0:
            return
        if meas / q.volume > lam:
            selected.append(q)
            return
        if depth >= max_depth:
            return
        half = q.side / 2.0
        for shift in np.ndindex(*(2,) * n):
            child = g.Box(
                tuple(c + s * half for c, s in zip(q.corner, shift)), half)
            descend(child, depth + 1)

    descend(root, 0)
    return selected


# ---------------------------------------------------------------------------
# weighted norm of the shifted kernel (finiteness check)


def lemma44_norm(w: WeightFn, p: float, x0: float, d: float) -> float:
    """||(d + |x - x0|)^{-n}||_{L^p(w)} over the whole line (n = 1),
    by adaptive quadrature with the true infinite tails."""
    if d <= 0:
        raise ParameterError("radius must be positive")
    if w.dimension != 1:
        raise ParameterError("implemented in 1-D")

    def integrand(x):
        return float((d + abs(x - x0)) ** (-p)
                     * np.atleast_1d(w.rule(np.array([x])))[0])

    pts = sorted({0.0, x0})
    total = 0.0
    bounds = [-np.inf] + pts + [np.inf]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        val, _ = sintegrate.quad(integrand, lo, hi, limit=400)
        total += val
    return total ** (1.0 / p)


def lemma44_ratio(w: WeightFn, p: float, x0: float, d: float) -> float:
    """The norm above times d^n, divided by ||chi_B(x0,d)||_{L^p(w)} —
    bounded by an absolute constant along power-weight fixtures."""
    ball = g.interval(x0 - d, x0 + d)
    ball_norm = cube_integral(w, ball) ** (1.0 / p)
    return lemma44_norm(w, p, x0, d) * d / ball_norm
