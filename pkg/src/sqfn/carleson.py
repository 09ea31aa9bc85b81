"""Cancellation constants over finite dyadic cube families: the averaged
Carleson constant, its pointwise (strong) strengthening, the two-cube
testing constant, tents with their weighted bound, the embedding ratio,
and the explicit bound-constant formulas.

Every supremum here runs over a finite, deterministically enumerated
family and the reports name the attaining cube (and point), so
divergence is observable as growth along a family sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import grid as g
from . import kernels as K
from . import operators as O
from . import weights as W
from .errors import ConfigurationError, ContractError, ParameterError


@dataclass(frozen=True)
class CubeFamily:
    """Dyadic subcubes of a root box for a range of depths, enumerated
    depth-ascending then lexicographically by corner."""

    root: g.Box
    depth_min: int = 0
    depth_max: int = 4

    def __post_init__(self):
        if not (0 <= self.depth_min <= self.depth_max):
            raise ParameterError("need 0 <= depth_min <= depth_max")

    def cubes(self) -> list[g.Box]:
        out = []
        n = self.root.dimension
        for d in range(self.depth_min, self.depth_max + 1):
            side = self.root.side / 2 ** d
            for multi in np.ndindex(*(2 ** d,) * n):
                corner = tuple(c + i * side
                               for c, i in zip(self.root.corner, multi))
                out.append(g.Box(corner, side))
        return out

    def side_lengths(self) -> list[float]:
        return [self.root.side / 2 ** d
                for d in range(self.depth_min, self.depth_max + 1)]


@dataclass(frozen=True)
class CarlesonField:
    """Density F(x,t) >= 0 of the measure F dtau(t) dx."""

    field: g.ScaleField

    def __post_init__(self):
        if np.any(self.field.values < 0):
            raise ContractError("Carleson density must be nonnegative")

    @property
    def grid(self) -> g.ScaleGrid:
        return self.field.grid


@dataclass(frozen=True)
class CarlesonReport:
    kind: str  # carleson | strong | two-cube
    value: float
    cube: g.Box
    point: float | None = None
    per_cube: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.per_cube:
            best = max(v for _, v in self.per_cube)
            if abs(best - self.value) > 1e-12 * max(abs(best), 1.0):
                raise ContractError("report supremum != max of per-cube values")


# ---------------------------------------------------------------------------
# fields from operators


def theta_one_field(op: O.ThetaOperator, sgrid: g.ScaleGrid) -> CarlesonField:
    """|Theta_t(1,...,1)(x)|^2 on the interior; for convolution-type
    kernels the field must be x-constant per scale (asserted <= 1e-8)."""
    mask = op.mask()
    rows = []
    for t in sgrid.nodes:
        row = O.theta_one(op, t).values
        row = np.where(mask, row, 0.0)
        if op.spec.is_convolution_type:
            inner = row[mask]
            spread = float(np.max(inner) - np.min(inner))
            if spread > 1e-8 * max(1.0, float(np.max(np.abs(inner)))):
                raise ContractError(
                    f"convolution-type field varies in x at t={t}: {spread:.2e}")
        rows.append(np.abs(row) ** 2)
    sf = g.ScaleField(op.box, op.h, sgrid, np.stack(rows), mask=mask)
    return CarlesonField(sf)


def field_from_values(box: g.Box, h: float, sgrid: g.ScaleGrid,
                      values: np.ndarray,
                      mask: np.ndarray | None = None) -> CarlesonField:
    return CarlesonField(g.ScaleField(box, h, sgrid, values, mask=mask))


# ---------------------------------------------------------------------------
# the three constants


def _cube_node_selectors(fld: g.ScaleField, q: g.Box):
    """(x-node mask of Q, trapezoid weights over Q) on the field grid."""
    if not _box_within(fld.box, q):
        raise ConfigurationError(f"cube {q} leaves the field box")
    axes = fld.box.axis_nodes(fld.h)
    sels = []
    for x, lo, hi in zip(axes, q.corner, q.upper):
        sel = (x >= lo - 1e-12) & (x <= hi + 1e-12)
        if np.count_nonzero(sel) < 2:
            raise ConfigurationError(
                f"cube of side {q.side} unresolved at spacing {fld.h}")
        sels.append(sel)
    if fld.box.dimension == 1:
        node_mask = sels[0]
        w = np.zeros_like(axes[0])
        idx = np.flatnonzero(sels[0])
        w[idx] = fld.h
        w[idx[0]] = w[idx[-1]] = fld.h / 2.0
    else:
        node_mask = np.logical_and.outer(sels[0], sels[1])
        ws = []
        for sel in sels:
            wa = np.zeros(sel.size)
            idx = np.flatnonzero(sel)
            wa[idx] = fld.h
            wa[idx[0]] = wa[idx[-1]] = fld.h / 2.0
            ws.append(wa)
        w = np.multiply.outer(ws[0], ws[1])
    return node_mask, w


def _box_within(outer: g.Box, q: g.Box) -> bool:
    return all(lo >= c - 1e-12 and lo + q.side <= c + outer.side + 1e-12
               for lo, c in zip(q.corner, outer.corner))


def _scale_profiles(cf: CarlesonField, sides: Sequence[float]) -> dict:
    """Per side length l: G_l(x) = scale integral of F over t <= l."""
    fld = cf.field
    t = cf.grid.nodes
    w = cf.grid.weights
    out = {}
    for side in sides:
        sel = t <= side + 1e-12
        ww = np.where(sel, w, 0.0).reshape((-1,) + (1,) * fld.box.dimension)
        out[side] = np.sum(fld.values * ww, axis=0)
    return out


def carleson_constant(cf: CarlesonField, family: CubeFamily) -> CarlesonReport:
    """sup over cubes of |Q|^-1 times the measure of the box over Q up to
    scale l(Q)."""
    profiles = _scale_profiles(cf, family.side_lengths())
    per_cube = []
    for q in family.cubes():
        _, wq = _cube_node_selectors(cf.field, q)
        val = float(np.sum(profiles[q.side] * wq)) / q.volume
        per_cube.append((q, val))
    q_best, v_best = max(per_cube, key=lambda kv: kv[1])
    return CarlesonReport(kind="carleson", value=v_best, cube=q_best,
                          per_cube=tuple(per_cube))


def strong_carleson_constant(cf: CarlesonField,
                             family: CubeFamily) -> CarlesonReport:
    """As above with the inner average replaced by the sup over nodes."""
    profiles = _scale_profiles(cf, family.side_lengths())
    per_cube = []
    points = []
    axes_flat = cf.field.box.axis_nodes(cf.field.h)
    for q in family.cubes():
        node_mask, _ = _cube_node_selectors(cf.field, q)
        prof = profiles[q.side]
        vals = np.where(node_mask, prof, -np.inf)
        flat = int(np.argmax(vals))
        val = float(vals.flat[flat])
        per_cube.append((q, val))
        if cf.field.box.dimension == 1:
            points.append(float(axes_flat[0][flat]))
        else:
            i, j = np.unravel_index(flat, vals.shape)
            points.append((float(axes_flat[0][i]), float(axes_flat[1][j])))
    i_best = int(np.argmax([v for _, v in per_cube]))
    q_best, v_best = per_cube[i_best]
    return CarlesonReport(kind="strong", value=v_best, cube=q_best,
                          point=points[i_best], per_cube=tuple(per_cube))


def strong_point_value(cf: CarlesonField, q: g.Box, x) -> float:
    """Scale integral of F(x, t) over t <= l(Q) at one grid node of Q."""
    if not q.contains_point(x if isinstance(x, tuple) else (x,)):
        raise ContractError("evaluation point must lie in the cube")
    probe = g.ones_like(cf.field.box, cf.field.h)
    idx = probe.node_index(x if isinstance(x, tuple) else (x,))
    profile = _scale_profiles(cf, [q.side])[q.side]
    return float(profile[idx])


def two_cube_constant(op: O.ThetaOperator, pairs: Sequence[tuple[g.Box, g.Box]],
                      sgrid: g.ScaleGrid) -> CarlesonReport:
    """max over nested pairs R inside Q of the R-averaged scale integral
    over (l(R), l(Q)] of |Theta_t applied to the doubled-complement
    indicators of R and Q|^2."""
    per_pair = []
    t = sgrid.nodes
    w = sgrid.weights
    for r_box, q_box in pairs:
        if not q_box.contains(r_box):
            raise ContractError(f"pair not nested: {r_box} not in {q_box}")
        f_r = _complement_indicator(op, O.doubled(r_box))
        f_q = _complement_indicator(op, O.doubled(q_box))
        sel = (t > r_box.side + 1e-12) & (t <= q_box.side + 1e-12)
        acc = np.zeros_like(f_r.values)
        for tj, wj, s in zip(t, w, sel):
            if not s:
                continue
            d_r = O.apply_theta(op, tj, (f_r,) * op.spec.arity).values
            d_q = O.apply_theta(op, tj, (f_q,) * op.spec.arity).values
            acc += wj * (d_r - d_q) ** 2
        _, wq = _cube_node_selectors(op_field(op, sgrid), r_box)
        val = float(np.sum(acc * wq)) / r_box.volume
        per_pair.append(((r_box, q_box), val))
    (r_best, q_best), v_best = max(per_pair, key=lambda kv: kv[1])
    return CarlesonReport(kind="two-cube", value=v_best, cube=q_best,
                          per_cube=tuple(per_pair))


def op_field(op: O.ThetaOperator, sgrid: g.ScaleGrid) -> g.ScaleField:
    """Empty scale-field shell carrying op's grid geometry."""
    shape = (sgrid.nodes.size,) + (op.box.node_count(op.h),) * op.box.dimension
    return g.ScaleField(op.box, op.h, sgrid, np.zeros(shape))


def _complement_indicator(op: O.ThetaOperator, inner: g.Box) -> g.SampledFunction:
    chi = g.indicator(op.box, op.h, [inner])
    return chi.with_values(1.0 - chi.values)


# ---------------------------------------------------------------------------
# tents and the weighted tent bound


def tent(pieces: Sequence[g.Box]):
    """Predicate (x, t) -> ball B(x, t) inside the union of pieces.

    1-D unions are merged exactly; in higher dimension the sufficient
    one-piece condition is used."""
    if pieces and pieces[0].dimension == 1:
        pieces = W.merge_intervals(pieces)

    def inside(x, t: float) -> np.ndarray:
        coords = x if isinstance(x, tuple) else (x,)
        coords = [np.asarray(c, dtype=float) for c in coords]
        ok = np.zeros(np.broadcast_shapes(*[c.shape for c in coords]),
                      dtype=bool)
        for piece in pieces:
            fits = np.ones_like(ok)
            for c, lo, hi in zip(coords, piece.corner, piece.upper):
                fits &= (c - t >= lo - 1e-12) & (c + t <= hi + 1e-12)
            ok |= fits
        return ok

    return inside


def tent_bound_check(cf: CarlesonField, w: W.WeightFn,
                     pieces: Sequence[g.Box],
                     family: CubeFamily) -> tuple[float, float]:
    """(lhs, rhs) of the weighted tent inequality: the w-weighted measure
    of the tent over E against the strong constant times w(E)."""
    fld = cf.field
    if not pieces:
        return 0.0, 0.0
    pred = tent(pieces)
    probe = g.ones_like(fld.box, fld.h)
    wx = W.node_density(w, probe)
    quad = g.trapezoid_mass(probe)
    lhs = 0.0
    axes = fld.box.axis_nodes(fld.h)
    x = axes[0] if fld.box.dimension == 1 else tuple(np.meshgrid(
        *axes, indexing="ij"))
    for tj, wj, row in zip(cf.grid.nodes, cf.grid.weights, fld.values):
        sel = pred(x, tj)
        lhs += wj * float(np.sum(np.where(sel, row * wx * quad, 0.0)))
    sc = strong_carleson_constant(cf, family).value
    merged = (W.merge_intervals(pieces) if fld.box.dimension == 1
              else list(pieces))
    rhs = sc * W.set_integral(w, merged)
    return lhs, rhs


def embedding_ratio(cf: CarlesonField, phi, f: g.SampledFunction,
                    w: W.WeightFn, p: float, family: CubeFamily) -> float:
    """Weighted embedding ratio: the L^p(w dmu) norm of phi_t * f over
    the strong-constant / A_p / input-norm reference product."""
    if p <= 1:
        raise ParameterError("need p > 1")
    fld = cf.field
    probe = g.ones_like(fld.box, fld.h)
    wx = W.node_density(w, probe)
    quad = g.trapezoid_mass(probe)
    kern = phi.as_kernel() if isinstance(phi, K.BumpProfile) else phi
    total = 0.0
    for tj, wj, row in zip(cf.grid.nodes, cf.grid.weights, fld.values):
        u = O.slot_convolve(f, kern, tj).values
        total += wj * float(np.sum(np.abs(u) ** p * wx * row * quad))
    num = total ** (1.0 / p)
    if num == 0.0:
        return 0.0
    sc = strong_carleson_constant(cf, family).value
    apv = W.ap_constant(w, p, family.cubes()).value
    fnorm = W.weighted_lp_norm(f, w, p)
    return num / (sc ** (1.0 / p) * apv ** (1.0 / (p - 1.0)) * fnorm)


# ---------------------------------------------------------------------------
# explicit bound constants


def bound_constant_43(ap_values: Sequence[float], ps: Sequence[float],
                      sc: float, m: int) -> float:
    """Product-plus-product bound constant from the weighted square-
    function estimate, with the dimensional factor normalized to 1."""
    if len(ap_values) != m or len(ps) != m:
        raise ParameterError("need one weight constant and exponent per slot")
    if sc < 0:
        raise ParameterError("cancellation constant must be nonnegative")
    prod1 = 1.0
    prod2 = 1.0
    for a, p in zip(ap_values, ps):
        if a < 1:
            raise ParameterError("weight constants are >= 1")
        ratio = W.dual_exponent(p) / p
        prod1 *= 1.0 + a ** (max(1.0, ratio) + max(0.5, ratio))
        prod2 *= a ** ratio
    return prod1 + sc ** (m / 2.0) * prod2


def c0_of_B(B: float, qs: Sequence[float], sc: float, m: int) -> float:
    """Uniform-over-a-class variant of the bound constant, in terms of a
    common weight-constant bound B > 1."""
    if B <= 1:
        raise ParameterError("the class bound must exceed 1")
    if len(qs) != m:
        raise ParameterError("need one exponent per slot")
    prod1 = 1.0
    prod2 = 1.0
    for q in qs:
        e = 1.0 / (q - 1.0)
        prod1 *= 2.0 * B ** (max(1.0, e) + max(0.5, e))
        prod2 *= B ** e
    return prod1 + sc ** (m / 2.0) * prod2
