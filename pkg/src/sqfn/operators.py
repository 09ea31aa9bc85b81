"""The operator layer: smoothing and mean-zero convolutions, multilinear
scale-t operators, square functions, maximal functions, and the sampled
ratio checks behind the reproducing / almost-orthogonality / decay
estimates.

Evaluation strategies
---------------------
Product-form kernel descriptions run on the convolution fast path (FFT,
or the exact-transform multiplier when a closed-form transform is
available, or a fine-kernel quadrature when the scale is unresolved by
the grid).  General-form descriptions run on a tensor-quadrature path
with a hard capacity cap.  Both agree to 1e-8 where both apply.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as sintegrate
from scipy.ndimage import maximum_filter1d

from . import grid as g
from . import kernels as K
from .errors import CapacityError, ConfigurationError, ContractError, ParameterError

GENERAL_MAX_LOAD = 2 ** 26
FINE_SCALE_NODES = 64  # below t = 64 h a sampled kernel is under-resolved
_FINE_QUAD_POINTS = 513


@dataclass(frozen=True)
class ThetaOperator:
    """A multilinear scale-t operator bound to a working grid."""

    spec: K.MLKernelSpec
    box: g.Box
    h: float
    guard_radius: float = 0.0

    def __post_init__(self):
        if self.spec.dimension != self.box.dimension:
            raise ConfigurationError("kernel/grid dimension mismatch")

    @property
    def strategy(self) -> str:
        return ("product-convolution" if self.spec.form == "product"
                else "general-quadrature")

    def mask(self) -> np.ndarray:
        probe = g.ones_like(self.box, self.h)
        return g.guard_band(probe, self.guard_radius)

    def ones(self) -> tuple[g.SampledFunction, ...]:
        return (g.ones_like(self.box, self.h),) * self.spec.arity


# ---------------------------------------------------------------------------
# single-slot convolutions


def _as_kernel(phi) -> K.Kernel:
    return phi.as_kernel() if isinstance(phi, K.BumpProfile) else phi


def slot_convolve(f: g.SampledFunction, kernel: K.Kernel, t: float,
                  method: str | None = None) -> g.SampledFunction:
    """(kappa_t * f) on f's grid, choosing the best-resolved path.

    Closed-form transforms win when available; otherwise the dilated
    kernel is sampled if the grid resolves it, and a fine-kernel
    quadrature with linear interpolation of f covers small scales.
    """
    if t <= 0:
        raise ParameterError("scale must be positive")
    if method == "hat" or (method is None and kernel.hat is not None):
        if kernel.hat is None:
            raise ParameterError("kernel has no closed-form transform")
        return g.convolve_hat(f, lambda *xi: kernel.hat(*[t * c for c in xi]))
    if method == "sampled" or (method is None and t >= FINE_SCALE_NODES * f.h):
        return g.convolve(f, kernel.sample_dilated(t, f.h), method="fourier")
    if f.dimension != 1:
        raise ConfigurationError(
            f"scale {t} unresolved at spacing {f.h} in 2-D without a "
            "closed-form transform")
    # fine path: quadrature over the kernel support, f linearly interpolated
    radius = kernel.support_radius * t
    y = np.linspace(-radius, radius, _FINE_QUAD_POINTS)
    kv = kernel.eval_dilated(t, y)
    wq = np.full(y.size, y[1] - y[0])
    wq[0] *= 0.5
    wq[-1] *= 0.5
    x = f.coords()[0]
    out = np.zeros_like(f.values)
    for yj, kj, wj in zip(y, kv, wq):
        if kj != 0.0:
            out += (kj * wj) * np.interp(x - yj, x, f.values, left=0.0,
                                         right=0.0)
    return f.with_values(out)


def apply_P(phi, t: float, f: g.SampledFunction) -> g.SampledFunction:
    """P_t f = phi_t * f (approximation of the identity)."""
    return slot_convolve(f, _as_kernel(phi), t)


def apply_Pprod(phi, t: float,
                fs: Sequence[g.SampledFunction]) -> g.SampledFunction:
    """Pointwise product of the m smoothed factors."""
    out = None
    for f in fs:
        p = apply_P(phi, t, f)
        out = p if out is None else out.with_values(out.values * p.values)
    if out is None:
        raise ParameterError("need at least one input")
    return out


def apply_Q(fam: K.DerivedFamily, t: float,
            f: g.SampledFunction) -> g.SampledFunction:
    """Q_t f: convolution with the derived mean-zero kernel."""
    return slot_convolve(f, fam.psi, t)


def apply_Qik(fam: K.DerivedFamily, i: int, k: int, t: float,
              f: g.SampledFunction) -> g.SampledFunction:
    """Q_t^{i,k} f for i in {1,2} and coordinate k."""
    if i not in (1, 2):
        raise ParameterError("factor index must be 1 or 2")
    kern = fam.psi1[k] if i == 1 else fam.psi2[k]
    return slot_convolve(f, kern, t)


def apply_pi(j: int, s: float, phi, fam: K.DerivedFamily,
             fs: Sequence[g.SampledFunction]) -> tuple:
    """Slot tuple with P_s^2 off slot j and Q_s on slot j (1-based j)."""
    m = len(fs)
    if not (1 <= j <= m):
        raise ParameterError(f"slot index {j} out of range 1..{m}")
    out = []
    for i, f in enumerate(fs, start=1):
        if i == j:
            out.append(apply_Q(fam, s, f))
        else:
            out.append(apply_P(phi, s, apply_P(phi, s, f)))
    return tuple(out)


# ---------------------------------------------------------------------------
# the multilinear operator


def _general_quadrature(op: ThetaOperator, t: float,
                        fs: Sequence[g.SampledFunction]) -> np.ndarray:
    spec = op.spec
    if op.box.dimension != 1:
        raise CapacityError("general quadrature is 1-D only")
    m = spec.arity
    nodes = fs[0].values.size
    if nodes ** (m + 1) > GENERAL_MAX_LOAD:
        raise CapacityError(
            f"general quadrature load {nodes}^{m + 1} exceeds the cap")
    x = fs[0].coords()[0]
    wf = [g.trapezoid_mass(f) * f.values for f in fs]
    if m == 1:
        kmat = spec.evaluate(t, x[:, None], [x[None, :]])
        return kmat @ wf[0]
    if m == 2:
        out = np.empty(nodes)
        chunk = max(1, GENERAL_MAX_LOAD // (8 * nodes * nodes))
        for lo in range(0, nodes, chunk):
            hi = min(nodes, lo + chunk)
            vals = spec.evaluate(
                t, x[lo:hi, None, None],
                [x[None, :, None], x[None, None, :]])
            out[lo:hi] = np.einsum("ijk,j,k->i", vals, wf[0], wf[1])
        return out
    raise CapacityError("general quadrature supports arity <= 2")


def apply_theta(op: ThetaOperator, t: float,
                fs: Sequence[g.SampledFunction]) -> g.SampledFunction:
    """Theta_t applied to the input tuple on op's grid."""
    fs = tuple(fs)
    if len(fs) != op.spec.arity:
        raise ParameterError("one input per slot required")
    for f in fs:
        if not f.same_grid(fs[0]):
            raise ConfigurationError("all inputs must share one grid")
    if op.spec.form == "general":
        return fs[0].with_values(_general_quadrature(op, t, fs))
    out = None
    for kern, f in zip(op.spec.slot_kernels, fs):
        conv = slot_convolve(f, kern, t)
        out = conv if out is None else out.with_values(out.values * conv.values)
    if op.spec.multiplier is not None:
        beta = np.asarray(op.spec.multiplier(*fs[0].meshes(), t), dtype=float)
        out = out.with_values(out.values * beta)
    return out


def theta_one(op: ThetaOperator, t: float) -> g.SampledFunction:
    """Theta_t applied to the constant-1 tuple (truncated to the box)."""
    return apply_theta(op, t, op.ones())


# ---------------------------------------------------------------------------
# square functions


@dataclass(frozen=True)
class SquareFunctionResult:
    field: g.ScaleField
    values: g.SampledFunction
    grid: g.ScaleGrid
    mask: np.ndarray

    def __post_init__(self):
        if np.any(self.values.values < 0):
            raise ContractError("square function must be nonnegative")


def square_function(op: ThetaOperator, fs: Sequence[g.SampledFunction],
                    sgrid: g.ScaleGrid) -> SquareFunctionResult:
    """S(x) = sqrt of the scale integral of |Theta_t f(x)|^2."""
    fs = tuple(fs)
    stack = np.stack([apply_theta(op, t, fs).values for t in sgrid.nodes])
    svals = np.sqrt(g.scale_integrate(stack ** 2, sgrid))
    field = g.ScaleField(op.box, op.h, sgrid, stack)
    values = fs[0].with_values(svals)
    return SquareFunctionResult(field=field, values=values, grid=sgrid,
                                mask=op.mask())


def g_psi(psi: K.Kernel, f: g.SampledFunction,
          sgrid: g.ScaleGrid) -> g.SampledFunction:
    """Littlewood–Paley square function of a single mean-zero kernel."""
    stack = np.stack([slot_convolve(f, psi, t).values for t in sgrid.nodes])
    return f.with_values(np.sqrt(g.scale_integrate(stack ** 2, sgrid)))


# ---------------------------------------------------------------------------
# the R/U split


@dataclass(frozen=True)
class ThetaSplit:
    """Theta_t = R_t + U_t with U_t = M_{Theta_t(1,..,1)} compose the
    smoothed product; R_t kills constants by construction."""

    op: ThetaOperator
    phi: object

    def u_multiplier(self, t: float) -> g.SampledFunction:
        return theta_one(self.op, t)

    def apply_u(self, t: float,
                fs: Sequence[g.SampledFunction]) -> g.SampledFunction:
        prod = apply_Pprod(self.phi, t, fs)
        return prod.with_values(prod.values * self.u_multiplier(t).values)

    def apply_r(self, t: float,
                fs: Sequence[g.SampledFunction]) -> g.SampledFunction:
        full = apply_theta(self.op, t, fs)
        return full.with_values(full.values - self.apply_u(t, fs).values)


def split_theta(op: ThetaOperator, phi) -> ThetaSplit:
    return ThetaSplit(op=op, phi=phi)


# ---------------------------------------------------------------------------
# maximal functions


def hl_maximal(f: g.SampledFunction,
               radii: Sequence[int] | None = None) -> g.SampledFunction:
    """Centered maximal function over the family of grid windows.

    Candidate windows are centered boxes of every node radius (truncated
    at the domain boundary); window averages use the trapezoid rule, so
    they reproduce continuous interval averages exactly for grid-aligned
    indicators, and Mf >= |f| holds exactly (radius-0 window).
    """
    av = np.abs(f.values)
    n = av.shape[0]
    if radii is None:
        radii = range(1, n)
    out = av.copy()
    idx = np.arange(n)
    if f.dimension == 1:
        c = np.concatenate([[0.0], np.cumsum(av)])
        for r in radii:
            if r <= 0:
                continue
            lo = np.maximum(idx - r, 0)
            hi = np.minimum(idx + r, n - 1)
            means = (c[hi + 1] - c[lo] - 0.5 * (av[lo] + av[hi])) / (hi - lo)
            np.maximum(out, means, out)
    else:
        c0 = np.vstack([np.zeros((1, n)), np.cumsum(av, axis=0)])
        for r in radii:
            if r <= 0:
                continue
            lo = np.maximum(idx - r, 0)
            hi = np.minimum(idx + r, n - 1)
            # trapezoid-in-x sums per window row position
            sx = c0[hi + 1, :] - c0[lo, :] - 0.5 * (av[lo, :] + av[hi, :])
            c1 = np.hstack([np.zeros((n, 1)), np.cumsum(sx, axis=1)])
            s = (c1[:, hi + 1] - c1[:, lo]
                 - 0.5 * (sx[:, lo] + sx[:, hi]))
            cnt = np.multiply.outer(hi - lo, hi - lo)
            np.maximum(out, s / cnt, out)
    return f.with_values(out)


def nt_maximal(phi, f: g.SampledFunction,
               sgrid: g.ScaleGrid) -> g.SampledFunction:
    """Non-tangential maximal function sup over scales t and nodes y with
    |x - y| < t of |phi_t * f(y)|."""
    kern = _as_kernel(phi)
    out = np.zeros_like(f.values)
    for t in sgrid.nodes:
        u = np.abs(slot_convolve(f, kern, t).values)
        reach = int(np.floor(t / f.h - 1e-12))
        if reach > 0:
            size = 2 * reach + 1
            if f.dimension == 1:
                u = maximum_filter1d(u, size, mode="nearest")
            else:
                u = maximum_filter1d(u, size, axis=0, mode="nearest")
                u = maximum_filter1d(u, size, axis=1, mode="nearest")
        np.maximum(out, u, out)
    return f.with_values(out)


# ---------------------------------------------------------------------------
# reproducing identity


def reproducing_residual(op: ThetaOperator, phi, fam: K.DerivedFamily,
                         fs: Sequence[g.SampledFunction], t: float,
                         eps: float, per_octave: int = 16) -> float:
    """L^2(interior) norm of Theta_t f minus the truncated reproducing
    expansion sum_j of the (eps, 1/eps) scale integral of
    Theta_t Pi_{j,s} f ds/s."""
    if not (0 < eps < 1):
        raise ParameterError("truncation parameter must lie in (0, 1)")
    fs = tuple(fs)
    mask = op.mask()
    sgrid = g.ScaleGrid(eps, 1.0 / eps, per_octave)
    target = apply_theta(op, t, fs).values
    approx = np.zeros_like(target)
    m = op.spec.arity
    for j in range(1, m + 1):
        stack = []
        for s in sgrid.nodes:
            pi_fs = apply_pi(j, s, phi, fam, fs)
            stack.append(apply_theta(op, t, pi_fs).values)
        approx += g.scale_integrate(np.array(stack), sgrid)
    diff = np.where(mask, target - approx, 0.0)
    quad = g.trapezoid_mass(fs[0])
    return float(np.sqrt(np.sum(diff ** 2 * quad)))


# ---------------------------------------------------------------------------
# ratio checks


def almost_orth_ratio(M: float, L: float, s: float, t: float,
                      separations: Sequence[float]) -> float:
    """Sampled constant in the majorant composition bound (1-D):
    integral Phi_t^M(d - u) Phi_s^L(u) du over
    (Phi_s^min(d) + Phi_t^min(d))."""
    if M <= 1 or L <= 1:
        raise ParameterError("both exponents must exceed the dimension")
    mn = min(M, L)
    best = 0.0
    for d in separations:
        integrand = lambda u: (K.majorant_eval(M, t, d - u)
                               * K.majorant_eval(L, s, u))
        num = 0.0
        cuts = sorted({-np.inf, 0.0, float(d), np.inf})
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            val, _ = sintegrate.quad(integrand, lo, hi, limit=200)
            num += val
        den = (K.majorant_eval(mn, s, d) + K.majorant_eval(mn, t, d))
        best = max(best, float(num / den))
    return best


def pi_decay_ratio(op: ThetaOperator, phi, fam: K.DerivedFamily, j: int,
                   s: float, t: float, fs: Sequence[g.SampledFunction],
                   gamma_prime: float) -> float:
    """Sampled constant in the cross-scale bound: sup-norm of
    Theta_t Pi_{j,s} f over min(s/t, t/s)^gamma' times the maximal-
    function majorant.  The s > t branch needs Theta_t(1,..,1) = 0 and
    verifies it before proceeding."""
    fs = tuple(fs)
    mask = op.mask()
    if s > t:
        sup_one = float(np.max(np.abs(theta_one(op, t).values[mask])))
        if sup_one > 1e-6:
            raise ContractError(
                "the s > t branch requires Theta_t(1,...,1) = 0; "
                f"measured sup {sup_one:.2e}")
    num_field = apply_theta(op, t, apply_pi(j, s, phi, fam, fs))
    num = float(np.max(np.abs(num_field.values[mask])))
    majorant = np.zeros_like(fs[0].values)
    for k in range(len(fam.psi2)):
        majorant += hl_maximal(apply_Qik(fam, 2, k, s, fs[j - 1])).values
    for i, f in enumerate(fs, start=1):
        if i != j:
            majorant = majorant * hl_maximal(f).values
    den = (min(s / t, t / s) ** gamma_prime
           * float(np.max(majorant[mask])))
    return num / den


def doubled(q: g.Box) -> g.Box:
    """Concentric box of twice the side."""
    return g.Box(tuple(c - q.side / 2 for c in q.corner), 2 * q.side)


def kernel_tail_bounds(op: ThetaOperator, sets: Sequence[Sequence[g.Box]],
                       Q: g.Box, t: float) -> tuple[float, float]:
    """Sampled constants in the two indicator tail bounds: the t^-n
    min-measure bound over the interior, and the (t / l(Q))^(N - n)
    bound over Q when the doubled cube misses one input set."""
    spec = op.spec
    if len(sets) != spec.arity:
        raise ParameterError("one set per slot required")
    fs = [g.indicator(op.box, op.h, pieces) for pieces in sets]
    measures = [sum(p.volume for p in pieces) for pieces in sets]
    if min(measures) == 0.0:
        return (0.0, 0.0)
    mask = op.mask()
    vals = apply_theta(op, t, fs).values
    n = spec.dimension
    ratio35 = float(np.max(np.abs(vals[mask]))
                    / (t ** (-n) * min(measures)))
    two_q = doubled(Q)
    disjoint = any(
        all(_boxes_disjoint(two_q, piece) for piece in pieces)
        for pieces in sets)
    if not disjoint:
        raise ContractError("doubled cube must miss at least one input set")
    probe = g.sample(op.box, op.h, lambda *xs: np.where(
        np.all([(x >= lo) & (x <= hi) for x, lo, hi in
                zip(xs, Q.corner, Q.upper)], axis=0), 1.0, 0.0))
    in_q = probe.values > 0.5
    N = spec.decay
    ratio36 = float(np.max(np.abs(vals[in_q & mask]))
                    / (t ** (N - n) * Q.side ** (-(N - n))))
    return ratio35, ratio36


def _boxes_disjoint(a: g.Box, b: g.Box) -> bool:
    return any(
        a_lo + a.side <= b_lo or b_lo + b.side <= a_lo
        for a_lo, b_lo in zip(a.corner, b.corner)
    )


def reproducing_profile(op: ThetaOperator, phi, fam: K.DerivedFamily,
                        fs: Sequence[g.SampledFunction], t: float,
                        eps_list: Sequence[float],
                        per_octave: int = 16) -> dict[float, float]:
    """Residuals for several truncation levels, coarsest first."""
    return {eps: reproducing_residual(op, phi, fam, fs, t, eps, per_octave)
            for eps in sorted(eps_list, reverse=True)}
