"""Concrete kernels and kernel families.

Contains the normalized smooth bump, the derived mean-zero family built
from it (the building blocks of the reproducing decomposition), power-law
majorants, the multilinear kernel descriptions with size/regularity
validators, and the two explicit example kernels used by the scenario
suite (a Haar-type odd kernel with closed-form transform, and the smooth
bump multiplier family).
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import integrate as sintegrate
from scipy.interpolate import CubicSpline, RegularGridInterpolator
from scipy.stats import qmc

from . import grid as g
from .errors import ContractError, KernelError, ParameterError

# ---------------------------------------------------------------------------
# spatial kernels


@dataclass(frozen=True)
class Kernel:
    """A convolution profile kappa; the scale-t kernel is its dilation
    kappa_t(x) = t^-n kappa(x/t).

    ``hat`` (optional) is the closed-form transform with the convention
    hat(xi) = integral kappa(x) exp(-i xi x) dx; when present it enables
    the exact-transform convolution path.
    """

    dimension: int
    rule: Callable[..., np.ndarray]
    support_radius: float
    hat: Callable[[np.ndarray], np.ndarray] | None = None

    def eval_dilated(self, t: float, *coords: np.ndarray) -> np.ndarray:
        scaled = [c / t for c in coords]
        return np.asarray(self.rule(*scaled), dtype=float) / t ** self.dimension

    def sample_dilated(self, t: float, h: float) -> g.SampledFunction:
        """Sample kappa_t on its own lattice-aligned support box."""
        # one extra node of margin so support-boundary nodes are interior
        # to the sampling box (boundary jumps then carry full trapezoid
        # weight with their half-valued samples)
        r_nodes = max(1, int(np.ceil(self.support_radius * t / h - 1e-12))) + 1
        radius = r_nodes * h
        box = g.Box((-radius,) * self.dimension, 2 * radius)
        return g.sample(box, h, lambda *xs: self.eval_dilated(t, *xs))

    def mass(self) -> float:
        return g.integrate(self.sample_dilated(1.0, self.support_radius / 2048))


def kernel_hat_numeric(kernel: Kernel, h: float = 2.0 ** -12) -> Callable:
    """Transform of a 1-D kernel by dense trapezoid summation."""
    if kernel.dimension != 1:
        raise ParameterError("numeric transforms are provided in 1-D only")
    ks = kernel.sample_dilated(1.0, h)
    x = ks.coords()[0]
    w = g.trapezoid_mass(ks) * ks.values

    def hat(xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.exp(-1j * np.outer(xi, x)) @ w
        return out

    return hat


# ---------------------------------------------------------------------------
# smooth bump


@functools.lru_cache(maxsize=4)
def _bump_normalizer(n: int) -> float:
    core = lambda r: np.exp(-1.0 / (1.0 - r * r))
    if n == 1:
        total, _ = sintegrate.quad(core, -1, 1)
    else:
        total, _ = sintegrate.quad(lambda r: 2 * np.pi * r * core(r), 0, 1)
    return 1.0 / total


@dataclass(frozen=True)
class BumpProfile:
    """Smooth compactly supported profile with unit mass."""

    dimension: int
    rule: Callable[..., np.ndarray]
    support_radius: float = 1.0
    unit_mass: bool = True

    def as_kernel(self) -> Kernel:
        return Kernel(self.dimension, self.rule, self.support_radius)

    def partial(self, k: int, step: float = 1e-3) -> Callable:
        """High-order central finite difference of the profile along axis k."""

        def deriv(*coords):
            coords = [np.asarray(c, dtype=float) for c in coords]
            shifted = lambda s: self.rule(
                *[c + (s if j == k else 0.0) for j, c in enumerate(coords)]
            )
            return (
                -shifted(2 * step)
                + 8 * shifted(step)
                - 8 * shifted(-step)
                + shifted(-2 * step)
            ) / (12 * step)

        return deriv


def standard_bump(n: int) -> BumpProfile:
    """c_n exp(-1/(1-|x|^2)) on |x| < 1, normalized to unit mass."""
    if n not in (1, 2):
        raise ParameterError("dimension must be 1 or 2")
    c = _bump_normalizer(n)

    def rule(*coords):
        r2 = sum(np.asarray(x, dtype=float) ** 2 for x in coords)
        safe = np.minimum(r2, 1.0 - 1e-14)
        vals = c * np.exp(-1.0 / (1.0 - safe))
        return np.where(r2 < 1.0, vals, 0.0)

    return BumpProfile(dimension=n, rule=rule)


# ---------------------------------------------------------------------------
# derived mean-zero family


@dataclass(frozen=True)
class DerivedFamily:
    """The mean-zero family generated by a bump phi.

    psi is the closed-form divergence kernel equal to -t d/dt of the
    dilated phi*phi (no differencing in t involved); psi1[k] = -2 d_k phi
    and psi2[k] = x_k phi(x) give the factorized pieces.  With the
    transform convention of :func:`kernel_hat_numeric`, the factorization
    identity holds with a global sign of -1:
    sum_k psi1hat * psi2hat = -psihat.
    """

    base: BumpProfile
    psi: Kernel
    psi1: tuple[Kernel, ...]
    psi2: tuple[Kernel, ...]
    factorization_sign: int = -1


def _self_convolution_1d(phi: BumpProfile, h0: float = 2.0 ** -11):
    r = phi.support_radius
    wide = g.Box((-2 * r,), 4 * r)
    phi_s = g.sample(wide, h0, phi.rule)
    kern = g.sample(g.Box((-r,), 2 * r), h0, phi.rule)
    dkern = g.sample(g.Box((-r,), 2 * r), h0, phi.partial(0))
    conv = g.convolve(phi_s, kern, method="fourier")
    dconv = g.convolve(phi_s, dkern, method="fourier")
    x = conv.coords()[0]
    spl_g = CubicSpline(x, conv.values)
    spl_dg = CubicSpline(x, dconv.values)
    lim = 2 * r

    def rule(xv):
        xv = np.asarray(xv, dtype=float)
        inside = np.abs(xv) < lim
        xc = np.clip(xv, -lim, lim)
        return np.where(inside, spl_g(xc) + xc * spl_dg(xc), 0.0)

    return rule


def _self_convolution_2d(phi: BumpProfile, h0: float = 2.0 ** -7):
    r = phi.support_radius
    wide = g.Box((-2 * r, -2 * r), 4 * r)
    phi_s = g.sample(wide, h0, phi.rule)
    kbox = g.Box((-r, -r), 2 * r)
    conv = g.convolve(phi_s, g.sample(kbox, h0, phi.rule), method="fourier")
    dconvs = [
        g.convolve(phi_s, g.sample(kbox, h0, phi.partial(k)), method="fourier")
        for k in range(2)
    ]
    axes = conv.coords()
    interp_g = RegularGridInterpolator(axes, conv.values, method="cubic",
                                       bounds_error=False, fill_value=0.0)
    interp_d = [
        RegularGridInterpolator(axes, d.values, method="cubic",
                                bounds_error=False, fill_value=0.0)
        for d in dconvs
    ]
    lim = 2 * r

    def rule(xv, yv):
        xv = np.asarray(xv, dtype=float)
        yv = np.asarray(yv, dtype=float)
        pts = np.stack(np.broadcast_arrays(xv, yv), axis=-1)
        out = 2.0 * interp_g(pts) + xv * interp_d[0](pts) + yv * interp_d[1](pts)
        inside = np.maximum(np.abs(xv), np.abs(yv)) < lim
        return np.where(inside, out, 0.0)

    return rule


@functools.lru_cache(maxsize=4)
def _derived_family_cached(n: int) -> DerivedFamily:
    return derived_family(standard_bump(n))


def standard_family(n: int = 1) -> DerivedFamily:
    """Derived family of the standard bump (cached)."""
    return _derived_family_cached(n)


def derived_family(phi: BumpProfile) -> DerivedFamily:
    n = phi.dimension
    r = phi.support_radius
    if n == 1:
        psi_rule = _self_convolution_1d(phi)
    else:
        psi_rule = _self_convolution_2d(phi)
    psi = Kernel(n, psi_rule, 2 * r)

    psi1 = []
    psi2 = []
    for k in range(n):
        dk = phi.partial(k)
        psi1.append(
            Kernel(n, lambda *xs, _d=dk: -2.0 * np.asarray(_d(*xs)), r)
        )

        def p2(*xs, _k=k):
            return np.asarray(xs[_k], dtype=float) * np.asarray(phi.rule(*xs))

        psi2.append(Kernel(n, p2, r))
    return DerivedFamily(phi, psi, tuple(psi1), tuple(psi2))


# ---------------------------------------------------------------------------
# majorants


@dataclass(frozen=True)
class Majorant:
    """Power-law bump majorant t^-n (1 + |x|/t)^-M."""

    decay: float
    scale: float
    dimension: int = 1

    def __post_init__(self):
        if self.decay <= self.dimension:
            raise ParameterError("majorant decay must exceed the dimension")
        if self.scale <= 0:
            raise ParameterError("majorant scale must be positive")

    def __call__(self, dist: np.ndarray) -> np.ndarray:
        return majorant_eval(self.decay, self.scale, dist, self.dimension)


def majorant_eval(M: float, t: float, dist, n: int = 1) -> np.ndarray:
    """t^-n (1 + |x|/t)^-M at distance |x| = dist."""
    if M <= n:
        raise ParameterError(f"majorant exponent {M} must exceed dimension {n}")
    if t <= 0:
        raise ParameterError("scale must be positive")
    dist = np.abs(np.asarray(dist, dtype=float))
    return t ** (-n) * (1.0 + dist / t) ** (-M)


def effective_radius(N: float, t: float, n: int = 1,
                     eps_tail: float = 1e-8) -> float:
    """Smallest radius whose majorant tail mass drops below eps_tail."""
    c = 2.0 if n == 1 else 2.0 * np.pi
    return t * ((c / ((N - n) * eps_tail)) ** (1.0 / (N - n)) - 1.0)


# ---------------------------------------------------------------------------
# multilinear kernel specifications


@dataclass(frozen=True)
class MLKernelSpec:
    """Description of a multilinear scale-t kernel.

    ``product`` form: theta_t(x, y_1..y_m) = multiplier(x, t) *
    prod_i kappa_i,t(x - y_i) with one dilation-family Kernel per slot.
    ``general`` form: a pointwise rule (t, x, y_1, ..., y_m).
    """

    arity: int
    dimension: int
    decay: float
    holder: float
    form: Literal["product", "general"]
    slot_kernels: tuple[Kernel, ...] | None = None
    multiplier: Callable | None = None
    general_rule: Callable | None = None
    t_constant: bool = False

    def __post_init__(self):
        if self.arity < 1:
            raise ParameterError("arity must be >= 1")
        if self.decay <= self.dimension:
            raise ParameterError("decay exponent must exceed the dimension")
        if not (0 < self.holder <= 1):
            raise ParameterError("holder exponent must lie in (0, 1]")
        if self.form == "product":
            if self.slot_kernels is None or len(self.slot_kernels) != self.arity:
                raise ParameterError("product form needs one kernel per slot")
        elif self.general_rule is None:
            raise ParameterError("general form needs a pointwise rule")

    @property
    def is_convolution_type(self) -> bool:
        return self.form == "product" and self.multiplier is None

    def evaluate(self, t: float, x, ys: Sequence) -> np.ndarray:
        """Pointwise kernel value; x and each y are coordinate tuples of
        broadcastable arrays."""
        x = _as_point(x, self.dimension)
        ys = [_as_point(y, self.dimension) for y in ys]
        if len(ys) != self.arity:
            raise ParameterError("one y point per slot required")
        if self.form == "general":
            flat = [c for y in ys for c in y]
            out = np.asarray(self.general_rule(t, *x, *flat), dtype=float)
        else:
            out = 1.0
            for kern, y in zip(self.slot_kernels, ys):
                diff = [xc - yc for xc, yc in zip(x, y)]
                out = out * kern.eval_dilated(t, *diff)
            if self.multiplier is not None:
                out = out * np.asarray(self.multiplier(*x, t), dtype=float)
            out = np.asarray(out, dtype=float)
        if not np.all(np.isfinite(out)):
            raise KernelError("kernel produced a non-finite value")
        return out


def _as_point(p, n: int) -> tuple:
    if isinstance(p, tuple):
        return p
    if n == 1:
        return (np.asarray(p, dtype=float),)
    raise ParameterError("points in dimension 2 must be coordinate tuples")


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic low-discrepancy sampling plan for the validators."""

    ts: tuple[float, ...]
    count: int
    box: g.Box

    def points(self, slots: int, dimension: int) -> np.ndarray:
        """(count, slots, dimension) array of joint sample points."""
        sampler = qmc.Halton(d=slots * dimension, scramble=False)
        u = sampler.random(self.count + 1)[1:]  # drop the origin point
        lo = np.array(self.box.corner * slots)
        pts = lo + u * self.box.side
        return pts.reshape(self.count, slots, dimension)


def validate_size(spec: MLKernelSpec, plan: SamplePlan) -> float:
    """Best sampled constant in the size bound
    |theta_t| <= C prod_i majorant(N, t)(x - y_i)."""
    m, n, N = spec.arity, spec.dimension, spec.decay
    pts = plan.points(m + 1, n)
    x = tuple(pts[:, 0, d] for d in range(n))
    ys = [tuple(pts[:, 1 + i, d] for d in range(n)) for i in range(m)]
    best = 0.0
    for t in plan.ts:
        val = np.abs(spec.evaluate(t, x, ys))
        denom = np.ones_like(val)
        for y in ys:
            dist = np.sqrt(sum((xc - yc) ** 2 for xc, yc in zip(x, y)))
            denom = denom * majorant_eval(N, t, dist, n)
        best = max(best, float(np.max(val / denom)))
    return best


HOLDER_OFFSET_FRACTIONS = (0.25, 0.0625, 0.015625)  # t/4, t/16, t/64


def validate_holder(spec: MLKernelSpec, plan: SamplePlan) -> float:
    """Best sampled constant in the slot-increment bound
    |theta(.., y_i, ..) - theta(.., y_i', ..)| <=
    C t^-mn (|y_i - y_i'| / t)^gamma for small increments."""
    m, n, gam = spec.arity, spec.dimension, spec.holder
    pts = plan.points(m + 1, n)
    x = tuple(pts[:, 0, d] for d in range(n))
    ys = [tuple(pts[:, 1 + i, d] for d in range(n)) for i in range(m)]
    best = 0.0
    for t in plan.ts:
        base = spec.evaluate(t, x, ys)
        for i in range(m):
            for frac in HOLDER_OFFSET_FRACTIONS:
                delta = frac * t
                shifted = list(ys)
                yi = ys[i]
                shifted[i] = (yi[0] + delta,) + tuple(yi[1:])
                diff = np.abs(spec.evaluate(t, x, shifted) - base)
                denom = t ** (-m * n) * frac ** gam
                best = max(best, float(np.max(diff / denom)))
    return best


# ---------------------------------------------------------------------------
# derived exponents


@dataclass(frozen=True)
class DerivedExponents:
    eta: float
    gamma_prime: float
    n_prime: float


def derived_exponents(N: float, gamma: float, n: int) -> DerivedExponents:
    """Interpolation exponents eta = (N-n)/(2(N+gamma)), gamma' = eta*gamma,
    N' = (N+n)/2 used in the cross-scale decay bound."""
    if N <= n:
        raise ParameterError("need N > n")
    if not (0 < gamma <= 1):
        raise ParameterError("need 0 < gamma <= 1")
    eta = (N - n) / (2.0 * (N + gamma))
    gamma_prime = eta * gamma
    n_prime = (N + n) / 2.0
    assert 0 < gamma_prime < gamma
    assert n < n_prime <= N - gamma_prime + 1e-12
    return DerivedExponents(eta, gamma_prime, n_prime)


# ---------------------------------------------------------------------------
# Fourier admissibility


def fourier_admissibility(kernel: Kernel, xis: np.ndarray,
                          sgrid: g.ScaleGrid) -> float:
    """sup over sampled xi != 0 of integral |kappahat(t xi)|^2 dtau(t)."""
    hat = kernel.hat if kernel.hat is not None else kernel_hat_numeric(kernel)
    if abs(complex(np.asarray(hat(np.array([0.0])))[0])) > 1e-8:
        raise ContractError("kernel must have mean zero")
    xis = np.asarray(xis, dtype=float)
    xis = xis[xis != 0]
    ts = sgrid.nodes
    vals = np.abs(np.asarray(hat(np.outer(ts, xis).ravel()))) ** 2
    vals = vals.reshape(ts.size, xis.size)
    per_xi = g.scale_integrate(vals, sgrid)
    return float(np.max(per_xi)) if per_xi.size else 0.0


# ---------------------------------------------------------------------------
# explicit example kernels


def ex38_psihat(xi) -> np.ndarray:
    """Closed-form transform 2(1 - cos xi)/(i xi) of the odd Haar-type
    kernel, with the removable value 0 at xi = 0."""
    xi = np.asarray(xi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -2j * (1.0 - np.cos(xi)) / xi
    return np.where(xi == 0.0, 0.0 + 0.0j, out)


def ex38_psi() -> Kernel:
    """Odd Haar-type kernel chi_(0,1) - chi_(-1,0), half-valued at jumps."""

    def rule(x):
        x = np.asarray(x, dtype=float)
        out = np.where((x > 0) & (x < 1), 1.0, 0.0)
        out = out - np.where((x > -1) & (x < 0), 1.0, 0.0)
        out = out + np.where(x == 1.0, 0.5, 0.0) - np.where(x == -1.0, 0.5, 0.0)
        return out

    return Kernel(1, rule, 1.0, hat=ex38_psihat)


def _haar_primitive(u) -> np.ndarray:
    """Antiderivative H(u) = integral_{-inf}^u of the Haar-type kernel."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    left = (u > -1) & (u < 0)
    right = (u >= 0) & (u < 1)
    out = np.where(left, -(u + 1.0), out)
    out = np.where(right, u - 1.0, out)
    return out


def ex38_qtb(x, t: float) -> np.ndarray:
    """Closed form of (psi_t * chi_(0,1))(x) for the Haar-type kernel."""
    x = np.asarray(x, dtype=float)
    return _haar_primitive(x / t) - _haar_primitive((x - 1.0) / t)
