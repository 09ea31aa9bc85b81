"""Uniform grids, sampled fields, scale grids, quadrature, and the
convolution engine.

Conventions used throughout the package:

* boxes are axis-parallel cubes given by a corner and a side length;
* fields are sampled at spacing ``h`` on the closed box, row-major,
  with ``side / h + 1`` nodes per axis;
* functions are extended by zero outside their box, and every reduction
  that cares about truncation error takes a guard-band mask;
* space is integrated with the trapezoid rule, scale with the midpoint
  rule in log t (or dyadic point masses).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import fft as sfft

from . import backend
from .errors import ConfigurationError, DegenerateDomainError, ParameterError

LOG2 = np.log(2.0)
_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class Box:
    """Axis-parallel cube: corner plus a common side length."""

    corner: tuple[float, ...]
    side: float

    def __post_init__(self):
        if self.side <= 0:
            raise ParameterError(f"box side must be positive, got {self.side}")
        if len(self.corner) not in (1, 2):
            raise ParameterError("only dimensions 1 and 2 are supported")
        object.__setattr__(self, "corner", tuple(float(c) for c in self.corner))
        object.__setattr__(self, "side", float(self.side))

    @property
    def dimension(self) -> int:
        return len(self.corner)

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(c + self.side for c in self.corner)

    @property
    def volume(self) -> float:
        return self.side ** self.dimension

    def contains(self, other: "Box") -> bool:
        return all(
            oc >= c - _ALIGN_TOL and oc + other.side <= c + self.side + _ALIGN_TOL
            for oc, c in zip(other.corner, self.corner)
        )

    def contains_point(self, point: Sequence[float]) -> bool:
        return all(
            c - _ALIGN_TOL <= p <= c + self.side + _ALIGN_TOL
            for p, c in zip(point, self.corner)
        )

    def node_count(self, h: float) -> int:
        ratio = self.side / h
        n = round(ratio)
        if abs(ratio - n) > _ALIGN_TOL * max(1.0, ratio):
            raise ConfigurationError(
                f"spacing {h} does not divide side {self.side} exactly"
            )
        return n + 1

    def axis_nodes(self, h: float) -> list[np.ndarray]:
        n = self.node_count(h)
        return [c + h * np.arange(n) for c in self.corner]


def interval(a: float, b: float) -> Box:
    """1-D box [a, b]."""
    return Box((a,), b - a)


@dataclass(frozen=True)
class SampledFunction:
    """Scalar field sampled on the uniform grid of a box."""

    box: Box
    h: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        n = self.box.node_count(self.h)
        expected = (n,) * self.box.dimension
        if vals.shape != expected:
            raise ConfigurationError(
                f"values shape {vals.shape} does not match grid shape {expected}"
            )
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("sampled values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self) -> int:
        return self.box.dimension

    def coords(self) -> list[np.ndarray]:
        return self.box.axis_nodes(self.h)

    def meshes(self) -> list[np.ndarray]:
        return np.meshgrid(*self.coords(), indexing="ij")

    def with_values(self, values: np.ndarray) -> "SampledFunction":
        return SampledFunction(self.box, self.h, values)

    def same_grid(self, other: "SampledFunction") -> bool:
        return (
            self.box == other.box
            and abs(self.h - other.h) <= _ALIGN_TOL * self.h
        )

    def node_index(self, point: Sequence[float]) -> tuple[int, ...]:
        """Index of the grid node at ``point`` (must lie on the grid)."""
        idx = []
        for p, c in zip(point, self.box.corner):
            r = (p - c) / self.h
            i = round(r)
            if abs(r - i) > 1e-6:
                raise ConfigurationError(f"point {point} is not a grid node")
            idx.append(int(i))
        return tuple(idx)


def sample(box: Box, h: float, rule: Callable[..., np.ndarray]) -> SampledFunction:
    """Sample a pointwise rule at the grid nodes of ``box``."""
    meshes = np.meshgrid(*box.axis_nodes(h), indexing="ij")
    values = np.asarray(rule(*meshes), dtype=float)
    values = np.broadcast_to(values, meshes[0].shape).copy()
    return SampledFunction(box, h, values)


def _trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def trapezoid_mass(f: SampledFunction) -> np.ndarray:
    """Per-node trapezoid quadrature weights times h^n."""
    n = f.values.shape[0]
    w = _trapezoid_weights(n)
    if f.dimension == 1:
        full = w
    else:
        full = np.multiply.outer(w, w)
    return full * f.h ** f.dimension


def integrate(f: SampledFunction, mask: np.ndarray | None = None) -> float:
    """Trapezoid-rule integral of ``f`` over its box (optionally masked)."""
    w = trapezoid_mass(f)
    if mask is not None:
        w = np.where(mask, w, 0.0)
    return float(np.sum(w * f.values))


def guard_band(f: SampledFunction, radius: float) -> np.ndarray:
    """Mask of nodes at distance >= radius from the box boundary."""
    if radius < 0:
        raise ParameterError("guard radius must be nonnegative")
    mask = np.ones(f.values.shape, dtype=bool)
    tol = _ALIGN_TOL * max(1.0, radius)
    for axis, (x, c) in enumerate(zip(f.coords(), f.box.corner)):
        ok = (x - c >= radius - tol) & (c + f.box.side - x >= radius - tol)
        shape = [1] * f.dimension
        shape[axis] = ok.size
        mask &= ok.reshape(shape)
    if not mask.any():
        raise DegenerateDomainError(
            f"guard radius {radius} leaves no interior nodes"
        )
    return mask


# ---------------------------------------------------------------------------
# scale grids


@dataclass(frozen=True)
class ScaleGrid:
    """Geometric grid of scales with a quadrature rule for integral dtau.

    ``log`` realizes dt/t by the midpoint rule in log t: nodes
    ``t_min * 2**((j + 1/2)/J)`` each carrying weight ln2 / J.  ``dyadic``
    uses the point masses at ``2**-k`` with unit weight.
    """

    t_min: float
    t_max: float
    per_octave: int
    kind: Literal["log", "dyadic"] = "log"

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max):
            raise ParameterError("need 0 < t_min < t_max")
        if self.per_octave < 1:
            raise ParameterError("per_octave must be a positive integer")
        octaves = np.log2(self.t_max / self.t_min)
        if self.kind == "log":
            count = self.per_octave * octaves
            if abs(count - round(count)) > 1e-9:
                raise ConfigurationError(
                    "t_max / t_min must be a power of 2**(1/per_octave)"
                )

    @property
    def nodes(self) -> np.ndarray:
        if self.kind == "log":
            count = round(self.per_octave * np.log2(self.t_max / self.t_min))
            j = np.arange(count)
            return self.t_min * 2.0 ** ((j + 0.5) / self.per_octave)
        k_lo = int(np.ceil(-np.log2(self.t_max) - 1e-12))
        k_hi = int(np.floor(-np.log2(self.t_min) + 1e-12))
        return 2.0 ** (-np.arange(k_hi, k_lo - 1, -1, dtype=float))

    @property
    def weights(self) -> np.ndarray:
        if self.kind == "log":
            return np.full(self.nodes.size, LOG2 / self.per_octave)
        return np.ones(self.nodes.size)


def scale_integrate(values: np.ndarray, grid: ScaleGrid) -> np.ndarray:
    """Integral over scale with the grid's measure.

    ``values`` holds one entry (or one spatial field) per scale node along
    axis 0; the reduction is a fixed-order sum, so results are independent
    of any parallel schedule upstream.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.nodes.size:
        raise ConfigurationError("one value per scale node required")
    w = grid.weights.reshape((-1,) + (1,) * (values.ndim - 1))
    return np.sum(values * w, axis=0)


@dataclass(frozen=True)
class ScaleField:
    """One sampled field per scale node, all on one spatial grid."""

    box: Box
    h: float
    grid: ScaleGrid
    values: np.ndarray  # shape (n_scales, ...spatial)
    mask: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        n = self.box.node_count(self.h)
        expected = (self.grid.nodes.size,) + (n,) * self.box.dimension
        if vals.shape != expected:
            raise ConfigurationError(
                f"scale-field shape {vals.shape}, expected {expected}"
            )
        object.__setattr__(self, "values", vals)


# ---------------------------------------------------------------------------
# convolution engine


def _kernel_offset(f: SampledFunction, k: SampledFunction) -> tuple[int, ...]:
    if abs(f.h - k.h) > _ALIGN_TOL * f.h:
        raise ConfigurationError(
            f"spacing mismatch: f.h={f.h} vs k.h={k.h}"
        )
    if f.dimension != k.dimension:
        raise ConfigurationError("dimension mismatch between field and kernel")
    offs = []
    for c in k.box.corner:
        r = c / f.h
        o = round(r)
        if abs(r - o) > 1e-6:
            raise ConfigurationError(
                "kernel box corner must lie on the spacing lattice"
            )
        offs.append(int(o))
    return tuple(offs)


def _embed_full(full: np.ndarray, offsets: tuple[int, ...], out_shape):
    """Slice/pad the full convolution back onto f's index range."""
    out = np.zeros(out_shape)
    src: list[slice] = []
    dst: list[slice] = []
    for axis, o in enumerate(offsets):
        nf = out_shape[axis]
        nfull = full.shape[axis]
        # out[i] = full[i - o] for 0 <= i - o < nfull
        lo = max(0, o)
        hi = min(nf, o + nfull)
        if lo >= hi:
            return out
        dst.append(slice(lo, hi))
        src.append(slice(lo - o, hi - o))
    out[tuple(dst)] = full[tuple(src)]
    return out


def _conv_full_fft(fv: np.ndarray, kv: np.ndarray) -> np.ndarray:
    shape = [sfft.next_fast_len(a + b - 1) for a, b in zip(fv.shape, kv.shape)]
    F = sfft.fftn(fv, shape)
    K = sfft.fftn(kv, shape)
    out = sfft.ifftn(F * K)
    scale = max(np.max(np.abs(out)), 1.0)
    imag = np.max(np.abs(out.imag)) / scale
    if imag > 1e-10:
        raise ConfigurationError(f"fourier path imaginary residue {imag:.2e}")
    full = out.real
    return full[tuple(slice(0, a + b - 1) for a, b in zip(fv.shape, kv.shape))]


def convolve(
    f: SampledFunction,
    k: SampledFunction,
    method: Literal["direct", "fourier"] = "fourier",
) -> SampledFunction:
    """Discrete convolution (k * f) * h^n evaluated on f's grid.

    ``f`` is extended by zero outside its box; the kernel grid must share
    f's spacing and sit on the same lattice.
    """
    offsets = _kernel_offset(f, k)
    if method == "direct":
        if f.dimension == 1:
            full = backend.conv_full_1d(
                np.ascontiguousarray(f.values), np.ascontiguousarray(k.values)
            )
        else:
            full = backend.conv_full_2d(
                np.ascontiguousarray(f.values), np.ascontiguousarray(k.values)
            )
    elif method == "fourier":
        full = _conv_full_fft(f.values, k.values)
    else:
        raise ParameterError(f"unknown convolution method {method!r}")
    out = _embed_full(full, offsets, f.values.shape)
    return f.with_values(out * f.h ** f.dimension)


def convolve_hat(
    f: SampledFunction, hat: Callable[[np.ndarray], np.ndarray]
) -> SampledFunction:
    """Convolution with a kernel given by its exact Fourier transform.

    Zero-pads f to double length, multiplies by ``hat`` at the FFT
    frequencies, and returns the real part (imaginary residue asserted
    small).  Used for kernels whose transform has a closed form and whose
    spatial samples would be unresolved at the working spacing.

    Transform convention: hat(xi) = integral f(x) exp(-i xi x) dx.
    """
    fv = f.values
    if f.dimension == 1:
        L = sfft.next_fast_len(2 * fv.size)
        xi = 2.0 * np.pi * sfft.fftfreq(L, d=f.h)
        out = sfft.ifft(sfft.fft(fv, L) * hat(xi))
        res = out[: fv.size]
    else:
        L = [sfft.next_fast_len(2 * s) for s in fv.shape]
        xi0 = 2.0 * np.pi * sfft.fftfreq(L[0], d=f.h)
        xi1 = 2.0 * np.pi * sfft.fftfreq(L[1], d=f.h)
        H = hat(xi0[:, None], xi1[None, :])
        out = sfft.ifft2(sfft.fft2(fv, L) * H)
        res = out[: fv.shape[0], : fv.shape[1]]
    scale = max(np.max(np.abs(res)), 1e-300)
    imag = np.max(np.abs(res.imag)) / max(scale, 1.0)
    if imag > 1e-8:
        raise ConfigurationError(f"hat path imaginary residue {imag:.2e}")
    return f.with_values(res.real)


def ones_like(box: Box, h: float) -> SampledFunction:
    n = box.node_count(h)
    return SampledFunction(box, h, np.ones((n,) * box.dimension))


def indicator(box: Box, h: float, pieces: Sequence[Box]) -> SampledFunction:
    """Indicator of a finite union of boxes, sampled on the grid.

    Nodes on a piece boundary get the half/quarter average of the one-sided
    limits, which keeps trapezoid integrals of indicators exact.
    """
    meshes = np.meshgrid(*box.axis_nodes(h), indexing="ij")
    vals = np.zeros(meshes[0].shape)
    tol = _ALIGN_TOL
    for piece in pieces:
        factor = np.ones(meshes[0].shape)
        for x, lo, hi in zip(meshes, piece.corner, piece.upper):
            inside = ((x > lo + tol) & (x < hi - tol)).astype(float)
            edge = (np.abs(x - lo) <= tol) | (np.abs(x - hi) <= tol)
            factor *= inside + 0.5 * edge
        vals += factor
    return SampledFunction(box, h, np.minimum(vals, 1.0))
