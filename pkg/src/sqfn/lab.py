"""Scenario registry and experiment reports.

Each scenario builds a concrete operator family, runs its battery of
checks against stated references, and returns an ExperimentReport whose
JSON form is bitwise reproducible for a fixed seed (runtimes are zeroed
in verify mode so repeated runs serialize identically).

Provenance tags: PAPER marks references quoted from the source material
(the anchor string describes the claim), DERIVED marks values obtained
from an independent oracle (closed-form antiderivatives, transform-side
quadrature, pinned high-resolution runs), TRIVIAL marks structural
identities.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import carleson as C
from . import grid as g
from . import kernels as K
from . import operators as O
from . import weights as W
from .errors import ConfigurationError, ParameterError

PHI = K.standard_bump(1)

SCENARIO_NAMES = ("ex38", "ex37", "meanzero", "bilinear-weighted")


# ---------------------------------------------------------------------------
# report plumbing


@dataclass(frozen=True)
class CheckRecord:
    id: str
    anchor: str
    computed: float
    reference: float | None
    provenance: str
    tolerance: float | None
    passed: bool

    def __post_init__(self):
        if self.provenance not in ("PAPER", "TRIVIAL", "DERIVED"):
            raise ConfigurationError(
                f"unknown provenance tag {self.provenance!r}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "computed": self.computed,
            "reference": self.reference,
            "provenance": self.provenance,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ExperimentReport:
    scenario: str
    params: dict
    checks: tuple[CheckRecord, ...]
    environment: dict
    verdict: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "verdict",
                           all(c.passed for c in self.checks))

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "params": self.params,
            "checks": [c.to_dict() for c in self.checks],
            "environment": self.environment,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def check(self, check_id: str) -> CheckRecord:
        for c in self.checks:
            if c.id == check_id:
                return c
        raise KeyError(check_id)


def rel_check(cid: str, anchor: str, computed: float, reference: float,
              rtol: float, provenance: str) -> CheckRecord:
    ok = abs(computed - reference) <= rtol * abs(reference)
    return CheckRecord(cid, anchor, float(computed), float(reference),
                       provenance, rtol, bool(ok))


def bound_check(cid: str, anchor: str, computed: float, bound: float,
                provenance: str, sense: str = "le") -> CheckRecord:
    ok = computed <= bound if sense == "le" else computed >= bound
    return CheckRecord(cid, anchor, float(computed), float(bound),
                       provenance, None, bool(ok))


def _environment(grid_h, t_min, t_max, per_octave, seed,
                 started: float | None) -> dict:
    runtime = 0 if started is None else int(
        round(1000 * (time.perf_counter() - started)))
    return {"grid_h": grid_h, "t_min": t_min, "t_max": t_max,
            "per_octave": per_octave, "seed": seed, "runtime_ms": runtime}


# ---------------------------------------------------------------------------
# fixtures


def band_limited_fixture(box: g.Box, h: float, seed: int,
                         lo: float = 1.0, hi: float = 3.0) -> g.SampledFunction:
    """Deterministic oscillating fixture with spectral content in
    [lo, hi], under a Gaussian envelope for effective compact support."""
    rng = np.random.default_rng(seed)
    modes = rng.uniform(lo, hi, size=8)
    phases = rng.uniform(0, 2 * np.pi, size=8)
    amps = rng.normal(size=8)

    def rule(x):
        env = np.exp(-((x / (box.side / 8.0)) ** 2))
        out = np.zeros_like(x)
        for a, m, p in zip(amps, modes, phases):
            out += a * np.cos(m * x + p)
        return env * out

    return g.sample(box, h, rule)


def haar_multiplier_op(box: g.Box, h: float, guard: float) -> O.ThetaOperator:
    """m = 1 operator whose constant response is the closed-form
    psi_t * chi_(0,1) of the odd Haar-type kernel."""
    spec = K.MLKernelSpec(
        arity=1, dimension=1, decay=2.0, holder=1.0, form="product",
        slot_kernels=(PHI.as_kernel(),),
        multiplier=lambda x, t: K.ex38_qtb(x, t))
    return O.ThetaOperator(spec, box, h, guard_radius=guard)


def holder_bump(alpha: float) -> Callable:
    """(1 - |x|)_+^alpha: Hölder-alpha with compact support, in every L^q."""
    return lambda x: np.maximum(1.0 - np.abs(x), 0.0) ** alpha


def numeric_qtb(kernel: K.Kernel, b_rule: Callable,
                points: int = 513) -> Callable:
    """(kernel_t * b)(x) by trapezoid quadrature.

    The integration variable is chosen per scale so the finer of the two
    factors is always resolved: for t < 1 integrate in the kernel
    variable (the profile b is evaluated exactly), for t >= 1 integrate
    over supp b = [-1, 1]."""
    y = np.linspace(-1.0, 1.0, points)
    wq = np.full(points, y[1] - y[0])
    wq[0] *= 0.5
    wq[-1] *= 0.5
    by = b_rule(y) * wq
    r = kernel.support_radius
    u = np.linspace(-r, r, points)
    wu = np.full(points, u[1] - u[0])
    wu[0] *= 0.5
    wu[-1] *= 0.5
    ku = kernel.rule(u) * wu

    def qtb(x, t):
        x = np.asarray(x, dtype=float)
        if t < 1.0:
            return b_rule(x[..., None] - t * u) @ ku
        return kernel.eval_dilated(t, x[..., None] - y) @ by

    return qtb


def rough_beta(x, t: float):
    """Deterministic rough-in-x multiplier: a +-1 checkerboard in unit
    cells of x crossed with a per-octave sign in t."""
    sx = np.where(np.floor(x).astype(int) % 2 == 0, 1.0, -1.0)
    st = 1.0 if int(np.floor(np.log2(t))) % 2 == 0 else -1.0
    return sx * st


def ex38_exact_value(x: float) -> float:
    """Closed form of the scale integral of |psi_t * chi_(0,1)(x)|^2 dt/t
    over t in (0, 1] for -1 < x < 0: the antiderivative of
    (x + t)^2 / t^3 on (-x, 1) gives -log(-x) - 3/2 - 2x - x^2/2."""
    if not (-1.0 < x < 0.0):
        raise ParameterError("closed form valid for -1 < x < 0")
    return -np.log(-x) - 1.5 - 2.0 * x - x * x / 2.0


# ---------------------------------------------------------------------------
# scenarios


def scenario_ex38(grid_h: float = 0.05, t_min: float = 2.0 ** -6,
                  t_max: float = 1.0, per_octave: int = 64, seed: int = 7,
                  measure_runtime: bool = False) -> ExperimentReport:
    """The Haar-kernel operator: exact pointwise values, the
    Carleson-but-not-strong-Carleson dichotomy, and the transform
    closed form."""
    started = time.perf_counter() if measure_runtime else None
    checks: list[CheckRecord] = []

    # (a) pointwise exact values of the t-integral of |D_t 1|^2
    box = g.interval(-4, 4)
    op = haar_multiplier_op(box, grid_h, guard=1.5)
    sgrid = g.ScaleGrid(t_min, t_max, per_octave)
    cf = C.theta_one_field(op, sgrid)
    unit = g.interval(-1.0, 0.0)
    for x in (-0.5, -0.25, -0.1):
        got = C.strong_point_value(cf, unit, x)
        want = ex38_exact_value(x)
        checks.append(rel_check(
            f"pointwise-x={x}", "antiderivative of (x+t)^2/t^3 over (-x,1)",
            got, want, 0.02, "DERIVED"))
        checks.append(bound_check(
            f"lower-bound-x={x}", "stated lower bound -log(-x) - 2",
            got, -np.log(-x) - 2.0, "PAPER", sense="ge"))

    # (b) Carleson constant finite and refinement-stable
    cbox = g.interval(-12, 12)
    fam = C.CubeFamily(g.interval(-8, 8), 0, 10)
    csgrid = g.ScaleGrid(2.0 ** -7, 16.0, 8)
    vals = {}
    for hh in (2.0 ** -6, 2.0 ** -7):
        opc = haar_multiplier_op(cbox, hh, guard=2.0)
        vals[hh] = C.carleson_constant(
            C.theta_one_field(opc, csgrid), fam).value
    drift = abs(vals[2.0 ** -7] - vals[2.0 ** -6]) / vals[2.0 ** -7]
    checks.append(bound_check(
        "carleson-finite", "averaged constant bounded via the transform "
        "envelope min(|xi|, 1/|xi|)", vals[2.0 ** -7], 10.0, "DERIVED"))
    checks.append(bound_check(
        "carleson-stable", "relative drift under one spatial refinement",
        drift, 0.10, "DERIVED"))

    # (c) strong-Carleson divergence probe near the jump
    sbox = g.interval(-1.5, 0.5)
    sop = haar_multiplier_op(sbox, 2.0 ** -11, guard=0.25)
    ssgrid = g.ScaleGrid(2.0 ** -12, 1.0, 8)
    scf = C.theta_one_field(sop, ssgrid)
    xprobe = -(2.0 ** -11)
    sval = C.strong_point_value(scf, unit, xprobe)
    checks.append(bound_check(
        "strong-divergence", "per-point value at x = -2^-11 in [-1,0] "
        "exceeds -log(-x) - 2", sval, 5.62, "PAPER", sense="ge"))

    # (d) transform closed form
    psi = K.ex38_psi()
    num_hat = K.kernel_hat_numeric(psi, h=2.0 ** -10)
    xis = np.linspace(-20.0, 20.0, 401)
    err = float(np.max(np.abs(num_hat(xis) - K.ex38_psihat(xis))))
    checks.append(bound_check(
        "hat-closed-form", "sampled transform vs 2(1-cos xi)/(i xi)",
        err, 1e-3, "DERIVED"))
    checks.append(rel_check(
        "hat-at-pi", "modulus 4/pi at xi = pi",
        float(np.abs(K.ex38_psihat(np.pi))), 4.0 / np.pi, 1e-3, "PAPER"))

    # (e) two-cube growth across doublings
    tbox = g.interval(-8, 8)
    top = haar_multiplier_op(tbox, 2.0 ** -8, guard=2.0)
    tsgrid = g.ScaleGrid(2.0 ** -9, 1.0, 8)
    r_box = g.interval(-(2.0 ** -5), 0.0)
    tvals = []
    for k in (1, 2, 3, 4):
        q_box = g.interval(-r_box.side * 2 ** k, 0.0)
        tvals.append(C.two_cube_constant(top, [(r_box, q_box)], tsgrid).value)
    min_growth = min(b / a for a, b in zip(tvals, tvals[1:]))
    checks.append(bound_check(
        "two-cube-growth", "strict growth across l(Q)/l(R) in {2,4,8,16} "
        "(divergence expected: not strong Carleson)",
        min_growth, 1.0, "DERIVED", sense="ge"))

    params = {"scenario": "ex38", "x_probes": [-0.5, -0.25, -0.1],
              "carleson_root": [-8.0, 8.0], "carleson_depths": [0, 10]}
    env = _environment(grid_h, t_min, t_max, per_octave, seed, started)
    return ExperimentReport("ex38", params, tuple(checks), env)


def scenario_ex37(alpha: float = 0.5, q: float = 2.0, beta: str = "one",
                  grid_h: float = 2.0 ** -6, t_min: float = 2.0 ** -6,
                  t_max: float = 1.0, per_octave: int = 8, seed: int = 7,
                  measure_runtime: bool = False) -> ExperimentReport:
    """Bilinear multiplier operator built from a Hölder bump: strong
    Carleson holds, the two-cube constant stays bounded, and weighted
    square-function ratios are finite."""
    if not (0 < alpha < 1):
        raise ParameterError("profile exponent must lie in (0, 1)")
    if not (1 <= q < np.inf):
        raise ParameterError("integrability exponent must lie in [1, inf)")
    if beta not in ("one", "rough"):
        raise ParameterError("multiplier choice must be 'one' or 'rough'")
    started = time.perf_counter() if measure_runtime else None
    checks: list[CheckRecord] = []
    fam1 = K.standard_family(1)
    qtb = numeric_qtb(fam1.psi, holder_bump(alpha))

    # the two displayed envelope bounds, as log-log slopes
    xs = np.linspace(-2.0, 2.0, 1025)
    small_t = 2.0 ** np.arange(-8, -1)
    sup_small = [float(np.max(np.abs(qtb(xs, t)))) for t in small_t]
    slope_small = float(np.polyfit(np.log(small_t),
                                   np.log(sup_small), 1)[0])
    checks.append(bound_check(
        "qtb-small-t-slope", "sup |Q_t b| of order t^alpha for t <= 1",
        slope_small, 0.8 * alpha, "DERIVED", sense="ge"))
    xl = np.linspace(-40.0, 40.0, 2049)
    large_t = 2.0 ** np.arange(2, 9)
    sup_large = [float(np.max(np.abs(qtb(xl, t)))) for t in large_t]
    slope_large = float(np.polyfit(np.log(large_t),
                                   np.log(sup_large), 1)[0])
    checks.append(bound_check(
        "qtb-large-t-slope", "sup |Q_t b| of order t^(-n/q) for t >= 1",
        slope_large, -0.8 / q, "DERIVED"))

    # strong constant finite; rough multiplier costs nothing extra
    def build_op(beta_choice: str) -> O.ThetaOperator:
        if beta_choice == "one":
            mult = lambda x, t: qtb(x, t)
        else:
            mult = lambda x, t: rough_beta(x, t) * qtb(x, t)
        spec = K.MLKernelSpec(
            arity=2, dimension=1, decay=4.0, holder=min(alpha, 1.0),
            form="product", slot_kernels=(PHI.as_kernel(),) * 2,
            multiplier=mult)
        return O.ThetaOperator(spec, g.interval(-8, 8), grid_h,
                               guard_radius=2.0)

    sgrid = g.ScaleGrid(t_min, t_max, per_octave)
    family = C.CubeFamily(g.interval(-2, 2), 0, 5)
    op1 = build_op("one")
    cf1 = C.theta_one_field(op1, sgrid)
    strong1 = C.strong_carleson_constant(cf1, family).value
    checks.append(bound_check(
        "strong-finite", "strong constant bounded (the Hölder profile "
        "gives min(t^alpha, t^(-n/q)) in scale)", strong1, 10.0, "DERIVED"))
    op2 = build_op("rough")
    strong2 = C.strong_carleson_constant(
        C.theta_one_field(op2, sgrid), family).value
    checks.append(rel_check(
        "rough-beta-match", "unimodular multiplier leaves the strong "
        "constant unchanged", strong2, strong1, 1e-10, "TRIVIAL"))

    # two-cube constant bounded over the doubling family
    op = build_op(beta)
    r_box = g.interval(-(2.0 ** -5), 0.0)
    tvals = []
    for k in (1, 2, 3, 4):
        q_box = g.interval(-r_box.side * 2 ** k, 0.0)
        tvals.append(C.two_cube_constant(op, [(r_box, q_box)], sgrid).value)
    checks.append(bound_check(
        "two-cube-bounded", "two-cube constant controlled by the strong "
        "constant across doublings", max(tvals),
        10.0 * max(strong1, 1e-12), "DERIVED"))

    # weighted square-function ratio finite for a power-weight pair
    f1 = band_limited_fixture(op.box, grid_h, seed)
    f2 = band_limited_fixture(op.box, grid_h, seed + 1)
    res = O.square_function(op, (f1, f2), sgrid)
    # densities |x|^(1/4) and |x|^(-1/4); the product weight for the
    # Hölder index p = 2 has power 2 * (1/4 - 1/4) / 4 = 0, i.e. Lebesgue
    num = W.weighted_lp_norm(res.values, None, 2.0, mask=res.mask)
    den = (W.weighted_lp_norm(f1, W.power_weight(0.25), 4.0, mask=res.mask)
           * W.weighted_lp_norm(f2, W.power_weight(-0.25), 4.0,
                                mask=res.mask))
    ratio = num / den
    checks.append(bound_check(
        "weighted-ratio-finite", "square-function ratio finite for "
        "power weights in range", ratio, 100.0, "DERIVED"))

    params = {"scenario": "ex37", "alpha": alpha, "q": q, "beta": beta}
    env = _environment(grid_h, t_min, t_max, per_octave, seed, started)
    return ExperimentReport("ex37", params, tuple(checks), env)


def scenario_meanzero(grid_h: float = 2.0 ** -6, t_min: float = 2.0 ** -4,
                      t_max: float = 4.0, per_octave: int = 4, seed: int = 7,
                      measure_runtime: bool = False) -> ExperimentReport:
    """Constant-response dichotomy for t-constant convolution kernels:
    mean zero kills the Carleson density entirely; nonzero mean makes the
    per-cube value exactly logarithmic in the cube side."""
    started = time.perf_counter() if measure_runtime else None
    checks: list[CheckRecord] = []
    fam1 = K.standard_family(1)
    box = g.interval(-16, 16)
    sgrid = g.ScaleGrid(t_min, t_max, per_octave)
    family = C.CubeFamily(g.interval(-4, 4), 0, 4)

    spec0 = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                           form="product", slot_kernels=(fam1.psi,),
                           t_constant=True)
    op0 = O.ThetaOperator(spec0, box, grid_h, guard_radius=8.5)
    sup_one = max(float(np.max(np.abs(O.theta_one(op0, t).values[op0.mask()])))
                  for t in sgrid.nodes)
    checks.append(bound_check(
        "meanzero-constants", "mean-zero kernel annihilates constants",
        sup_one, 1e-8, "TRIVIAL"))
    cf0 = C.theta_one_field(op0, sgrid)
    checks.append(bound_check(
        "meanzero-carleson", "vanishing constant response gives a null "
        "Carleson density", C.carleson_constant(cf0, family).value,
        1e-12, "TRIVIAL"))

    spec1 = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                           form="product", slot_kernels=(PHI.as_kernel(),),
                           t_constant=True)
    op1 = O.ThetaOperator(spec1, box, grid_h, guard_radius=8.5)
    cf1 = C.theta_one_field(op1, sgrid)
    rep = C.carleson_constant(cf1, family)
    dev = max(abs(v - np.log(min(q.side, t_max) / t_min))
              for q, v in rep.per_cube)
    checks.append(bound_check(
        "nonzero-mean-log-growth", "per-cube value c0^2 log(l(Q)/t_min) "
        "for unit-mass kernel", dev, 1e-6, "DERIVED"))
    strong = C.strong_carleson_constant(cf1, family).value
    checks.append(bound_check(
        "x-constant-agreement", "strong and averaged constants coincide "
        "for x-constant densities",
        abs(strong - rep.value) / max(rep.value, 1e-300), 1e-10, "TRIVIAL"))

    # transform-side constant for the Haar-kernel square function
    gbox = g.interval(-16, 16)
    gh = 2.0 ** -5
    f = band_limited_fixture(gbox, gh, seed)
    gs = g.ScaleGrid(2.0 ** -10, 2.0 ** 10, 16)
    out = O.g_psi(K.ex38_psi(), f, gs)
    num = np.sqrt(np.sum(out.values ** 2) * gh)
    den = np.sqrt(np.sum(f.values ** 2) * gh)
    checks.append(rel_check(
        "plancherel-ratio", "transform-side quadrature of the scale "
        "integral gives 4 ln 2", float(num / den),
        float(np.sqrt(4 * np.log(2))), 0.02, "DERIVED"))

    params = {"scenario": "meanzero", "family_root": [-4.0, 4.0]}
    env = _environment(grid_h, t_min, t_max, per_octave, seed, started)
    return ExperimentReport("meanzero", params, tuple(checks), env)


def scenario_bilinear_weighted(
    p_pairs: Sequence[tuple[float, float]] = ((4.0, 4.0), (2.0, 2.0),
                                              (4.0 / 3.0, 4.0 / 3.0)),
    a_vec: tuple[float, float] = (0.25, -0.25),
    grid_h: float = 2.0 ** -5, t_min: float = 2.0 ** -4,
    t_max: float = 2.0 ** 4, per_octave: int = 4, seed: int = 7,
    n_pairs: int = 10, measure_runtime: bool = False,
) -> ExperimentReport:
    """Weighted square-function ratios for a bilinear mean-zero operator
    over seeded input pairs and power weights, reported with the explicit
    bound constant."""
    started = time.perf_counter() if measure_runtime else None
    checks: list[CheckRecord] = []
    fam1 = K.standard_family(1)
    box = g.interval(-16, 16)
    spec = K.MLKernelSpec(arity=2, dimension=1, decay=4.0, holder=1.0,
                          form="product", slot_kernels=(fam1.psi,) * 2)
    op = O.ThetaOperator(spec, box, grid_h, guard_radius=4.0)
    sgrid = g.ScaleGrid(t_min, t_max, per_octave)
    mask = op.mask()

    for p_i in [p for pair in p_pairs for p in pair]:
        for a in a_vec:
            if not W.power_ap_range(a, p_i):
                raise ParameterError(
                    f"power exponent {a} outside the admissible range "
                    f"for p = {p_i}")

    pairs = [(band_limited_fixture(box, grid_h, seed + 2 * k),
              band_limited_fixture(box, grid_h, seed + 2 * k + 1))
             for k in range(n_pairs)]
    s_values = [O.square_function(op, fs, sgrid).values for fs in pairs]

    def ratio_for(sv, fs, ps):
        p = W.holder_index(ps)
        dens = [W.power_weight(a) for a in a_vec]  # densities w_i^{p_i}
        target_pow = p * sum(a / pi for a, pi in zip(a_vec, ps))
        target = (W.power_weight(target_pow) if abs(target_pow) > 1e-12
                  else None)
        num = W.weighted_lp_norm(sv, target, p, mask=mask)
        den = 1.0
        for f, d, pi in zip(fs, dens, ps):
            den *= W.weighted_lp_norm(f, d, pi, mask=mask)
        return num / den

    fam_cubes = C.CubeFamily(g.interval(-8, 8), 0, 10).cubes()
    for ps in p_pairs:
        p = W.holder_index(ps)
        ratios = [ratio_for(sv, fs, ps) for sv, fs in zip(s_values, pairs)]
        worst = float(np.max(ratios))
        checks.append(bound_check(
            f"ratio-finite-p={p:g}", "weighted ratio finite over seeded "
            "pairs", worst, 100.0, "DERIVED"))
        ap_vals = [W.ap_constant(W.power_weight(a), pi, fam_cubes).value
                   for a, pi in zip(a_vec, ps)]
        const43 = C.bound_constant_43(ap_vals, list(ps), 0.0, 2)
        base43 = C.bound_constant_43([1.0, 1.0], list(ps), 0.0, 2)
        checks.append(bound_check(
            f"constant-consistent-p={p:g}", "explicit bound constant "
            "dominates its unweighted value", const43, base43,
            "TRIVIAL", sense="ge"))

    # homogeneity: the ratio is invariant under (f1, f2) -> (c f1, f2/c)
    f1, f2 = pairs[0]
    scaled = (f1.with_values(2.0 * f1.values),
              f2.with_values(0.5 * f2.values))
    sv_scaled = O.square_function(op, scaled, sgrid).values
    r_a = ratio_for(s_values[0], pairs[0], p_pairs[0])
    r_b = ratio_for(sv_scaled, scaled, p_pairs[0])
    checks.append(rel_check(
        "homogeneity", "multilinear rescaling leaves the ratio fixed",
        r_b, r_a, 1e-10, "TRIVIAL"))

    # refinement stability for the first pair at p = 2
    fine_h = grid_h / 2.0
    op_f = O.ThetaOperator(spec, box, fine_h, guard_radius=4.0)
    fs_f = (band_limited_fixture(box, fine_h, seed),
            band_limited_fixture(box, fine_h, seed + 1))
    sv_f = O.square_function(op_f, fs_f, sgrid).values
    mask_f = op_f.mask()

    def ratio_fine():
        ps = p_pairs[0]
        p = W.holder_index(ps)
        target_pow = p * sum(a / pi for a, pi in zip(a_vec, ps))
        target = (W.power_weight(target_pow) if abs(target_pow) > 1e-12
                  else None)
        num = W.weighted_lp_norm(sv_f, target, p, mask=mask_f)
        den = 1.0
        for f, a, pi in zip(fs_f, a_vec, ps):
            den *= W.weighted_lp_norm(f, W.power_weight(a), pi, mask=mask_f)
        return num / den

    r_fine = ratio_fine()
    drift = abs(r_fine - r_a) / r_fine
    checks.append(bound_check(
        "refinement-stable", "first-pair ratio drift under one spatial "
        "refinement", drift, 0.10, "DERIVED"))

    params = {"scenario": "bilinear-weighted",
              "p_pairs": [list(p) for p in p_pairs], "a_vec": list(a_vec),
              "n_pairs": n_pairs}
    env = _environment(grid_h, t_min, t_max, per_octave, seed, started)
    return ExperimentReport("bilinear-weighted", params, tuple(checks), env)


# ---------------------------------------------------------------------------
# suite runner


_REGISTRY: dict[str, Callable[..., ExperimentReport]] = {
    "ex38": scenario_ex38,
    "ex37": scenario_ex37,
    "meanzero": scenario_meanzero,
    "bilinear-weighted": scenario_bilinear_weighted,
}


def run_scenario(name: str, seed: int = 7, measure_runtime: bool = False,
                 **overrides) -> ExperimentReport:
    if name not in _REGISTRY:
        raise ConfigurationError(
            f"unknown scenario {name!r}; choose from {sorted(_REGISTRY)}")
    return _REGISTRY[name](seed=seed, measure_runtime=measure_runtime,
                           **overrides)


def run_suite(selection: Sequence[str] | None = None, seed: int = 7,
              measure_runtime: bool = False) -> ExperimentReport:
    """Run the selected scenarios (registry order, independent of the
    selection order) and merge their checks into one report."""
    if selection is None:
        names = list(_REGISTRY)
    else:
        unknown = set(selection) - set(_REGISTRY)
        if unknown:
            raise ConfigurationError(f"unknown scenarios: {sorted(unknown)}")
        names = [n for n in _REGISTRY if n in set(selection)]
    started = time.perf_counter() if measure_runtime else None
    checks: list[CheckRecord] = []
    params: dict = {"selection": names}
    for name in names:
        rep = _REGISTRY[name](seed=seed)
        params[name] = rep.params
        for c in rep.checks:
            checks.append(CheckRecord(
                f"{name}/{c.id}", c.anchor, c.computed, c.reference,
                c.provenance, c.tolerance, c.passed))
    env = _environment(None, None, None, None, seed, started)
    return ExperimentReport("suite", params, tuple(checks), env)
