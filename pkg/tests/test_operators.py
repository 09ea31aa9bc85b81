import numpy as np
import pytest

from sqfn import grid as g
from sqfn import kernels as K
from sqfn import operators as O
from sqfn.errors import CapacityError, ContractError, ParameterError

PHI = K.standard_bump(1)
FAM = K.standard_family(1)


def band_limited(box: g.Box, h: float, lo: float = 0.5, hi: float = 4.0,
                 seed: int = 13) -> g.SampledFunction:
    """Real fixture with transform supported in [lo, hi] in |xi|,
    windowed to compact support inside the box."""
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


def smooth_compact(box: g.Box, h: float) -> g.SampledFunction:
    return g.sample(box, h, lambda x: np.where(
        np.abs(x) < 2.0, np.cos(3 * x) * np.exp(-1 / np.maximum(4 - x * x, 1e-12)), 0.0))


def test_apply_P_preserves_constants():
    f = g.ones_like(g.interval(-4, 4), 2.0 ** -6)
    for t in (0.25, 1.0):
        out = O.apply_P(PHI, t, f)
        inner = g.guard_band(f, 1.5)
        assert np.max(np.abs(out.values[inner] - 1.0)) < 1e-8


def test_apply_P_converges_to_identity():
    box = g.interval(-8, 8)
    h = 2.0 ** -7
    f = smooth_compact(box, h)
    norms = []
    for k in range(7):
        t = 2.0 ** -k
        d = O.apply_P(PHI, t, f)
        norms.append(np.sqrt(np.sum((d.values - f.values) ** 2) * h))
    ref = np.sqrt(np.sum(f.values ** 2) * h)
    assert all(a >= b for a, b in zip(norms, norms[1:]))
    assert norms[-1] <= 1e-3 * ref


def test_apply_Q_annihilates_constants_and_linear():
    box = g.interval(-8, 8)
    h = 2.0 ** -6
    one = g.ones_like(box, h)
    lin = g.sample(box, h, lambda x: x)
    inner = g.guard_band(one, 3.0)
    for t in (0.5, 1.0):
        q1 = O.apply_Q(FAM, t, one)
        assert np.max(np.abs(q1.values[inner])) <= 1e-8
        ql = O.apply_Q(FAM, t, lin)
        assert np.max(np.abs(ql.values[inner])) <= 1e-6


def test_Q_factorization():
    box = g.interval(-8, 8)
    h = 2.0 ** -6
    f = band_limited(box, h)
    t = 1.0
    lhs = O.apply_Q(FAM, t, f).values
    comp = O.apply_Qik(FAM, 1, 0, t, O.apply_Qik(FAM, 2, 0, t, f)).values
    rhs = FAM.factorization_sign * comp
    inner = g.guard_band(f, 3.0)
    scale = np.max(np.abs(f.values))
    assert np.max(np.abs(lhs - rhs)[inner]) <= 1e-4 * scale


def _product_op(box=None, h=2.0 ** -6, m=1, multiplier=None):
    box = box or g.interval(-8, 8)
    spec = K.MLKernelSpec(
        arity=m, dimension=1, decay=4.0, holder=1.0, form="product",
        slot_kernels=(FAM.psi,) * m, multiplier=multiplier)
    return ThetaOp(box, h, spec)


def ThetaOp(box, h, spec, guard=2.0):
    return O.ThetaOperator(spec=spec, box=box, h=h, guard_radius=guard)


def test_apply_theta_constants_mean_zero():
    op = _product_op()
    out = O.theta_one(op, 0.5)
    assert np.max(np.abs(out.values[op.mask()])) <= 1e-8


def test_apply_theta_zero_slot():
    op = _product_op(m=2)
    box, h = op.box, op.h
    f = band_limited(box, h)
    z = f.with_values(np.zeros_like(f.values))
    out = O.apply_theta(op, 1.0, (f, z))
    assert np.max(np.abs(out.values)) == 0.0


def test_apply_theta_multilinearity():
    op = _product_op(m=2)
    f1 = band_limited(op.box, op.h, seed=1)
    f2 = band_limited(op.box, op.h, seed=2)
    f3 = band_limited(op.box, op.h, seed=3)
    a, b = 1.7, -0.4
    combo = f1.with_values(a * f1.values + b * f3.values)
    lhs = O.apply_theta(op, 0.7, (combo, f2)).values
    rhs = (a * O.apply_theta(op, 0.7, (f1, f2)).values
           + b * O.apply_theta(op, 0.7, (f3, f2)).values)
    scale = max(np.max(np.abs(lhs)), 1.0)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_general_vs_product_agreement():
    bump_k = PHI.as_kernel()
    box = g.interval(-4, 4)
    h = 8.0 / 512
    prod_spec = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                               form="product", slot_kernels=(bump_k,))
    gen_spec = K.MLKernelSpec(
        arity=1, dimension=1, decay=4.0, holder=1.0, form="general",
        general_rule=lambda t, x, y: PHI.rule((x - y) / t) / t)
    f = smooth_compact(box, h)
    t = 1.0
    a = O.apply_theta(O.ThetaOperator(prod_spec, box, h, 1.0), t, (f,))
    b = O.apply_theta(O.ThetaOperator(gen_spec, box, h, 1.0), t, (f,))
    # both reduce to trapezoid-exact quadratures of the same smooth
    # integrand; agreement is limited by quadrature error only
    assert np.max(np.abs(a.values - b.values)) <= 1e-8


def test_general_quadrature_capacity():
    gen_spec = K.MLKernelSpec(
        arity=2, dimension=1, decay=4.0, holder=1.0, form="general",
        general_rule=lambda t, x, y1, y2: 0.0 * x)
    box = g.interval(-4, 4)
    h = 8.0 / 8192
    f = g.ones_like(box, h)
    op = O.ThetaOperator(gen_spec, box, h)
    with pytest.raises(CapacityError):
        O.apply_theta(op, 1.0, (f, f))


def test_apply_pi_composition():
    box = g.interval(-8, 8)
    h = 2.0 ** -6
    f1 = band_limited(box, h, seed=4)
    f2 = band_limited(box, h, seed=5)
    s = 0.5
    tup = O.apply_pi(2, s, PHI, FAM, (f1, f2))
    want0 = O.apply_P(PHI, s, O.apply_P(PHI, s, f1))
    want1 = O.apply_Q(FAM, s, f2)
    assert np.max(np.abs(tup[0].values - want0.values)) <= 1e-12
    assert np.max(np.abs(tup[1].values - want1.values)) <= 1e-12
    with pytest.raises(ParameterError):
        O.apply_pi(3, s, PHI, FAM, (f1, f2))


def test_square_function_plancherel_m1():
    # oracle: for convolution with the derived mean-zero kernel,
    # Plancherel gives a ratio sqrt(integral |psihat(t)|^2 dt/t), which a
    # dense transform-side quadrature reproduces independently
    box = g.interval(-16, 16)
    h = 2.0 ** -5
    f = band_limited(box, h, lo=1.0, hi=3.0)
    sgrid = g.ScaleGrid(2.0 ** -8, 2.0 ** 8, per_octave=16)
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                          form="product", slot_kernels=(FAM.psi,))
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    res = O.square_function(op, (f,), sgrid)
    num = np.sqrt(np.sum(res.values.values ** 2) * h)
    den = np.sqrt(np.sum(f.values ** 2) * h)
    hat = K.kernel_hat_numeric(FAM.psi, h=2.0 ** -9)
    xs = np.linspace(1.0, 3.0, 33)
    consts = []
    for xi in xs:
        ts = sgrid.nodes
        vals = np.abs(hat(ts * xi)) ** 2
        consts.append(np.sqrt(g.scale_integrate(vals, sgrid)))
    assert min(consts) * 0.98 <= num / den <= max(consts) * 1.02


def test_g_psi_plancherel_haar():
    box = g.interval(-16, 16)
    h = 2.0 ** -5
    f = band_limited(box, h, lo=1.0, hi=3.0)
    sgrid = g.ScaleGrid(2.0 ** -10, 2.0 ** 10, per_octave=16)
    out = O.g_psi(K.ex38_psi(), f, sgrid)
    num = np.sqrt(np.sum(out.values ** 2) * h)
    den = np.sqrt(np.sum(f.values ** 2) * h)
    assert num / den == pytest.approx(np.sqrt(4 * np.log(2)), rel=2e-2)


def test_square_function_sign_insensitive_and_monotone():
    box = g.interval(-8, 8)
    h = 2.0 ** -5
    f = band_limited(box, h)
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                          form="product", slot_kernels=(FAM.psi,))
    neg = K.Kernel(1, lambda x: -FAM.psi.rule(x), FAM.psi.support_radius)
    spec_neg = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                              form="product", slot_kernels=(neg,))
    big = g.ScaleGrid(2.0 ** -4, 2.0 ** 4, per_octave=8)
    small = g.ScaleGrid(2.0 ** -2, 2.0 ** 2, per_octave=8)
    op = O.ThetaOperator(spec, box, h, 1.0)
    op_neg = O.ThetaOperator(spec_neg, box, h, 1.0)
    s_big = O.square_function(op, (f,), big).values.values
    s_neg = O.square_function(op_neg, (f,), big).values.values
    s_small = O.square_function(op, (f,), small).values.values
    assert np.max(np.abs(s_big - s_neg)) <= 1e-12
    assert np.all(s_small <= s_big + 1e-12)


def test_split_theta_r_kills_constants_and_recombines():
    mult = lambda x, t: 1.0 + 0.5 * np.sin(x)
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                          form="product", slot_kernels=(PHI.as_kernel(),),
                          multiplier=mult)
    box = g.interval(-8, 8)
    h = 2.0 ** -6
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    split = O.split_theta(op, PHI)
    ones = op.ones()
    r1 = split.apply_r(0.5, ones)
    assert np.max(np.abs(r1.values[op.mask()])) <= 1e-8
    f = band_limited(box, h)
    full = O.apply_theta(op, 0.5, (f,)).values
    recomb = split.apply_r(0.5, (f,)).values + split.apply_u(0.5, (f,)).values
    assert np.max(np.abs(full - recomb)) <= 1e-12 * max(np.max(np.abs(full)), 1)


def test_hl_maximal_properties():
    box = g.interval(-4, 4)
    h = 2.0 ** -5
    c = g.sample(box, h, lambda x: np.full_like(x, -3.0))
    assert np.allclose(O.hl_maximal(c).values, 3.0)
    rng = np.random.default_rng(2)
    f = g.SampledFunction(box, h, rng.normal(size=box.node_count(h)))
    assert np.all(O.hl_maximal(f).values >= np.abs(f.values) - 1e-15)
    # indicator lower bound d/(d + |x - x0|)
    d, x0 = 0.5, 1.0
    chi = g.sample(box, h, lambda x: np.where(
        (x >= x0 - d) & (x <= x0 + d), 1.0, 0.0))
    m = O.hl_maximal(chi)
    x = m.coords()[0]
    lower = d / (d + np.abs(x - x0))
    assert np.all(m.values >= lower - 1e-12)


def test_hl_maximal_2d_constant():
    box = g.Box((-1.0, -1.0), 2.0)
    f = g.sample(box, 2.0 ** -4, lambda x, y: np.full_like(x, 2.0))
    assert np.allclose(O.hl_maximal(f).values, 2.0)


def test_nt_maximal_dominates_vertical():
    box = g.interval(-8, 8)
    h = 2.0 ** -5
    f = band_limited(box, h)
    sgrid = g.ScaleGrid(2.0 ** -3, 2.0 ** 2, per_octave=4)
    nt = O.nt_maximal(PHI, f, sgrid)
    vert = np.max(np.stack(
        [np.abs(O.slot_convolve(f, PHI.as_kernel(), t).values)
         for t in sgrid.nodes]), axis=0)
    assert np.all(nt.values >= vert - 1e-12)
    z = f.with_values(np.zeros_like(f.values))
    assert np.max(O.nt_maximal(PHI, z, sgrid).values) == 0.0


def test_nt_maximal_bounded_by_hl():
    box = g.interval(-8, 8)
    h = 2.0 ** -5
    f = band_limited(box, h)
    sgrid = g.ScaleGrid(2.0 ** -3, 2.0 ** 2, per_octave=4)
    nt = O.nt_maximal(PHI, f, sgrid).values
    hl = O.hl_maximal(f).values
    inner = g.guard_band(f, 4.0)
    # fitted constant: the majorant of the bump has mass 1 and the
    # non-tangential shift costs a fixed comparability factor
    assert np.max(nt[inner] / np.maximum(hl[inner], 1e-12)) < 4.0


def test_reproducing_residual_m1():
    box = g.interval(-16, 16)
    h = 2.0 ** -5
    f = band_limited(box, h, lo=1.0, hi=3.0)
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                          form="product", slot_kernels=(FAM.psi,))
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    t = 1.0
    prof = O.reproducing_profile(op, PHI, FAM, (f,), t,
                                 [2.0 ** -2, 2.0 ** -4, 2.0 ** -6])
    r = [prof[2.0 ** -2], prof[2.0 ** -4], prof[2.0 ** -6]]
    assert r[0] > r[1] > r[2]
    base = O.apply_theta(op, t, (f,))
    ref = np.sqrt(np.sum(np.where(op.mask(), base.values, 0.0) ** 2) * h)
    assert r[2] <= 0.05 * ref


def test_almost_orth_ratio():
    # finite over 12 octaves of scale separation
    for k in (-6, -3, 0, 3, 6):
        r = O.almost_orth_ratio(2.0, 2.0, 2.0 ** k, 1.0,
                                [0.0, 0.5, 1.0, 4.0, 16.0])
        assert np.isfinite(r) and 0 < r < 100.0
    # joint dilation invariance
    a = O.almost_orth_ratio(2.0, 2.0, 0.5, 1.0, [0.7])
    b = O.almost_orth_ratio(2.0, 2.0, 0.5 * 8, 8.0, [0.7 * 8])
    assert a == pytest.approx(b, abs=1e-6)


def test_pi_decay_ratio_and_slope():
    box = g.interval(-16, 16)
    h = 2.0 ** -4
    f = band_limited(box, h, lo=1.0, hi=3.0)
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=2.0, holder=1.0,
                          form="product", slot_kernels=(FAM.psi,))
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    de = K.derived_exponents(N=2.0, gamma=1.0, n=1)
    t = 1.0
    # finite ratio at s = t
    r0 = O.pi_decay_ratio(op, PHI, FAM, 1, t, t, (f,), de.gamma_prime)
    assert np.isfinite(r0) and r0 > 0
    # slope of the numerator vs min(s/t, t/s) over 6 octaves
    mask = op.mask()
    seps, sups = [], []
    for k in range(1, 7):
        s = t * 2.0 ** -k
        num = O.apply_theta(op, t, O.apply_pi(1, s, PHI, FAM, (f,)))
        seps.append(min(s / t, t / s))
        sups.append(np.max(np.abs(num.values[mask])))
    slope = np.polyfit(np.log(seps), np.log(sups), 1)[0]
    assert slope >= 0.8 * de.gamma_prime


def test_pi_decay_contract_error_for_s_gt_t():
    mult = lambda x, t: np.ones_like(x)
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                          form="product", slot_kernels=(PHI.as_kernel(),),
                          multiplier=mult)
    box = g.interval(-8, 8)
    h = 2.0 ** -5
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    f = band_limited(box, h)
    with pytest.raises(ContractError):
        O.pi_decay_ratio(op, PHI, FAM, 1, 2.0, 1.0, (f,), 0.2)


def test_kernel_tail_bounds():
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=2.0, holder=1.0,
                          form="product", slot_kernels=(FAM.psi,))
    box = g.interval(-16, 16)
    h = 2.0 ** -5
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    Q = g.interval(0.0, 1.0)
    E = [g.interval(4.0, 5.0)]
    for t in (0.25, 1.0):
        r35, r36 = O.kernel_tail_bounds(op, [E], Q, t)
        assert np.isfinite(r35) and r35 < 10.0
        assert np.isfinite(r36) and r36 < 10.0
    # empty sets
    assert O.kernel_tail_bounds(op, [[]], Q, 1.0) == (0.0, 0.0)
    # doubled cube overlapping every set -> contract error
    with pytest.raises(ContractError):
        O.kernel_tail_bounds(op, [[g.interval(-1.0, 2.0)]], Q, 1.0)


def test_domination_by_maximal_product():
    spec = K.MLKernelSpec(arity=2, dimension=1, decay=4.0, holder=1.0,
                          form="product",
                          slot_kernels=(PHI.as_kernel(), PHI.as_kernel()))
    box = g.interval(-8, 8)
    h = 2.0 ** -5
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    f1 = band_limited(box, h, seed=8)
    f2 = band_limited(box, h, seed=9)
    plan = K.SamplePlan(ts=(0.25, 1.0, 4.0), count=256, box=g.interval(-4, 4))
    c_sz = K.validate_size(op.spec, plan)
    m1 = O.hl_maximal(f1).values
    m2 = O.hl_maximal(f2).values
    mask = op.mask()
    for t in (0.25, 1.0):
        th = np.abs(O.apply_theta(op, t, (f1, f2)).values)
        # the sampled size constant certifies pointwise domination up to
        # the majorant-vs-average comparability (factor <= 2^N per slot)
        bound = c_sz * (2.0 ** 4.0) ** 2 * m1 * m2
        assert np.all(th[mask] <= bound[mask] + 1e-12)
