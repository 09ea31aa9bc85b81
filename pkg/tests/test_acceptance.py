"""End-to-end acceptance battery.

Each test pins one headline behavior of the laboratory at its stated
tolerance.  Scenario reports are computed once per session and individual
criteria assert on their check records."""
import subprocess
import sys

import numpy as np
import pytest

import sqfn.carleson as C
import sqfn.grid as g
import sqfn.kernels as K
import sqfn.lab as lab
import sqfn.operators as O
import sqfn.weights as W

PHI = K.standard_bump(1)
FAM = K.standard_family(1)


@pytest.fixture(scope="module")
def ex38_report():
    return lab.scenario_ex38()


@pytest.fixture(scope="module")
def ex37_report():
    return lab.scenario_ex37()


@pytest.fixture(scope="module")
def meanzero_report():
    return lab.scenario_meanzero()


@pytest.fixture(scope="module")
def bilinear_report():
    return lab.scenario_bilinear_weighted()


# 1. exact pointwise values, 2% relative, with the stated lower bound
def test_criterion_1_exact_values(ex38_report):
    assert ex38_report.environment["per_octave"] >= 64
    for x in (-0.5, -0.25, -0.1):
        rec = ex38_report.check(f"pointwise-x={x}")
        assert rec.tolerance <= 0.02 and rec.passed
        assert rec.reference == pytest.approx(lab.ex38_exact_value(x))
        assert ex38_report.check(f"lower-bound-x={x}").passed


# 2. Carleson finite/stable, strong-point divergence, two-cube growth
def test_criterion_2_dichotomy(ex38_report):
    assert ex38_report.check("carleson-finite").passed
    stable = ex38_report.check("carleson-stable")
    assert stable.passed and stable.reference == 0.10
    strong = ex38_report.check("strong-divergence")
    assert strong.passed and strong.computed >= 5.62
    assert ex38_report.check("two-cube-growth").computed > 1.0


# 3. transform closed form
def test_criterion_3_fourier_closed_form(ex38_report):
    assert ex38_report.check("hat-closed-form").computed <= 1e-3
    rec = ex38_report.check("hat-at-pi")
    assert abs(rec.computed - 4.0 / np.pi) <= 1e-3


# 4. mean-zero dichotomy for t-constant convolution kernels
def test_criterion_4_mean_zero_clause(meanzero_report):
    assert meanzero_report.check("meanzero-constants").computed <= 1e-8
    assert meanzero_report.check("meanzero-carleson").computed <= 1e-12
    assert meanzero_report.check("nonzero-mean-log-growth").computed <= 1e-6


# 5. transform-side square-function constant
def test_criterion_5_plancherel_constant(meanzero_report):
    rec = meanzero_report.check("plancherel-ratio")
    assert rec.passed and rec.tolerance <= 0.02
    assert rec.reference == pytest.approx(np.sqrt(4 * np.log(2)))


# 6. reproducing identity residuals decrease and end below 5%
def test_criterion_6_reproducing_identity():
    box = g.interval(-16, 16)
    h = 2.0 ** -5
    f = lab.band_limited_fixture(box, h, seed=7)
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=4.0, holder=1.0,
                          form="product", slot_kernels=(FAM.psi,))
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    eps = [2.0 ** -2, 2.0 ** -4, 2.0 ** -6]
    prof = O.reproducing_profile(op, PHI, FAM, (f,), 1.0, eps)
    r = [prof[e] for e in eps]
    assert r[0] > r[1] > r[2]
    base = O.apply_theta(op, 1.0, (f,))
    ref = np.sqrt(np.sum(np.where(op.mask(), base.values, 0.0) ** 2) * h)
    assert r[2] <= 0.05 * ref


# 7. decay slope of the composed operator over 6 octaves
def test_criterion_7_decay_slope():
    box = g.interval(-16, 16)
    h = 2.0 ** -4
    f = lab.band_limited_fixture(box, h, seed=7)
    spec = K.MLKernelSpec(arity=1, dimension=1, decay=2.0, holder=1.0,
                          form="product", slot_kernels=(FAM.psi,))
    op = O.ThetaOperator(spec, box, h, guard_radius=2.0)
    de = K.derived_exponents(N=2.0, gamma=1.0, n=1)
    mask = op.mask()
    seps, sups = [], []
    for k in range(1, 7):
        s = 2.0 ** -k
        num = O.apply_theta(op, 1.0, O.apply_pi(1, s, PHI, FAM, (f,)))
        seps.append(s)
        sups.append(np.max(np.abs(num.values[mask])))
    slope = np.polyfit(np.log(seps), np.log(sups), 1)[0]
    assert slope >= 0.8 * de.gamma_prime


# 8. almost-orthogonality ratio finite and dilation invariant
def test_criterion_8_almost_orthogonality():
    for k in range(-6, 7, 2):
        r = O.almost_orth_ratio(2.0, 2.0, 2.0 ** k, 1.0,
                                [0.0, 0.5, 1.0, 4.0])
        assert np.isfinite(r) and r > 0
    a = O.almost_orth_ratio(2.0, 2.0, 0.5, 1.0, [0.7])
    b = O.almost_orth_ratio(2.0, 2.0, 4.0, 8.0, [5.6])
    assert abs(a - b) <= 1e-6


# 9. A_p estimator identities
def test_criterion_9_ap_estimator():
    fam12 = C.CubeFamily(g.interval(-1, 1), 0, 12).cubes()
    fam14 = C.CubeFamily(g.interval(-1, 1), 0, 14).cubes()
    assert W.ap_constant(W.constant_weight(), 2.0, fam12).value == 1.0
    w = W.power_weight(0.5)
    v12 = W.ap_constant(w, 2.0, fam12).value
    v14 = W.ap_constant(w, 2.0, fam14).value
    assert abs(v14 - v12) / v14 <= 0.05
    # scale invariance: power weights see dilated families identically
    fam_big = C.CubeFamily(g.interval(-4, 4), 0, 12).cubes()
    assert W.ap_constant(w, 2.0, fam_big).value == pytest.approx(
        v12, rel=1e-12)
    # duality: [w^(1-p')]_{p'} = [w]_p^(p'-1)
    p = 3.0
    pp = W.dual_exponent(p)
    vp = W.ap_constant(W.power_weight(0.5), p, fam12).value
    vd = W.ap_constant(W.power_weight(0.5).pow(1.0 - pp), pp, fam12).value
    assert abs(vd - vp ** (pp - 1.0)) <= 1e-12 * max(1.0, vd)


# 10. CZ cover and total-measure bound on random finite unions
def test_criterion_10_cz_decomposition():
    rng = np.random.default_rng(11)
    root = g.interval(0.0, 1.0)
    lam = 0.5
    for _ in range(100):
        k = int(rng.integers(1, 5))
        starts = np.sort(rng.uniform(0.0, 0.9, size=k))
        pieces = [g.interval(float(a), float(min(a + w, 1.0)))
                  for a, w in zip(starts, rng.uniform(0.01, 0.2, size=k))]
        merged = W.merge_intervals(pieces)
        measure = sum(p.side for p in merged)
        cubes = W.cz_decompose(pieces, lam, root)
        total = sum(q.side for q in cubes)
        assert total <= measure / lam + 1e-12
        for p in merged:  # cover: each piece sits inside selected cubes
            xs = np.linspace(p.corner[0] + 1e-9,
                             p.corner[0] + p.side - 1e-9, 17)
            for x in xs:
                assert any(q.contains_point((x,)) for q in cubes)


# 11. weighted tent inequality, 20 random trials, zero failures
def test_criterion_11_tent_bound():
    op = lab.haar_multiplier_op(g.interval(-8, 8), 2.0 ** -6, guard=2.0)
    cf = C.theta_one_field(op, g.ScaleGrid(2.0 ** -5, 1.0, 4))
    family = C.CubeFamily(g.interval(-4, 4), 0, 6)
    rng = np.random.default_rng(5)
    for _ in range(20):
        k = int(rng.integers(1, 4))
        starts = rng.uniform(-3.5, 3.0, size=k)
        pieces = [g.interval(float(a), float(a + w))
                  for a, w in zip(starts, rng.uniform(0.1, 0.5, size=k))]
        a = float(rng.uniform(-0.5, 0.5))
        lhs, rhs = C.tent_bound_check(cf, W.power_weight(a), pieces, family)
        assert lhs <= rhs * (1.0 + 1e-9)


# 12. weighted bilinear ratios: finite, stable, constants reported
def test_criterion_12_weighted_bounds(bilinear_report):
    for p in ("2", "1", "0.666667"):
        rec = bilinear_report.check(f"ratio-finite-p={p}")
        assert rec.passed and np.isfinite(rec.computed)
        assert bilinear_report.check(f"constant-consistent-p={p}").passed
    stable = bilinear_report.check("refinement-stable")
    assert stable.passed and stable.reference == 0.10
    assert bilinear_report.check("homogeneity").passed


# 13. strong constant dominates the averaged one; equality when the
# density is constant in x
def test_criterion_13_strong_dominates(meanzero_report):
    rec = meanzero_report.check("x-constant-agreement")
    assert rec.passed and rec.computed <= 1e-10
    op = lab.haar_multiplier_op(g.interval(-4, 4), 2.0 ** -6, guard=1.5)
    cf = C.theta_one_field(op, g.ScaleGrid(2.0 ** -5, 1.0, 8))
    family = C.CubeFamily(g.interval(-2, 2), 0, 5)
    strong = C.strong_carleson_constant(cf, family).value
    avg = C.carleson_constant(cf, family).value
    assert strong >= avg * (1.0 - 1e-12)


# 14. byte-identical verify output across repeated runs
def test_criterion_14_determinism(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "sqfn.cli", "verify", "--suite", "all",
             "--seed", "7", "--out", str(path)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_full_suite_verdict(ex38_report, ex37_report, meanzero_report,
                            bilinear_report):
    for rep in (ex38_report, ex37_report, meanzero_report, bilinear_report):
        assert rep.verdict, [c.id for c in rep.checks if not c.passed]
