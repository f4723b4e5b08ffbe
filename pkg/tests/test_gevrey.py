import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevrey_calculus.errors import (
    DegenerateProbe,
    IncompatibleCertificates,
    InsufficientData,
    MissingGrowthData,
    OrderExhausted,
    ValidationError,
)
from gevrey_calculus.fixtures import EXACT, elliptic_fixture, random_elliptic_symbol, random_jet
from gevrey_calculus.gevrey import (
    GevreyCertificate,
    SampleSet,
    ak_sup,
    bk_norm,
    certificate_compose,
    certificate_from_symbol,
    check_certificate,
    check_derivative_inequality,
    check_pseudonorm_envelope,
    check_product_inequality,
    derivative_bounds_from_pseudonorm,
    fit_growth,
    fm_probe,
    growth_table,
    neumann_certificate,
    neumann_radius,
    pseudonorm,
    pseudonorm_envelope,
    rho_norm,
    symbol_constants,
)
from gevrey_calculus.jets import Jet
from gevrey_calculus.params import GevreyParams
from gevrey_calculus.rings import GaussianRational
from gevrey_calculus.symbols import Side, parametrix, sharp

randoms = st.randoms(use_true_random=False)
ANALYTIC = GevreyParams(1, 1)


def test_pseudonorm_of_simple_jets():
    c = Jet.constant(EXACT, GaussianRational(3, -4), 1, 1, order=3)
    assert pseudonorm(c, Fraction(1, 2), ANALYTIC) == 7
    x2 = Jet(EXACT, 1, 1, [0, 0], 3, {(2, 0): 1})
    # ∂_x² x² = 2, weight T² / 2!
    assert pseudonorm(x2, Fraction(1, 2), ANALYTIC) == Fraction(1, 4)
    assert pseudonorm(x2, Fraction(1, 2), GevreyParams(2, 1)) == Fraction(1, 8)
    assert isinstance(pseudonorm(x2.to_float(), Fraction(1, 2), ANALYTIC), float)
    with pytest.raises(ValidationError):
        pseudonorm(x2, -1, ANALYTIC)


def test_pseudonorm_at_an_offset():
    x = Jet.variable(EXACT, 0, 1, 1, order=2)
    # x re-expanded at 1/2: value 1/2, slope 1
    assert pseudonorm(x, Fraction(1, 4), ANALYTIC, at=[Fraction(1, 2), 0]) == Fraction(3, 4)
    K = SampleSet.grid(2, Fraction(1, 2), 3)
    assert len(K) == 9
    assert bk_norm(x, K, Fraction(1, 4), ANALYTIC) == Fraction(3, 4)


@settings(max_examples=50, deadline=None)
@given(randoms, st.sampled_from([GevreyParams(1, 1), GevreyParams(2, 1), GevreyParams(2, 3)]))
def test_product_inequality_holds_exactly(rnd, params):
    a = random_jet(rnd, EXACT, 1, 1, 5)
    b = random_jet(rnd, EXACT, 1, 1, 4)
    report = check_product_inequality(a, b, Fraction(1, 3), params)
    assert report.holds
    assert isinstance(report.lhs, Fraction)


@settings(max_examples=50, deadline=None)
@given(randoms, st.sampled_from([1, 2, 3]), st.sampled_from([(1, 0), (2, 0), (0, 1), (0, 3)]))
def test_derivative_inequality(rnd, s, gamma):
    a = random_jet(rnd, EXACT, 1, 1, 6)
    report = check_derivative_inequality(a, gamma, Fraction(1, 8), Fraction(1, 4), GevreyParams(s, s))
    assert report.holds


def test_derivative_inequality_preconditions(rng):
    a = random_jet(rng, EXACT, 1, 1, 3)
    with pytest.raises(ValidationError):
        check_derivative_inequality(a, (1, 1), Fraction(1, 8), Fraction(1, 4), ANALYTIC)
    with pytest.raises(ValidationError):
        check_derivative_inequality(a, (1, 0), Fraction(1, 4), Fraction(1, 8), ANALYTIC)
    with pytest.raises(OrderExhausted):
        check_derivative_inequality(a, (4, 0), Fraction(1, 8), Fraction(1, 4), ANALYTIC)


@pytest.mark.parametrize("s", [1, 2, 3])
@pytest.mark.parametrize("theta", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
def test_ak_sup_never_exceeds_the_bound(s, theta):
    for b in range(11):
        result = ak_sup(b, theta, s)
        assert result.within_bound
        assert result.window >= result.ratio_argmax


def test_ak_sup_small_cases():
    # b = 0: the sup of θ^k is attained at k = 0
    assert ak_sup(0, Fraction(1, 2), 1).value == 1
    with pytest.raises(ValidationError):
        ak_sup(1, 1, 1)


def test_pseudonorm_envelope_and_derivative_bounds():
    assert pseudonorm_envelope(2, 1, Fraction(1, 2), 1) == 8
    with pytest.raises(ValidationError):
        pseudonorm_envelope(1, 2, Fraction(1, 2), 1)
    # 1/((1−x)(1−ξ)) has derivative bounds 1·1^{|γ|} α! β!
    coeffs = {(i, j): 1 for i in range(7) for j in range(7 - i)}
    a = Jet(EXACT, 1, 1, [0, 0], 6, coeffs)
    assert check_pseudonorm_envelope(a, 1, 1, Fraction(1, 4), ANALYTIC).holds
    assert derivative_bounds_from_pseudonorm(a, Fraction(1, 4), ANALYTIC).holds


def test_certificate_needs_constants_or_a_fit(rng):
    p = random_elliptic_symbol(rng, n=1, N=2, depth=4)
    K = SampleSet.base_only(2)
    with pytest.raises(MissingGrowthData):
        certificate_from_symbol(p, K, Fraction(1, 4))


def test_certificate_is_sound(rng):
    p = random_elliptic_symbol(rng, n=1, N=3, depth=5)
    K = SampleSet.base_only(2)
    C, R = symbol_constants(p, K)
    cert = certificate_from_symbol(p, K, Fraction(1, 4), C, R)
    assert len(cert.f_seq) == 4
    assert cert.exponential
    assert cert.T0 <= 2.0 ** -2 / R
    T = Fraction(1, 4) / Fraction(R)
    assert check_certificate(p, cert, K, T).holds


def _certificate(f_seq, C1=4.0):
    return GevreyCertificate(1.0, 1.0, 0.25, ANALYTIC, tuple(f_seq), C1, 1)


def test_rho_norm_is_exact():
    cert = _certificate([1.0, 0.5, 0.25])
    assert rho_norm(cert, Fraction(1, 2)) == Fraction(1) + Fraction(1, 4) + Fraction(1, 16)
    with pytest.raises(ValidationError):
        rho_norm(cert, 0)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=4, max_size=4), st.lists(st.integers(0, 8), min_size=4, max_size=4))
def test_composed_norm_is_submultiplicative(fa, fb):
    cA = _certificate([float(f) for f in fa], C1=8.0)
    cB = _certificate([float(f) for f in fb], C1=8.0)
    rho = Fraction(1, 16)
    composed = certificate_compose(cA, cB, rho)
    assert rho_norm(composed, rho) <= rho_norm(cA, rho) * rho_norm(cB, rho)
    assert composed.C1 >= cA.C1 * cB.C1


def test_incompatible_certificates():
    cA = _certificate([1.0, 1.0])
    cB = GevreyCertificate(1.0, 1.0, 0.25, GevreyParams(2, 1), (1.0, 1.0), 4.0, 1)
    with pytest.raises(IncompatibleCertificates):
        certificate_compose(cA, cB, Fraction(1, 8))
    with pytest.raises(IncompatibleCertificates):
        certificate_compose(cA, cA, Fraction(1, 2))


def _certify(p, T0=Fraction(1, 4)):
    K = SampleSet.base_only(p[0].n_vars)
    C, R = symbol_constants(p, K)
    return certificate_from_symbol(p, K, T0, C, R)


def test_certificates_of_random_pairs_compose(rng):
    for _ in range(20):
        p = random_elliptic_symbol(rng, n=1, N=3, depth=8)
        q = random_elliptic_symbol(rng, n=1, N=3, depth=8)
        cp, cq = _certify(p), _certify(q)
        rho = Fraction(min(cp.radius, cq.radius)) / 2
        composed = certificate_compose(cp, cq, rho)
        assert composed.T0 == min(cp.T0, cq.T0)
        assert rho_norm(composed, rho) <= rho_norm(cp, rho) * rho_norm(cq, rho)


def test_composed_certificate_bounds_the_composed_operator(rng):
    for _ in range(3):
        p = random_elliptic_symbol(rng, n=1, N=2, depth=6)
        q = random_elliptic_symbol(rng, n=1, N=2, depth=6)
        cp, cq = _certify(p), _certify(q)
        composed = certificate_compose(cp, cq, Fraction(min(cp.radius, cq.radius)) / 2)
        r = sharp(p, q).symbol
        K = SampleSet.base_only(2)
        trial_jets = [b for b in (random_jet(rng, EXACT, 1, 1, 6) for _ in range(4)) if not b.is_zero()]
        T0 = Fraction(composed.T0)
        for m in range(3):
            assert fm_probe(r, m, K, T0 / 4, T0 / 2, trial_jets) <= composed.f_seq[m]


def test_neumann_series_is_bounded_by_two():
    c_r = _certificate([0.0, 1.0, 2.0, 4.0, 8.0])
    rho = neumann_radius(c_r)
    assert rho_norm(c_r, rho) < Fraction(1, 2)
    result = neumann_certificate(c_r, rho)
    assert result.bounded_by_two
    assert result.series_norm <= 2
    with pytest.raises(ValidationError):
        neumann_certificate(_certificate([1.0, 1.0]), rho)


def test_fm_probe(rng):
    p = random_elliptic_symbol(rng, n=1, N=2, depth=6)
    K = SampleSet.base_only(2)
    trial_jets = [random_jet(rng, EXACT, 1, 1, 6) for _ in range(3)]
    trial_jets = [b for b in trial_jets if not b.is_zero()]
    assert fm_probe(p, 1, K, Fraction(1, 8), Fraction(1, 4), trial_jets) >= 0
    with pytest.raises(DegenerateProbe):
        fm_probe(p, 1, K, Fraction(1, 8), Fraction(1, 4), [Jet.zero(EXACT, 1, 1, order=6)])


def test_operator_norm_estimate_stays_below_the_certificate(rng):
    K = SampleSet.base_only(2)
    for _ in range(10):
        p = random_elliptic_symbol(rng, n=1, N=2, depth=6)
        cert = _certify(p)
        trial_jets = [b for b in (random_jet(rng, EXACT, 1, 1, 6) for _ in range(5)) if not b.is_zero()]
        T0 = Fraction(cert.T0)
        for m in range(3):
            assert fm_probe(p, m, K, T0 / 4, T0 / 2, trial_jets) <= cert.f_seq[m]


def test_inequality_slack_is_configurable():
    a = Jet(EXACT, 1, 1, [0, 0], 4, {(0, 0): 1, (1, 0): 1, (0, 1): 1}).to_float()
    report = check_pseudonorm_envelope(a, 1, 1, Fraction(1, 4), ANALYTIC)
    assert report.holds
    tight = float(report.lhs) / float(report.rhs) * 0.999
    assert not check_pseudonorm_envelope(a, tight, 1, Fraction(1, 4), ANALYTIC).holds
    assert check_pseudonorm_envelope(a, tight, 1, Fraction(1, 4), ANALYTIC, slack=0.01).holds


def test_fit_growth_recovers_synthetic_constants():
    norms = [3.0 * 2.0 ** k * math.factorial(k) ** 1.5 for k in range(15)]
    fit = fit_growth(norms, expected_exponent=Fraction(3, 2))
    assert fit.fitted_exponent == pytest.approx(1.5, abs=1e-8)
    assert fit.fitted_R == pytest.approx(2.0, rel=1e-6)
    assert fit.fitted_C == pytest.approx(3.0, rel=1e-6)
    assert fit.residual < 1e-12
    rows = growth_table(norms, fit)
    assert all(r[3] == pytest.approx(1.0, rel=1e-6) for r in rows)


def test_fit_growth_needs_enough_points():
    with pytest.raises(InsufficientData):
        fit_growth([1.0, 1.0, 2.0, 6.0, 0.0, 0.0, 720.0])


@pytest.mark.slow
@pytest.mark.parametrize("s, expected, tolerance", [(1, 1.0, 0.3), (2, 2.0, 0.4)])
def test_parametrix_coefficients_grow_like_factorials(s, expected, tolerance):
    p = elliptic_fixture(s=s, N=20)
    q = parametrix(p, side=Side.RIGHT, method="recursive")
    K = SampleSet.base_only(2)
    norms = [bk_norm(q[k], K, Fraction(1, 8), p.params) for k in range(q.N + 1)]
    fit = fit_growth(norms, p.params)
    assert abs(fit.fitted_exponent - expected) <= tolerance
