import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevrey_calculus.errors import (
    DegenerateProbe,
    NonInvertible,
    OrderExhausted,
    TruncationExceedsData,
    ValidationError,
)
from gevrey_calculus.fixtures import (
    EXACT,
    factorial_symbol,
    random_elliptic_symbol,
    random_jet,
    x_symbol,
    xi_symbol,
)
from gevrey_calculus.jets import Jet, jet_mul
from gevrey_calculus.params import GevreyParams
from gevrey_calculus.rings import Backend, GaussianRational, Ring
from gevrey_calculus.symbols import (
    FormalSymbol,
    Method,
    Side,
    op_apply,
    parametrix,
    required_jet_depth,
    resum,
    resummation_cutoff,
    resummation_decay,
    sharp,
    symbol_equal,
)

randoms = st.randoms(use_true_random=False)


def _is_identity(r: FormalSymbol) -> bool:
    return symbol_equal(r, FormalSymbol.identity_like(r))


def test_xi_sharp_x_picks_up_minus_i_h():
    r = sharp(xi_symbol(), x_symbol()).symbol
    assert r[0] == jet_mul(xi_symbol()[0], x_symbol()[0])
    assert r[1].coefficient((0, 0)) == GaussianRational(0, -1)
    assert r[1].is_constant()


def test_x_sharp_xi_has_no_correction():
    r = sharp(x_symbol(), xi_symbol()).symbol
    assert r[0].coefficient((1, 1)) == 1
    assert r[1].is_zero()


def test_sharp_tracks_valid_orders():
    p = xi_symbol(order=4, N=2)
    q = x_symbol(order=4, N=2)
    result = sharp(p, q)
    # order k may differentiate k times
    assert result.per_order_valid == [4, 3, 2]
    with pytest.raises(OrderExhausted):
        sharp(p, q, N=3)


@settings(max_examples=8, deadline=None)
@given(randoms)
def test_sharp_is_associative(rnd):
    p, q, r = (random_elliptic_symbol(rnd, n=1, N=2, depth=5) for _ in range(3))
    left = sharp(sharp(p, q).symbol, r).symbol
    right = sharp(p, sharp(q, r).symbol).symbol
    assert symbol_equal(left, right)


def test_sharp_is_associative_in_two_dimensions(rng):
    p, q, r = (random_elliptic_symbol(rng, n=2, N=4, depth=6) for _ in range(3))
    left = sharp(sharp(p, q).symbol, r).symbol
    right = sharp(p, sharp(q, r).symbol).symbol
    assert left.N == right.N == 4
    assert symbol_equal(left, right)


def test_sharp_keeps_matrix_factor_order(rng):
    ring = Ring(Backend.EXACT, 2)
    p = random_elliptic_symbol(rng, n=1, N=1, depth=3, ring=ring)
    q = random_elliptic_symbol(rng, n=1, N=1, depth=3, ring=ring)
    assert sharp(p, q).symbol[0] == jet_mul(p[0], q[0])


@settings(max_examples=10, deadline=None)
@given(randoms, st.sampled_from(list(Method)))
def test_parametrix_is_a_two_sided_inverse(rnd, method):
    p = random_elliptic_symbol(rnd, n=1, N=3, depth=8)
    q = parametrix(p, side=Side.TWO_SIDED, method=method)
    assert _is_identity(sharp(p, q).symbol)
    assert _is_identity(sharp(q, p).symbol)
    assert min(q.per_order_valid) >= 8 - 3


def test_parametrix_in_two_dimensions(rng):
    p = random_elliptic_symbol(rng, n=2, N=2, depth=4)
    q = parametrix(p)
    assert _is_identity(sharp(p, q).symbol)


@pytest.mark.slow
def test_exact_parametrices_of_deep_random_symbols(rng):
    shapes = [(1, 6), (1, 5), (1, 4), (1, 3), (2, 1)] * 10
    for n, N in shapes:
        p = random_elliptic_symbol(rng, n=n, N=N, depth=14)
        q = parametrix(p, side=Side.TWO_SIDED)
        assert q.N == N
        assert min(q.per_order_valid) >= 14 - N
        assert _is_identity(sharp(p, q).symbol)


def test_neumann_and_recursive_agree(rng):
    p = random_elliptic_symbol(rng, n=1, N=4, depth=7)
    neumann = parametrix(p, side="right", method="neumann")
    recursive = parametrix(p, side="right", method="recursive")
    assert symbol_equal(neumann, recursive)


def test_matrix_parametrix(rng):
    ring = Ring(Backend.EXACT, 2)
    p = random_elliptic_symbol(rng, n=1, N=2, depth=5, ring=ring)
    q = parametrix(p)
    assert _is_identity(sharp(p, q).symbol)
    assert _is_identity(sharp(q, p).symbol)


def test_float_parametrix_within_tolerance(rng):
    p = random_elliptic_symbol(rng, n=1, N=3, depth=7).to_float()
    q = parametrix(p)
    r = sharp(p, q).symbol
    assert symbol_equal(r, FormalSymbol.identity_like(r), tol=1e-10)


def test_constant_symbol_parametrix():
    p = FormalSymbol.constant(EXACT, GaussianRational(2, 1), 1, 1, order=2, N=2)
    q = parametrix(p)
    assert q[0].coefficient((0, 0)) == GaussianRational(Fraction(2, 5), Fraction(-1, 5))
    assert q[1].is_zero() and q[2].is_zero()


def test_non_elliptic_symbol_has_no_parametrix():
    p = FormalSymbol.constant(EXACT, 0, 1, 1, order=2, N=1)
    with pytest.raises(NonInvertible):
        parametrix(p)


def test_parametrix_depth_precondition(rng):
    p = random_elliptic_symbol(rng, n=1, N=3, depth=6)
    assert required_jet_depth(3, 4) == 7
    with pytest.raises(OrderExhausted):
        parametrix(p, target_valid=4)
    assert min(parametrix(p, target_valid=3).per_order_valid) >= 3
    with pytest.raises(OrderExhausted):
        parametrix(p, N=4)


def test_composition_needs_square_symbols():
    jet = Jet.constant(EXACT, 1, 2, 1)
    p = FormalSymbol((jet,))
    with pytest.raises(ValidationError):
        sharp(p, p)


def test_op_apply_recovers_the_symbol(rng):
    p = random_elliptic_symbol(rng, n=1, N=3, depth=6)
    one = Jet.constant(EXACT, 1, 1, 1, order=6)
    for m in range(4):
        assert op_apply(p, m, one) == p[m]


@settings(max_examples=10, deadline=None)
@given(randoms)
def test_op_apply_is_composition_with_h_independent_symbols(rnd):
    p = random_elliptic_symbol(rnd, n=1, N=3, depth=6)
    b = random_jet(rnd, EXACT, 1, 1, 6)
    q = FormalSymbol((b,) + tuple(Jet.zero(EXACT, 1, 1, order=6) for _ in range(3)))
    composed = sharp(p, q).symbol
    for m in range(4):
        assert op_apply(p, m, b) == composed[m]


def test_op_apply_needs_deep_inputs(rng):
    p = random_elliptic_symbol(rng, n=1, N=3, depth=6)
    with pytest.raises(OrderExhausted):
        op_apply(p, 3, Jet.constant(EXACT, 1, 1, 1, order=2))


@pytest.mark.parametrize(
    "h, R, params, expected",
    [
        (Fraction(1, 16), 1, GevreyParams(1, 1), 16),
        (Fraction(1, 16), 2, GevreyParams(1, 1), 8),
        (Fraction(1, 16), 1, GevreyParams(2, 1), 4),
        (Fraction(1, 10), 3, GevreyParams(1, 1), 3),
    ],
)
def test_resummation_cutoff(h, R, params, expected):
    assert resummation_cutoff(h, R, params) == expected


def test_resum_is_exact_and_checks_the_cutoff():
    p = factorial_symbol(8)
    value = resum(p, Fraction(1, 4), 1)
    assert value == sum(Fraction(math.factorial(k), 4 ** k) for k in range(5))
    with pytest.raises(TruncationExceedsData):
        resum(p, Fraction(1, 16), 1)
    with pytest.raises(ValidationError):
        resummation_cutoff(0, 1, p.params)


def test_resummation_decay_on_factorial_symbol():
    p = factorial_symbol(256)
    hs = [Fraction(1, 2 ** j) for j in range(4, 9)]
    fit = resummation_decay(p, 1, 2, hs)
    assert fit.slope < 0
    assert fit.r_squared >= 0.95
    assert fit.xs == [16.0, 32.0, 64.0, 128.0, 256.0]


@pytest.mark.slow
def test_resummation_decay_full_range():
    p = factorial_symbol(1024)
    hs = [Fraction(1, 2 ** j) for j in range(4, 11)]
    fit = resummation_decay(p, 1, 2, hs)
    assert fit.slope < 0
    assert fit.r_squared >= 0.95


def test_resummation_decay_with_degenerate_samples():
    p = FormalSymbol.constant(EXACT, 1, 1, 1, order=0, N=64)
    with pytest.raises(DegenerateProbe):
        resummation_decay(p, 1, 2, [Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)])
