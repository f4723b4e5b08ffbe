import numpy as np
import pytest

from gevrey_calculus.adiabatic import (
    Contour,
    OperatorFamily,
    check_intertwining,
    check_projector_identity,
    growth_report,
    projector_expansion,
    projector_norms,
    recursion_oracle,
    resolvent_symbol,
    spectral_projector,
    tau_independence_check,
)
from gevrey_calculus.config import Tolerances
from gevrey_calculus.errors import InsufficientData, OnSpectrum, OrderExhausted, ValidationError
from gevrey_calculus.fixtures import (
    avoided_crossing,
    constant_diagonal,
    drifting_diagonal,
    gevrey_filter,
    identity_filter,
    rotating_two_level,
)
from gevrey_calculus.jets import Jet, jet_difference
from gevrey_calculus.rings import Backend, Ring, SquareMatrix


@pytest.fixture(scope="module")
def rotating():
    return rotating_two_level(order=8)


@pytest.fixture(scope="module")
def rotating_expansion(rotating):
    return projector_expansion(rotating, 6)


def test_leading_projector_is_the_spectral_projector(rotating, rotating_expansion):
    pi0 = rotating_expansion.pi_jets[0].coefficient((0,))
    expected = spectral_projector(rotating)
    assert np.allclose(pi0.to_array(), expected.to_array(), atol=1e-9)
    # eigenvalue +1 of diag(1, −1)
    assert np.allclose(expected.to_array(), [[1, 0], [0, 0]])


def test_leading_projector_is_an_orthogonal_projector(rotating, rotating_expansion):
    pi0 = rotating_expansion.pi_jets[0].coefficient((0,)).to_array()
    assert np.allclose(pi0, pi0.conj().T, atol=1e-9)
    assert np.trace(pi0).real == pytest.approx(rotating.window_count(), abs=1e-9)
    assert abs(np.trace(pi0).imag) < 1e-9


def test_projector_identities(rotating, rotating_expansion):
    tol = rotating.tolerances
    assert rotating_expansion.order == 6
    assert check_projector_identity(rotating_expansion).max_residual < 1e-8
    assert check_intertwining(rotating_expansion, rotating).max_residual < 1e-8
    assert rotating_expansion.residuals["idempotency"] <= tol.identity


def test_contour_agrees_with_the_recursion(rotating, rotating_expansion):
    oracle = recursion_oracle(rotating, 6)
    for j, (pi, ref) in enumerate(zip(rotating_expansion.pi_jets, oracle)):
        assert jet_difference(pi, ref) < 1e-8, f"Π_{j}"


def test_first_correction_of_the_rotating_family(rotating_expansion):
    # Π_1 ≠ 0 once P moves: [P, Π_1] = i Π_0'
    assert projector_norms(rotating_expansion)[1] > 0.1


def test_constant_family_has_no_corrections():
    P = constant_diagonal((1, -1), order=4)
    expansion = projector_expansion(P, 3)
    norms = projector_norms(expansion)
    assert norms[0] == pytest.approx(1.0)
    assert max(norms[1:]) < 1e-12
    oracle = recursion_oracle(P, 3)
    assert all(j.max_abs() < 1e-14 for j in oracle[1:])


def test_diagonal_drift_keeps_the_projector_fixed():
    P = drifting_diagonal(order=4)
    expansion = projector_expansion(P, 2)
    assert max(projector_norms(expansion)[1:]) < 1e-10
    assert check_intertwining(expansion, P).max_residual < 1e-9


def test_tau_independence(rotating):
    report = tau_independence_check(rotating, 2, Contour.through(rotating.gap), [0, "1/8", "-1/8"])
    assert report.residuals[0] == 0
    assert report.max_residual < 1e-7


def test_family_validation():
    ring = Ring(Backend.EXACT, 2)
    skew = Jet(ring, 1, 0, [0], 2, {(0,): SquareMatrix([[1, 1], [0, -1]], Backend.EXACT)})
    with pytest.raises(ValidationError):
        OperatorFamily(skew, (0.2, 1.8))
    with pytest.raises(OnSpectrum):
        constant_diagonal((1, -1), gap=(1.0, 2.0))
    with pytest.raises(ValidationError):
        constant_diagonal(gap=(1.8, 0.2))
    scalar = Jet(Ring(Backend.EXACT), 1, 0, [0], 2, {(0,): 1})
    with pytest.raises(ValidationError):
        OperatorFamily(scalar, (0.2, 1.8))


def test_contour_node_on_the_spectrum(rotating):
    with pytest.raises(OnSpectrum):
        resolvent_symbol(rotating, 1.0)
    with pytest.raises(ValidationError):
        Contour(0j, 0.0)


def test_expansion_needs_taylor_data(rotating):
    with pytest.raises(OrderExhausted):
        projector_expansion(rotating, 9)
    with pytest.raises(OrderExhausted):
        recursion_oracle(rotating, 9)


def test_tolerances_flow_through_the_family():
    P = rotating_two_level(order=4)
    strict = OperatorFamily(P.t_jet, P.gap, P.s, P.name, Tolerances(identity=1e-6))
    assert strict.tolerances.identity == 1e-6


def test_growth_report_needs_enough_orders():
    expansion = projector_expansion(rotating_two_level(order=4), 4)
    with pytest.raises(InsufficientData):
        growth_report(expansion, 1)


def test_growth_report_skips_vanishing_corrections():
    expansion = projector_expansion(constant_diagonal(order=8), 7)
    assert growth_report(expansion, 1) is None


@pytest.mark.slow
def test_avoided_crossing_grows_like_factorial():
    P = avoided_crossing(order=14)
    expansion = projector_expansion(P, 12, Contour.through(P.gap, 128), max_doublings=5)
    fit = growth_report(expansion, P.s)
    assert fit.expected_exponent == 1
    assert abs(fit.fitted_exponent - 1) <= 0.5


@pytest.mark.slow
def test_gevrey_filter_raises_the_growth_exponent():
    P = avoided_crossing(order=14)
    filt = gevrey_filter(2)
    expansion = projector_expansion(P, 12, filter=filt)
    fit = growth_report(expansion, P.s, filt.sigma)
    assert fit.expected_exponent == 2
    assert abs(fit.fitted_exponent - 2) <= 0.5


def test_filtered_expansion_identities():
    P = rotating_two_level(order=6)
    filt = gevrey_filter(2, order=6)
    expansion = projector_expansion(P, 2, filter=filt)
    assert expansion.filtered
    scale = max(1.0, max(j.max_abs() for j in expansion.symbol.coeffs))
    assert check_projector_identity(expansion).max_residual <= 1e-8 * scale
    assert check_intertwining(expansion, P, filt).max_residual <= 1e-8 * scale
    pi0 = expansion.pi_jets[0].coefficient((0,))
    assert np.allclose(pi0.to_array(), spectral_projector(P).to_array(), atol=1e-9)
    with pytest.raises(ValidationError):
        check_intertwining(expansion, P)


def test_identity_filter_reproduces_the_plain_expansion(rotating, rotating_expansion):
    filtered = projector_expansion(rotating, 4, filter=identity_filter(order=8))
    for plain, pi in zip(rotating_expansion.pi_jets, filtered.pi_jets):
        assert jet_difference(plain, pi) < 1e-8
