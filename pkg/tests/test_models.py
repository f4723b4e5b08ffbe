import pydantic
import pytest

from gevrey_calculus.adiabatic import FilterSymbol, OperatorFamily
from gevrey_calculus.errors import ValidationError
from gevrey_calculus.fixtures import EXACT, gevrey_filter, rotating_two_level
from gevrey_calculus.gevrey import GevreyCertificate
from gevrey_calculus.jets import Jet, jet_equal
from gevrey_calculus.models import (
    CertificateModel,
    FormalSymbolModel,
    JetModel,
    from_model,
    parse_document,
    to_model,
)
from gevrey_calculus.params import GevreyParams
from gevrey_calculus.rings import GaussianRational
from gevrey_calculus.symbols import FormalSymbol
from gevrey_calculus.utils import load_json


@pytest.mark.parametrize(
    "name, kind",
    [
        ("constant_symbol.json", FormalSymbol),
        ("elliptic_symbol.json", FormalSymbol),
        ("rotating_two_level.json", OperatorFamily),
        ("avoided_crossing.json", OperatorFamily),
        ("gevrey2_filter.json", FilterSymbol),
    ],
)
def test_fixture_files_load(fixtures_dir, name, kind):
    obj = from_model(parse_document(load_json(fixtures_dir / name)))
    assert isinstance(obj, kind)


def test_symbol_document(fixtures_dir):
    p = from_model(parse_document(load_json(fixtures_dir / "elliptic_symbol.json")))
    assert p.N == 3
    assert p.params == GevreyParams(1, 1)
    assert p[0].base_point[1] == GaussianRational(1, 2)
    assert p[1].coefficient((0, 1)) == GaussianRational(0, "1/3")
    model = to_model(p)
    assert isinstance(model, FormalSymbolModel)
    again = from_model(FormalSymbolModel.model_validate(model.model_dump(mode="json")))
    assert all(jet_equal(a, b) for a, b in zip(p.coeffs, again.coeffs))


def test_family_document_matches_the_builtin(fixtures_dir):
    P = from_model(parse_document(load_json(fixtures_dir / "rotating_two_level.json")))
    builtin = rotating_two_level(order=8)
    assert P.dim == 2
    assert P.gap == builtin.gap
    for k in range(9):
        a = P.t_jet.coefficient((k,)).to_array()
        b = builtin.t_jet.coefficient((k,)).to_array()
        assert abs(a - b).max() < 1e-15


def test_filter_document_matches_the_builtin(fixtures_dir):
    filt = from_model(parse_document(load_json(fixtures_dir / "gevrey2_filter.json")))
    assert filt.sigma == 2
    assert jet_equal(filt.tau_jet, gevrey_filter(2, order=12).tau_jet)


def test_certificate_document():
    cert = GevreyCertificate(2.0, 3.0, 0.125, GevreyParams(1, 2), (1.0, 0.5), 8.0, 1)
    model = to_model(cert)
    assert isinstance(model, CertificateModel)
    assert model.radius == 0.125
    assert (model.s, model.sigma, model.exponent) == ("1", "2", "2")
    back = from_model(parse_document(model.model_dump(mode="json")))
    assert back.f_seq == cert.f_seq and back.params == cert.params


def test_matrix_valued_jet_document():
    payload = {
        "kind": "jet", "dim": 2, "n_x": 1, "n_xi": 0, "base_point": ["0"], "order": 1,
        "coeffs": [[[0], [["1", "1/2*i"], ["-1/2*i", "0"]]]],
    }
    jet = from_model(parse_document(payload))
    assert jet.ring.dim == 2
    assert jet.coefficient((0,)).entries[0][1] == GaussianRational(0, "1/2")


def test_unknown_fields_are_rejected():
    with pytest.raises(pydantic.ValidationError):
        parse_document({"kind": "symbol", "coeffs": [], "colour": "blue"})
    with pytest.raises(pydantic.ValidationError):
        parse_document({"kind": "tensor"})
    with pytest.raises(pydantic.ValidationError):
        JetModel.model_validate({"n_x": 1, "n_xi": 1, "base_point": ["0", "0"]})


def test_index_length_is_checked():
    model = JetModel(n_x=1, n_xi=1, base_point=["0", "0"], order=2,
                     coeffs=[([1], "1")])
    with pytest.raises(ValidationError):
        from_model(model)


def test_documents_without_a_kind_tag():
    symbol = parse_document({
        "gevrey": {"s": "1", "sigma": "1"}, "N": 0,
        "coeffs": [{"n_x": 1, "n_xi": 1, "base_point": ["0", "0"], "order": 1,
                    "coeffs": [[[0, 0], "2"], [[1, 0], "1"]]}],
    })
    assert isinstance(symbol, FormalSymbolModel)
    p = from_model(symbol)
    assert p.N == 0 and p[0].coefficient((1, 0)) == 1
    family = parse_document({"dim": 2, "t0": "0", "gap": [0.2, 1.8], "s": "1",
                             "t_jet": [[["1", "0"], ["0", "-1"]], [["0", "1/2"], ["1/2", "0"]]]})
    assert isinstance(from_model(family), OperatorFamily)
    jet = parse_document({"n_x": 1, "n_xi": 0, "base_point": ["0"], "order": 0, "coeffs": [[[0], "3"]]})
    assert isinstance(jet, JetModel)
    filt = parse_document({"sigma": "2", "coeffs": ["0", "1", "2"]})
    assert isinstance(from_model(filt), FilterSymbol)
    with pytest.raises(pydantic.ValidationError):
        parse_document({"colour": "blue"})


def test_symbol_order_must_match_its_coefficients():
    payload = {"N": 2, "coeffs": [{"n_x": 1, "n_xi": 1, "base_point": ["0", "0"], "order": 0}]}
    with pytest.raises(ValidationError):
        from_model(parse_document(payload))


def test_flat_certificate_document():
    payload = {"C": 1.0, "R": 2.0, "T0": 0.125, "s": "1", "sigma": "1",
               "f_seq": [4.0, 8.0, 16.0], "exponent": "1", "residual": 0.01}
    cert = from_model(parse_document(payload))
    assert cert.params == GevreyParams(1, 1)
    assert cert.residual == 0.01
    assert cert.C1 == pytest.approx(4.0)
    assert cert.exponential
    with pytest.raises(ValidationError):
        from_model(parse_document({**payload, "exponent": "2"}))


def test_to_model_rejects_unknown_objects():
    with pytest.raises(ValidationError):
        to_model(object())
    assert isinstance(to_model(Jet.constant(EXACT, 1, 1, 1)), JetModel)
