import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from symscatter.errors import (
    DimensionMismatch,
    InvalidOperator,
    ParseError,
    SymmetryNotSatisfied,
    ValidationError,
)
from symscatter.models import get_model
from symscatter.network import LeadAttachment, ScatteringNetwork, two_port_network
from symscatter.scattering import delta_inverse_elements, open_k_grid, two_port
from symscatter.symmetry import (
    IDENTITY,
    INTERCHANGE,
    NEITHER,
    ConstraintPrediction,
    MappingClass,
    SymmetrySpec,
    apply_transform,
    check_delta_conditions,
    check_operator,
    classify_mapping,
    detect,
    generate_ensemble,
    make_operator,
    parse_symmetry,
    predict,
    protecting_classes,
    serialize_symmetry,
    validate_sweep,
    verify,
)

SX = np.array([[0, 1], [1, 0]])
H = np.array([[1, 2j], [3, 4 + 1j]])


@pytest.mark.parametrize(
    "kind, want", [("C", H.T), ("K", H.conj()), ("Q", H.conj().T), ("P", H)]
)
def test_apply_transform_identity_operator(kind, want):
    assert np.allclose(apply_transform(H, SymmetrySpec(kind, 1, np.eye(2))), want)
    assert np.allclose(apply_transform(H, SymmetrySpec(kind, -1, np.eye(2))), -want)


def test_apply_transform_conjugates_by_operator():
    got = apply_transform(H, SymmetrySpec("P", 1, SX))
    assert np.allclose(got, SX @ H @ SX)
    with pytest.raises(DimensionMismatch):
        apply_transform(np.eye(3), SymmetrySpec("P", 1, SX))


def test_verify_examples():
    qi = get_model("qI_gain_loss").network.hc
    assert verify(qi, SymmetrySpec("Q", 1, SX)) < 1e-12
    assert verify(qi, SymmetrySpec("C", 1, np.eye(2))) > 0.1
    assert verify(np.zeros((2, 2)), SymmetrySpec("K", -1, np.eye(2))) == 0


def test_check_operator():
    with pytest.raises(InvalidOperator):
        check_operator(SymmetrySpec("C", 1, [[1, 1], [0, 1]]))
    with pytest.raises(InvalidOperator):
        check_operator(SymmetrySpec("Q", 1, np.diag([1, 1j])))
    assert check_operator(SymmetrySpec("C", 1, np.diag([1, 1j]))) == 1
    assert check_operator(SymmetrySpec("K", 1, [[0, 1], [-1, 0]])) == -1
    with pytest.raises(InvalidOperator):
        check_operator(SymmetrySpec("C", 1, [[0, 1], [1j, 0]]))


def test_spec_validation():
    with pytest.raises(ValidationError):
        SymmetrySpec("X", 1, np.eye(2))
    with pytest.raises(ValidationError):
        SymmetrySpec("C", 0, np.eye(2))
    assert SymmetrySpec("Q", -1, np.eye(2)).label == "Q-"


def test_classify_mapping():
    c = classify_mapping(np.diag([1, np.exp(0.7j), 1]), 0, 1)
    assert c.variant == IDENTITY and c.alpha == pytest.approx(0.7)
    # a global phase does not change alpha
    c = classify_mapping(np.exp(1.1j) * np.diag([1, np.exp(0.7j)]), 0, 1)
    assert c.alpha == pytest.approx(0.7)
    c = classify_mapping(np.array([[0, 1j], [-1j, 0]]), 0, 1)
    assert c.variant == INTERCHANGE and c.alpha == pytest.approx(math.pi)
    x3 = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    assert classify_mapping(x3, 0, 2).variant == INTERCHANGE
    assert classify_mapping(x3, 0, 1).variant == NEITHER
    assert classify_mapping(np.array([[1, 1], [1, -1]]) / math.sqrt(2), 0, 1).variant == NEITHER
    assert MappingClass(NEITHER).subscript == "-"


@pytest.mark.parametrize(
    "kind, variant, want",
    [
        ("C", IDENTITY, ConstraintPrediction(t_modulus=True, t_phase_relation=0.4)),
        ("C", INTERCHANGE, ConstraintPrediction(r_modulus=True, r_complex=True)),
        ("K", IDENTITY, ConstraintPrediction(r_modulus=True)),
        ("K", INTERCHANGE, ConstraintPrediction(t_modulus=True)),
        ("Q", IDENTITY, ConstraintPrediction(t_modulus=True, r_modulus=True)),
        ("Q", INTERCHANGE, ConstraintPrediction()),
        ("P", IDENTITY, ConstraintPrediction()),
        ("P", INTERCHANGE, ConstraintPrediction(t_modulus=True, t_phase_relation=0.4, r_modulus=True, r_complex=True)),
    ],
)
def test_predict_table(kind, variant, want):
    alpha = 0.0 if (kind, variant) == ("Q", IDENTITY) else 0.4
    spec = SymmetrySpec(kind, 1, np.eye(2))
    assert predict(spec, MappingClass(variant, alpha)) == want
    assert predict(SymmetrySpec(kind, -1, np.eye(2)), MappingClass(variant, alpha)).is_empty


def test_predict_q_identity_needs_real_phase():
    with pytest.raises(InvalidOperator):
        predict(SymmetrySpec("Q", 1, np.eye(2)), MappingClass(IDENTITY, 0.3))
    assert not predict(SymmetrySpec("Q", 1, np.eye(2)), MappingClass(IDENTITY, math.pi)).is_empty


def test_describe():
    assert ConstraintPrediction().describe() == ["none"]
    assert ConstraintPrediction(t_modulus=True, r_complex=True, r_modulus=True).describe() == ["|t_L| = |t_R|", "r_L = r_R"]


def test_delta_conditions():
    c = check_delta_conditions((0, 1, 1, 0), 1.0, -math.pi / 2)
    assert c.t_equal and c.t_modulus and c.r_equal and c.r_modulus and c.accidental_r_modulus
    c = check_delta_conditions((1, 2, 1j, 3), 1.0, -1.0)
    assert not (c.t_equal or c.t_modulus or c.r_equal or c.accidental_r_modulus)
    assert c.r_modulus is False
    c = check_delta_conditions((1, 2, 2j, 3), 1.0, -1.0)
    assert c.t_modulus and not c.t_equal


def test_accidental_reflection_condition_gives_equal_reflection():
    # the uniform chain at k = -pi/2 satisfies the accidental condition
    net = two_port_network([[0, 1], [1, 0]])
    els = delta_inverse_elements(net, 1, 2, -math.pi / 2)
    assert check_delta_conditions(els, 1.0, -math.pi / 2).accidental_r_modulus
    c = two_port(net, 1, 2, -math.pi / 2)
    assert abs(abs(c.r_l) - abs(c.r_r)) < 1e-12


def test_validate_sweep_kI():
    e = get_model("three_resonator_kI")
    rep = validate_sweep(e.network, *e.ports, e.specs, open_k_grid(25))
    assert rep.passed and rep.evaluated == 25
    assert rep.results[0].mapping.variant == INTERCHANGE
    assert rep.results[0].max_violation["|t_L|=|t_R|"] < 1e-12
    assert rep.max_r_asymmetry > 1e-3


def test_validate_sweep_hermitian():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    net = two_port_network(a + a.conj().T, sites=(0, 3))
    rep = validate_sweep(net, 1, 2, [SymmetrySpec("Q", 1, np.eye(4))], open_k_grid(25))
    assert rep.passed
    assert rep.max_t_asymmetry < 1e-12 and rep.max_r_asymmetry < 1e-12


def test_validate_sweep_errors():
    net = two_port_network([[0, 1], [2, 0]])
    with pytest.raises(SymmetryNotSatisfied):
        validate_sweep(net, 1, 2, [SymmetrySpec("C", 1, np.eye(2))], [-1.0])
    weak = ScatteringNetwork(np.zeros((2, 2)), (LeadAttachment(1, 0, 0.5), LeadAttachment(2, 1, 1.0)))
    with pytest.raises(ValidationError):
        validate_sweep(weak, 1, 2, [], [-1.0])


@pytest.mark.parametrize(
    "name, classes",
    [
        ("uniform_two_site", {"C_1", "C_I", "K_1", "K_I", "P_I", "Q_1"}),
        ("c1_phase", {"C_1"}),
        ("q1_example", {"C_1", "K_1", "Q_1"}),
        ("qI_gain_loss", set()),
        ("asym_two_site", {"C_I", "K_1"}),
        ("isolator_single_loss", {"C_I"}),
        ("unidirectional", set()),
        ("dissipative_figS1", {"K_1"}),
        ("three_resonator_kI", {"K_I"}),
    ],
)
def test_detect_catalog(name, classes):
    e = get_model(name)
    net = e.network
    found = detect(net.hc, net.lead(e.ports[0]).site, net.lead(e.ports[1]).site)
    assert protecting_classes(found) == classes
    for d in found:
        assert verify(net.hc, d.spec) < 1e-9
        assert not (d.spec.kind == "P" and d.spec.parity == 1 and np.allclose(d.spec.u, np.eye(net.n)))


def test_detect_c1_phase_alpha():
    e = get_model("c1_phase", phi=0.3)
    (d,) = detect(e.network.hc, 0, 1)
    assert d.mapping.alpha == pytest.approx(0.6)


def test_detect_limits():
    with pytest.raises(ValidationError):
        detect(np.zeros((9, 9)), 0, 1)
    with pytest.raises(ValidationError):
        detect(np.zeros((2, 2)), 0, 0)


def test_generate_ensemble():
    x3 = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    a = generate_ensemble("C", 1, x3, seed=1, count=100)
    b = generate_ensemble("C", 1, x3, seed=1, count=100)
    assert len(a) == 100
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    spec = SymmetrySpec("C", 1, x3)
    assert max(verify(h, spec) for h in a) < 1e-12
    assert not np.array_equal(a[0], generate_ensemble("C", 1, x3, seed=2, count=1)[0])


def test_real_center_has_real_delta_inverse():
    # K with the identity operator: every Delta^{-1} element is real
    (h,) = generate_ensemble("K", 1, np.eye(3), seed=4, count=1)
    els = delta_inverse_elements(two_port_network(h, sites=(0, 2)), 1, 2, -1.2)
    assert np.max(np.abs(np.imag(els))) < 1e-12


def test_pseudo_hermitian_delta_inverse_relation():
    u = np.diag([1, 1, -1])
    (h,) = generate_ensemble("Q", 1, u, seed=5, count=1)
    mm, mn, nm, nn = delta_inverse_elements(two_port_network(h, sites=(0, 2)), 1, 2, -0.9)
    assert nm == pytest.approx(-np.conj(mn))


def test_spec_file_round_trip():
    spec = SymmetrySpec("K", -1, np.array([[0, 1j], [-1j, 0]]))
    back = parse_symmetry(serialize_symmetry(spec))
    assert back.kind == "K" and back.parity == -1 and np.array_equal(back.u, spec.u)
    for bad in ('{"kind": "Z", "parity": 1, "u": [[1]]}', '{"kind": "C", "parity": 2, "u": [[1]]}',
                '{"kind": "C", "parity": 1}', "not json"):
        with pytest.raises(ParseError):
            parse_symmetry(bad)


def _alpha_choices(kind, variant):
    if kind in ("C", "K"):
        return [0.0, 0.8, -2.0] if variant == IDENTITY else [0.0, math.pi]
    return [0.0, math.pi] if variant == IDENTITY else [0.0]


operator_cases = st.tuples(
    st.sampled_from("CKQP"), st.sampled_from([IDENTITY, INTERCHANGE]), st.integers(2, 6), st.integers(0, 10**6)
)


@given(operator_cases, st.integers(0, 3))
def test_make_operator_is_valid(case, ai):
    kind, variant, n_sites, seed = case
    alphas = _alpha_choices(kind, variant)
    alpha = alphas[ai % len(alphas)]
    rng = np.random.default_rng(seed)
    try:
        u = make_operator(kind, variant, n_sites, 0, n_sites - 1, rng, alpha)
    except ValueError:
        assume(False)
    check_operator(SymmetrySpec(kind, 1, u))
    c = classify_mapping(u, 0, n_sites - 1)
    assert c.variant == variant
    assert abs(np.exp(1j * c.alpha) - np.exp(1j * alpha)) < 1e-9


@given(operator_cases, st.integers(0, 3))
def test_predicted_constraints_hold_on_symmetric_ensembles(case, ai):
    kind, variant, n_sites, seed = case
    alphas = _alpha_choices(kind, variant)
    alpha = alphas[ai % len(alphas)]
    rng = np.random.default_rng(seed)
    try:
        u = make_operator(kind, variant, n_sites, 0, n_sites - 1, rng, alpha)
    except ValueError:
        assume(False)
    spec = SymmetrySpec(kind, 1, u)
    (h,) = generate_ensemble(kind, 1, u, seed=seed, count=1)
    net = two_port_network(h, sites=(0, n_sites - 1))
    rep = validate_sweep(net, 1, 2, [spec], open_k_grid(9))
    for r in rep.results:
        for name, v in r.max_violation.items():
            assert v <= 1e-8, (name, v)
