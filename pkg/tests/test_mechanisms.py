import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxlat.errors import InvalidSequence, RangeExceeded, Theta4Undefined
from maxlat.lattice import (
    SQRT3,
    build_special_two_by_one,
    build_standard_kagome,
    twisted_positions,
)
from maxlat.mechanisms import (
    LayerSequence,
    four_by_one_infinitesimal_mode,
    four_by_one_mechanism,
    infinitesimal_mode,
    layered_mechanism,
    nonlinear_energy,
    one_periodic_infinitesimal_mode,
    one_periodic_mechanism,
    two_by_one_mechanism,
    two_by_two_mechanism,
    two_periodic_infinitesimal_modes,
    two_periodic_mechanism,
    twisted_to_twisted,
    validate_layer_sequence,
)

PI3 = math.pi / 3


def family_paths():
    return {
        "one": one_periodic_mechanism(math.pi / 6),
        "two": two_periodic_mechanism(5 * math.pi / 18, 5 * math.pi / 12, math.pi / 6),
        "2x1": two_by_one_mechanism(math.pi / 4),
        "2x2": two_by_two_mechanism(5 * math.pi / 12),
        "4x1": four_by_one_mechanism(math.pi / 4),
        "layered": layered_mechanism(
            LayerSequence(("G1", "W1", "W2", "G1", "G1", "W1", "G2", "W2")), math.pi / 4
        ),
    }


def test_zero_energy_along_all_families():
    for name, path in family_paths().items():
        for t in path.sample_ts(21):
            energy, strain = path.energy(t)
            assert energy < 1e-18, name
            assert strain < 1e-9, name


def test_isotropic_deformation_gradient():
    for name, path in family_paths().items():
        for t in path.sample_ts(7):
            f, _ = path.evaluate(t)
            assert np.max(np.abs(f - f[0, 0] * np.eye(2))) < 1e-12, name
            assert np.max(np.abs(f - f.T)) == 0.0


def test_evaluate_zero_is_reference():
    for name, path in family_paths().items():
        f, pos = path.evaluate(0.0)
        assert np.max(np.abs(f - np.eye(2))) < 1e-12
        assert np.max(np.abs(pos - path.reference.vertices)) < 1e-12, name


def test_nonlinear_energy_identity_and_dilation():
    lat = build_standard_kagome(1, 1)
    total, strain = nonlinear_energy(lat, lat.vertices, np.eye(2))
    assert total == 0.0 and strain == 0.0
    total, strain = nonlinear_energy(lat, 1.01 * lat.vertices, 1.01 * np.eye(2))
    assert total == pytest.approx(6 * 0.5 * 0.01**2, rel=1e-12)
    assert strain == pytest.approx(0.01, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(lam=st.floats(0.5, 1.5))
def test_nonlinear_energy_uniform_dilation_formula(lam):
    lat = build_standard_kagome(2, 1)
    total, strain = nonlinear_energy(lat, lam * lat.vertices, lam * np.eye(2))
    assert total == pytest.approx(12 * 0.5 * (lam - 1.0) ** 2, abs=1e-12)


def test_one_periodic_matches_twisted_positions():
    path = one_periodic_mechanism(math.pi / 6)
    f, pos = path.evaluate(-PI3 / 2)
    assert np.allclose(pos, twisted_positions(PI3 - PI3 / 2), atol=1e-15)
    assert np.allclose(f, math.cos(PI3 / 2) * np.eye(2), atol=1e-15)


def test_one_periodic_appendix_fixtures():
    # positions at a generic angle
    theta = 0.9
    path = one_periodic_mechanism(theta)
    f, pos = path.evaluate(theta - PI3)
    expect = np.array(
        [
            [0.0, 0.0],
            [math.cos(theta), math.sin(theta)],
            [math.cos(theta + PI3), math.sin(theta + PI3)],
        ]
    )
    assert np.max(np.abs(pos - expect)) < 1e-12
    prim = path.deformed_lattice(theta - PI3).primitive
    c = math.cos(PI3 - theta)
    assert np.max(np.abs(prim - np.array([[2 * c, 0], [c, SQRT3 * c]]))) < 1e-12
    # neighbor copies: A' = A + v2_def, C' = C + v1_def
    a_prime = pos[0] + prim[1]
    assert np.max(np.abs(a_prime - c * np.array([1.0, SQRT3]))) < 1e-12
    c_prime = pos[2] + prim[0]
    assert c_prime[1] == pytest.approx(math.sin(theta + PI3), abs=1e-12)


def test_one_periodic_infinitesimal_mode_table():
    path = one_periodic_mechanism(math.pi / 6)
    fdot, phidot = infinitesimal_mode(path)
    assert np.max(np.abs(fdot)) < 1e-8
    table = one_periodic_infinitesimal_mode()
    assert np.max(np.abs(phidot - table)) < 1e-8
    assert np.allclose(table[1], [-SQRT3 / 2, 0.5])
    assert np.allclose(table[2], [-SQRT3 / 2, -0.5])


def test_twisted_to_twisted_gradient_rate():
    theta, eta = math.pi / 6, math.pi / 4
    path = twisted_to_twisted(theta, eta)
    f, _ = path.evaluate(eta - theta)
    expect = math.cos(PI3 - eta) / math.cos(PI3 - theta)
    assert np.allclose(f, expect * np.eye(2), atol=1e-15)
    # identity path
    same = twisted_to_twisted(theta, theta)
    f0, pos0 = same.evaluate(0.0)
    assert np.allclose(f0, np.eye(2))
    # rate of the deformation gradient: the finite difference matches the
    # measured sign convention d/dt F(0) = sin(pi/3-theta)/cos(pi/3-theta) I
    fdot, _ = infinitesimal_mode(path)
    rate = math.sin(PI3 - theta) / math.cos(PI3 - theta)
    assert np.max(np.abs(fdot - rate * np.eye(2))) < 1e-6
    for t in path.sample_ts(21):
        energy, _ = path.energy(t)
        assert energy < 1e-20


def test_two_periodic_axis_modes_match_tables():
    tables = two_periodic_infinitesimal_modes()
    ends = [
        (PI3 + 1, PI3, PI3),
        (PI3, PI3 + 1, PI3),
        (PI3, PI3, PI3 + 1),
    ]
    for table, end in zip(tables, ends):
        path = two_periodic_mechanism(*end)
        fdot, phidot = infinitesimal_mode(path)
        assert np.max(np.abs(fdot)) < 1e-8
        assert np.max(np.abs(phidot - table)) < 1e-8


def test_two_periodic_identity_and_compression():
    path = two_periodic_mechanism(PI3, PI3, PI3)
    f, pos = path.evaluate(1.0)
    assert np.allclose(f, np.eye(2))
    assert np.allclose(pos, build_standard_kagome(2, 2).vertices, atol=1e-14)


def test_two_periodic_theta4_undefined_on_path():
    with pytest.raises(Theta4Undefined):
        two_periodic_mechanism(PI3 + 1.2, PI3 + 1.2, PI3 + 1.2)


def test_two_periodic_hexagon_closure_along_path():
    from maxlat.lattice import hexagon_closure_residuals, theta4_angle

    path = two_periodic_mechanism(5 * math.pi / 18, 5 * math.pi / 12, math.pi / 6)
    dirs = np.array(path.params_angles()) if False else None
    ends = (5 * math.pi / 18, 5 * math.pi / 12, math.pi / 6)
    for t in path.sample_ts(11):
        angles = tuple(PI3 + t * (e - PI3) for e in ends)
        t4 = theta4_angle(*angles)
        thetas = (*angles, t4)
        etas = (t4, angles[2], angles[1], angles[0])
        assert np.max(np.abs(hexagon_closure_residuals(thetas, etas))) < 1e-12


def _hexagon_rings_2x2(lat):
    """Vertex rings (index, offset) of the four hexagons of the 2x2 cell,
    located in the reference geometry and ordered by angle."""
    centers = [
        np.array([1.0, 0.0]) + i * np.array([2.0, 0.0]) + j * np.array([1.0, SQRT3])
        for (i, j) in ((0, 0), (1, 0), (0, 1), (1, 1))
    ]
    rings = []
    for c in centers:
        ring = []
        for k, v in enumerate(lat.vertices):
            for (oi, oj) in itertools.product((-1, 0, 1), repeat=2):
                p = v + oi * lat.primitive[0] + oj * lat.primitive[1]
                if abs(np.linalg.norm(p - c) - 1.0) < 1e-9:
                    ring.append((math.atan2(p[1] - c[1], p[0] - c[0]), k, oi, oj))
        ring.sort()
        assert len(ring) == 6, "hexagon ring not found"
        rings.append([(k, oi, oj) for _, k, oi, oj in ring])
    return rings


def test_two_periodic_parallel_opposite_edges():
    # deformed hexagons of the two-periodic family keep opposite edges parallel
    path = two_periodic_mechanism(5 * math.pi / 18, 5 * math.pi / 12, math.pi / 6)
    rings = _hexagon_rings_2x2(path.reference)
    for t in (0.35, 0.8, 1.0):
        dl = path.deformed_lattice(t)
        for ring in rings:
            pts = [
                dl.vertices[k] + oi * dl.primitive[0] + oj * dl.primitive[1]
                for (k, oi, oj) in ring
            ]
            vecs = [q - p for p, q in zip(pts, pts[1:] + pts[:1])]
            for k in range(3):
                cross = vecs[k][0] * vecs[k + 3][1] - vecs[k][1] * vecs[k + 3][0]
                assert abs(cross) < 1e-12


def test_two_by_one_matches_builder_family():
    path = two_by_one_mechanism(math.pi / 4)
    t = math.pi / 4 - PI3
    dl = path.deformed_lattice(t)
    built = build_special_two_by_one(math.pi / 4)
    assert np.max(np.abs(dl.vertices - built.vertices)) < 1e-12
    assert np.max(np.abs(dl.primitive - built.primitive)) < 1e-12


def test_four_by_one_appendix_fixtures():
    theta = math.pi / 4
    path = four_by_one_mechanism(theta)
    t = PI3 - theta
    _, pos = path.evaluate(t)
    # cumulative table of the deformed strip
    c, s = math.cos, math.sin
    up = np.array([c(2 * PI3 - theta), s(2 * PI3 - theta)])
    bt = np.array([c(theta), s(theta)])
    expect = {}
    expect["A0"] = np.zeros(2)
    expect["B0"] = bt
    expect["C0"] = np.array([c(theta + PI3), s(theta + PI3)])
    expect["A1"] = expect["B0"] + up
    expect["B1"] = expect["A1"] + up
    expect["C1"] = expect["A1"] + np.array([-c(theta), s(theta)])
    expect["A2"] = expect["B1"] + bt
    expect["B2"] = expect["A2"] + up
    expect["C2"] = expect["A2"] + np.array([-c(theta), s(theta)])
    expect["A3"] = expect["B2"] + bt
    expect["B3"] = expect["A3"] + bt
    expect["C3"] = expect["A3"] + np.array([c(theta + PI3), s(theta + PI3)])
    order = [f"{t_}{k}" for k in range(4) for t_ in "ABC"]
    table = np.array([expect[k] for k in order])
    assert np.max(np.abs(pos - table)) < 1e-12
    # compression ratio
    f, _ = path.evaluate(t)
    assert f[0, 0] == pytest.approx(math.cos(math.pi / 12))


def test_four_by_one_infinitesimal_mode_table():
    path = four_by_one_mechanism(math.pi / 4)
    fdot, phidot = infinitesimal_mode(path)
    assert np.max(np.abs(fdot)) < 1e-8
    table = four_by_one_infinitesimal_mode()
    assert np.max(np.abs(phidot - table)) < 1e-8
    # A vertices carry no displacement; B_{0,1} = -(sqrt3/2, -1/2)
    assert np.max(np.abs(table[0::3])) == 0.0
    assert np.allclose(table[4], [-SQRT3 / 2, 0.5])


def test_layer_sequence_rules():
    ok, where = validate_layer_sequence(
        LayerSequence(("G1", "W1", "W2", "G1", "G1", "W1", "G2", "W2"))
    )
    assert ok and where is None
    # valid as the prefix of an infinite word, but its wrap pair G2 -> W1 is
    # not an allowed transition, so the 8-periodic reading is rejected
    chain = ("W1", "G2", "G2", "W2", "G1", "G1", "W1", "G2")
    ok, where = validate_layer_sequence(LayerSequence(chain, periodic=False))
    assert ok and where is None
    ok, where = validate_layer_sequence(LayerSequence(chain, periodic=True))
    assert not ok and where == 7
    ok, where = validate_layer_sequence(LayerSequence(("G1", "G2")))
    assert not ok and where == 0
    with pytest.raises(InvalidSequence):
        validate_layer_sequence(LayerSequence(()))
    with pytest.raises(InvalidSequence):
        validate_layer_sequence(LayerSequence(("G1", "X")))


def test_layered_all_g1_replicates_one_periodic():
    theta = math.pi / 5
    path = layered_mechanism(LayerSequence(("G1",) * 4), theta)
    t = PI3 - theta
    _, pos = path.evaluate(t)
    tw = twisted_positions(theta)
    c = math.cos(t)
    for k in range(4):
        shift = k * c * np.array([1.0, SQRT3])
        assert np.max(np.abs(pos[3 * k : 3 * k + 3] - (tw + shift))) < 1e-12


def test_layered_g1w1g2w2_equals_four_by_one():
    p1 = layered_mechanism(LayerSequence(("G1", "W1", "G2", "W2")), math.pi / 4)
    p2 = four_by_one_mechanism(math.pi / 4)
    for t in np.linspace(-0.4, 0.4, 9):
        f1, a = p1.evaluate(t)
        f2, b = p2.evaluate(t)
        assert np.array_equal(a, b) and np.array_equal(f1, f2)


def test_layered_w1w2_is_two_by_one_mirror():
    theta = math.pi / 4
    path = layered_mechanism(LayerSequence(("W1", "W2")), theta)
    t = PI3 - theta
    _, pos = path.evaluate(t)
    built = build_special_two_by_one(2 * PI3 - theta)
    assert np.max(np.abs(pos - built.vertices)) < 1e-12


def test_layered_non_periodic_strip():
    seq = LayerSequence(("G1", "W1", "G2"), periodic=False)
    ok, _ = validate_layer_sequence(seq)
    assert ok
    path = layered_mechanism(seq, math.pi / 4)
    for t in path.sample_ts(9):
        energy, strain = path.energy(t)
        assert energy < 1e-18 and strain < 1e-9
    # the wrap pair G2 -> G1 makes the periodic reading invalid
    assert not validate_layer_sequence(
        LayerSequence(("G1", "W1", "G2"), periodic=True)
    )[0]


def test_layered_rejects_invalid():
    with pytest.raises(InvalidSequence):
        layered_mechanism(LayerSequence(("G1", "G2")), math.pi / 4)


def test_range_exceeded():
    path = one_periodic_mechanism(math.pi / 6)
    with pytest.raises(RangeExceeded):
        path.evaluate(2.0)
    with pytest.raises(RangeExceeded):
        one_periodic_mechanism(3.0)
    with pytest.raises(RangeExceeded):
        four_by_one_mechanism(-0.1)
