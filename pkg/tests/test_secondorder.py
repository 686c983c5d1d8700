import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxlat.errors import ConsistencyFailed, NotAGHMode, NotAStandardKagome
from maxlat.lattice import build_standard_kagome, build_twisted_kagome
from maxlat.mechanisms import (
    one_periodic_infinitesimal_mode,
    two_periodic_infinitesimal_modes,
)
from maxlat.rigidity import gh_modes
from maxlat.secondorder import (
    consistency_condition_kagome,
    necessary_condition_test,
    quadratic_extension,
    solve_xi2_from_line_sums,
    strain_quadratic_term,
    tangent_cone_matrix,
    two_periodic_tangent_cone_test,
)

LAT22 = build_standard_kagome(2, 2)
PHI11 = one_periodic_infinitesimal_mode(2, 2)
AXES = two_periodic_infinitesimal_modes()


def test_one_periodic_mode_passes():
    v = necessary_condition_test(LAT22, PHI11)
    assert v.passes
    xi = v.xi2.matrix()
    assert np.max(np.abs(xi - (-0.5) * np.eye(2))) < 1e-12
    assert v.phi2 is not None


def test_axis_modes_pass():
    for mode in AXES:
        v = necessary_condition_test(LAT22, mode)
        assert v.passes


def test_mixture_fails():
    v = necessary_condition_test(LAT22, PHI11 + AXES[0])
    assert not v.passes
    assert v.residual > 1e-2


def test_not_a_gh_mode_rejected():
    bad = np.zeros((12, 2))
    bad[0] = [1.0, 0.0]
    with pytest.raises(NotAGHMode):
        necessary_condition_test(LAT22, bad)


def test_per_edge_identity_on_pass():
    from maxlat.rigidity import assemble_compatibility

    v = necessary_condition_test(LAT22, PHI11)
    c = assemble_compatibility(LAT22).matrix
    lc = LAT22.rest_lengths()[:, None] * c
    res = (
        quadratic_extension(LAT22, PHI11)
        + strain_quadratic_term(LAT22, v.xi2)
        + 2.0 * (lc @ v.phi2.reshape(-1))
    )
    assert np.max(np.abs(res)) < 10 * v.tol


def test_consistency_line_sums_one_periodic():
    ok, sums = consistency_condition_kagome(LAT22, PHI11)
    assert ok
    for key in ("0", "60", "120"):
        assert len(sums[key]) == 2
        assert sums[key][0] == pytest.approx(4.0)
        assert sums[key][1] == pytest.approx(4.0)


def test_consistency_rejects_non_kagome():
    with pytest.raises(NotAStandardKagome):
        consistency_condition_kagome(
            build_twisted_kagome(0.8), np.zeros((3, 2))
        )


def test_fh_sine_mode_fails_lines():
    # the sine mode at s=1, N=3 has line sums proportional to sin^2(2 k pi / 3)
    from maxlat.bloch import fh_modes

    u1, u2 = fh_modes(1, 3)
    ok, sums = consistency_condition_kagome(u2.cell, u2.field_values)
    assert not ok
    horiz = np.array(sums["0"])
    weights = np.array([math.sin(2 * k * math.pi / 3) ** 2 for k in range(3)])
    assert np.allclose(horiz / horiz.max(), weights / weights.max(), atol=1e-12)


def test_special_half_mode_passes():
    from maxlat.bloch import fh_modes

    u1, _ = fh_modes(2, 4)  # s = N/2
    ok, _ = consistency_condition_kagome(u1.cell, u1.field_values)
    assert ok


def test_solve_xi2_from_line_sums_matches_general():
    xi_lines = solve_xi2_from_line_sums(PHI11, LAT22)
    xi_general = necessary_condition_test(LAT22, PHI11).xi2
    assert np.max(np.abs(xi_lines.matrix() - xi_general.matrix())) < 1e-9
    assert np.max(np.abs(xi_lines.matrix() + 0.5 * np.eye(2))) < 1e-12


def test_solve_xi2_zero_mode():
    xi = solve_xi2_from_line_sums(np.zeros((12, 2)), LAT22)
    assert xi.matrix() == pytest.approx(np.zeros((2, 2)))


def test_solve_xi2_requires_consistency():
    with pytest.raises(ConsistencyFailed):
        solve_xi2_from_line_sums(PHI11 + AXES[0], LAT22)


def test_tangent_cone_matrix_exact():
    m = tangent_cone_matrix()
    target = np.array([[4.0, 4.0, 0.0], [4.0, 0.0, 4.0], [0.0, -4.0, -4.0]])
    assert np.max(np.abs(m - target)) < 1e-12
    assert np.linalg.matrix_rank(m) == 3


def test_tangent_cone_verdicts():
    ok, _ = two_periodic_tangent_cone_test(0.0, 0.0, 0.0)
    assert ok
    ok, _ = two_periodic_tangent_cone_test(1.0, 0.0, 0.0)
    assert not ok


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.1, 10), tx=st.floats(-2, 2), ty=st.floats(-2, 2))
def test_scaling_and_translation_invariance(lam, tx, ty):
    v0 = necessary_condition_test(LAT22, PHI11 + AXES[1])
    shifted = lam * (PHI11 + AXES[1]) + np.array([tx, ty])
    v1 = necessary_condition_test(LAT22, shifted)
    assert v0.passes == v1.passes
    ok0, _ = consistency_condition_kagome(LAT22, PHI11 + AXES[1])
    ok1, _ = consistency_condition_kagome(LAT22, shifted)
    assert ok0 == ok1


@settings(max_examples=10, deadline=None)
@given(lam=st.floats(0.2, 5))
def test_xi2_quadratic_homogeneity(lam):
    v0 = necessary_condition_test(LAT22, PHI11)
    v1 = necessary_condition_test(LAT22, lam * PHI11)
    assert np.max(np.abs(v1.xi2.matrix() - lam * lam * v0.xi2.matrix())) < 1e-9


def test_equivalence_on_random_gh_samples():
    rng = np.random.default_rng(11)
    for n in (2, 3):
        lat = build_standard_kagome(n, n)
        basis = gh_modes(lat).stacked()
        for _ in range(25):
            coeffs = rng.normal(size=len(basis))
            phi = (coeffs @ basis).reshape(-1, 2)
            general = necessary_condition_test(lat, phi).passes
            lines, _ = consistency_condition_kagome(lat, phi)
            assert general == lines


def test_mechanism_modes_pass_on_their_cells():
    # forward direction: every mechanism-derived infinitesimal mode extends
    from maxlat.mechanisms import (
        four_by_one_infinitesimal_mode,
        two_by_one_infinitesimal_mode,
    )

    cases = [
        (build_standard_kagome(1, 1), one_periodic_infinitesimal_mode()),
        (build_standard_kagome(1, 2), two_by_one_infinitesimal_mode()),
        (build_standard_kagome(1, 4), four_by_one_infinitesimal_mode()),
        (LAT22, AXES[0]),
        (LAT22, AXES[1] - 2.0 * AXES[2]),
    ]
    for lat, mode in cases:
        assert necessary_condition_test(lat, mode).passes
