import numpy as np
import pytest
from hypothesis import given, strategies as st

from nvgate.levels import (
    DipoleModel,
    LevelScheme,
    apply_shift,
    apply_strain,
    mixing_matrix,
    orthogonality_defect,
    ss_dipoles,
    strain_hamiltonian,
)


def test_dipole_model_defaults():
    d = DipoleModel()
    assert d.f11 == 0.0513
    assert d.f12 == pytest.approx(np.sqrt(1 - 0.0513**2), rel=1e-14)
    assert d.f21 == pytest.approx(d.f12 / np.sqrt(2), rel=1e-14)
    assert d.f23 == pytest.approx(1 / np.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    {"f11": 0.0}, {"f11": 1.0}, {"f11": -0.1},
    {"p0_debye": 0.0}, {"o_x": 0.0}, {"o_x": -1.0},
])
def test_dipole_model_validation(kwargs):
    with pytest.raises(ValueError):
        DipoleModel(**kwargs)


@given(st.floats(min_value=1e-6, max_value=0.999))
def test_mixing_matrix_orthogonal(f11):
    u = mixing_matrix(f11)
    np.testing.assert_allclose(u @ u.T, np.eye(6), atol=1e-12)


def test_mixing_matrix_structure():
    u = mixing_matrix(0.0513)
    c = np.sqrt(1 - 0.0513**2)
    # the lower orbital pair is untouched by the spin-spin mixing
    np.testing.assert_allclose(u[4:, :], np.eye(6)[4:, :], atol=0)
    assert u[0, 0] == pytest.approx(c)
    assert u[0, 2] == pytest.approx(-0.0513)
    assert u[2, 0] == pytest.approx(0.0513)


def test_scheme_fixture_energies(scheme, cfg):
    expected = [cfg[f"level.e{i}_ghz"] for i in range(1, 7)]
    np.testing.assert_allclose(scheme.excited_ghz, expected, rtol=0)
    assert scheme.g1_ghz == -2.87


def test_scheme_rejects_non_orthogonal_mixing():
    bad = np.eye(6)
    bad[0, 1] = 0.5
    with pytest.raises(ValueError, match="orthogonal"):
        LevelScheme(excited_ghz=np.arange(6.0), mixing=bad)


def test_ss_dipoles_g1_dark_columns(scheme, dipole):
    """g1 couples only to the two states carrying S_z = 0 character."""
    p = ss_dipoles(scheme, dipole)
    assert p.shape == (3, 6, 2)
    norms = np.linalg.norm(p[0], axis=1)
    bright = norms > 1e-12
    assert bright.sum() == 4  # mixing spreads g1 over the four upper states
    # the unmixed lower pair stays perfectly dark from g1
    np.testing.assert_allclose(norms[4:], 0.0, atol=0)


def test_ss_dipoles_o_x_scales_x_only(scheme, dipole):
    from dataclasses import replace

    p1 = ss_dipoles(scheme, dipole)
    p2 = ss_dipoles(scheme, replace(dipole, o_x=1.3))
    np.testing.assert_allclose(p2[:, :, 0], 1.3 * p1[:, :, 0], rtol=1e-14)
    np.testing.assert_allclose(p2[:, :, 1], p1[:, :, 1], rtol=0)


def test_hamiltonian_so_spectrum(scheme):
    h = scheme.hamiltonian_so()
    np.testing.assert_allclose(h, h.T, atol=1e-14)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)),
                               np.sort(scheme.excited_ghz), atol=1e-10)


@pytest.mark.parametrize("axis", ["x", "y"])
def test_strain_hamiltonian_symmetric(axis):
    h = strain_hamiltonian(axis, 0.7)
    np.testing.assert_allclose(h, h.T, atol=0)
    np.testing.assert_allclose(strain_hamiltonian(axis, -0.7), -h, atol=0)


def test_strain_hamiltonian_rejects_axis():
    with pytest.raises(ValueError):
        strain_hamiltonian("z", 1.0)


def test_apply_shift(scheme):
    shifted = apply_shift(scheme, 3, 0.25)
    assert shifted.excited_ghz[2] == scheme.excited_ghz[2] + 0.25
    mask = np.arange(6) != 2
    np.testing.assert_allclose(shifted.excited_ghz[mask],
                               scheme.excited_ghz[mask], rtol=0)
    np.testing.assert_allclose(shifted.mixing, scheme.mixing, rtol=0)
    with pytest.raises(ValueError):
        apply_shift(scheme, 0, 0.1)
    with pytest.raises(ValueError):
        apply_shift(scheme, 7, 0.1)


def test_apply_strain_zero_is_identity(scheme):
    assert apply_strain(scheme, "x", 0.0) is scheme


@pytest.mark.parametrize("axis", ["x", "y"])
def test_apply_strain_energies_match_full_diagonalization(scheme, axis):
    strained = apply_strain(scheme, axis, 0.4)
    h = scheme.hamiltonian_so() + strain_hamiltonian(axis, 0.4)
    np.testing.assert_allclose(np.sort(strained.excited_ghz),
                               np.sort(np.linalg.eigvalsh(h)), atol=1e-10)


def test_apply_strain_x_keeps_labels(scheme):
    """x strain splits the degenerate pairs without rotating them.

    (y strain hybridizes each degenerate pair at zeroth order through its
    direct within-pair coupling, so label continuity only holds for x.)
    """
    strained = apply_strain(scheme, "x", 0.4)
    overlap = scheme.mixing @ strained.mixing.T
    assert np.min(np.abs(np.diag(overlap))) > 0.95


def test_apply_strain_first_order_shifts(scheme):
    """For small strain the energies move by the diagonal matrix elements."""
    eps = 1e-4
    strained = apply_strain(scheme, "x", eps)
    h1 = scheme.mixing @ strain_hamiltonian("x", eps) @ scheme.mixing.T
    np.testing.assert_allclose(strained.excited_ghz - scheme.excited_ghz,
                               np.diag(h1), atol=5e-7)


def test_orthogonality_defect_zero_unperturbed(scheme, dipole):
    assert orthogonality_defect(ss_dipoles(scheme, dipole)) < 1e-12
