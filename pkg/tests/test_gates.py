import numpy as np
import pytest

from nvgate.gates import (
    SCHEMES,
    collective_op,
    entanglement_fidelity,
    ideal_gates,
    pass_fraction,
    perturbed_scheme_gate,
    scheme_gate,
    scheme_target,
    unbalanced_two_nv_gate,
)
from nvgate.levels import apply_strain
from nvgate.scattering import amplitudes

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
XX = np.kron(PAULI_X, PAULI_X)


def test_ideal_gates_unitary_at_quarter_turn():
    g_r, g_l = ideal_gates()
    for g in (g_r, g_l):
        np.testing.assert_allclose(g.conj().T @ g, np.eye(4), atol=1e-12)


def test_ideal_gates_detector_relation():
    g_r, g_l = ideal_gates()
    np.testing.assert_allclose(g_r, XX @ g_l, atol=1e-12)


def test_ideal_gates_not_unitary_off_quarter_turn():
    g_r, _ = ideal_gates(chi=0.0)
    defect = np.linalg.norm(g_r.conj().T @ g_r - np.eye(4), ord=2)
    assert defect > 0.5


def test_collective_op_detectors():
    t = np.array([[0.0, 2.0], [3.0, 0.0]], dtype=complex)
    right = collective_op(t, "right")
    left = collective_op(t, "left")
    ident = np.eye(2)
    np.testing.assert_allclose(right, 1j * np.kron(t, ident) + np.kron(ident, t))
    np.testing.assert_allclose(left, np.kron(t, ident) + 1j * np.kron(ident, t))
    with pytest.raises(ValueError):
        collective_op(t, "up")


def test_scheme_targets_unitary():
    for scheme in SCHEMES:
        for det in ("right", "left"):
            u = scheme_target(scheme, det)
            np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_scheme_gate_fidelities_at_working_points(scheme, dipole, nu_magic,
                                                  nu_balance, amps_magic,
                                                  amps_balance):
    f_m1 = entanglement_fidelity(scheme_target("M1"),
                                 scheme_gate("M1", amps_magic).matrix)
    f_m2 = entanglement_fidelity(scheme_target("M2"),
                                 scheme_gate("M2", amps_magic).matrix)
    f_m3 = entanglement_fidelity(scheme_target("M3"),
                                 scheme_gate("M3", amps_magic).matrix)
    f_b1 = entanglement_fidelity(scheme_target("B1"),
                                 scheme_gate("B1", amps_balance).matrix)
    assert f_m1 == pytest.approx(0.9805524, abs=2e-6)
    assert f_m2 == pytest.approx(f_m1, abs=1e-9)
    assert f_m3 == pytest.approx(1.0, abs=1e-9)
    assert f_b1 == pytest.approx(1.0, abs=1e-9)


def test_m1_fidelity_closed_form(amps_magic):
    """F_e of the flip-herald gate depends only on the amplitude imbalance."""
    a1, a2 = abs(amps_magic.af2_x), abs(amps_magic.af3_x)
    closed = (a1 + a2) ** 2 / (4.0 * (a1**2 + a2**2)) * 2.0
    f = entanglement_fidelity(scheme_target("M1"),
                              scheme_gate("M1", amps_magic).matrix)
    assert f == pytest.approx(closed, abs=1e-10)


def test_unitarity_defects(scheme, dipole, amps_magic, amps_balance):
    # at the calibrated zero the preserving pair cancels exactly and M3
    # becomes a unitary; the finder root carries its ~1e-6 tolerance
    amps_exact = amplitudes(scheme, dipole, 0.0)
    assert scheme_gate("M3", amps_exact).unitarity_defect() < 1e-12
    assert scheme_gate("M3", amps_magic).unitarity_defect() < 1e-5
    assert scheme_gate("B1", amps_balance).unitarity_defect() < 1e-6
    assert scheme_gate("M1", amps_magic).unitarity_defect() > 0.1


def test_gate_normalization(amps_magic):
    g = scheme_gate("M1", amps_magic).normalized
    assert np.trace(g.conj().T @ g).real == pytest.approx(4.0, rel=1e-12)


def test_pass_fractions(amps_magic):
    p_m2 = pass_fraction("M2", amps_magic)
    p_m3 = pass_fraction("M3", amps_magic)
    np.testing.assert_allclose(p_m2 + p_m3, [1.0, 1.0], atol=1e-12)
    assert p_m2.mean() == pytest.approx(0.9809234, abs=2e-6)
    assert p_m3.mean() == pytest.approx(0.0190766, abs=2e-6)


def test_scheme_gate_rejects_unknown(amps_magic):
    with pytest.raises(ValueError):
        scheme_gate("M4", amps_magic)
    with pytest.raises(ValueError):
        scheme_target("M4")


def test_unbalanced_gate_matches_balanced_limit(amps_magic):
    a = amps_magic
    g = unbalanced_two_nv_gate([a.af2_x, a.af3_x, a.af2_x, a.af3_x])
    np.testing.assert_allclose(g, scheme_gate("M1", a).matrix, atol=1e-12)


def test_unbalanced_fidelity_expansion():
    """Identical-NV imbalance: F = 1 - (delta/2A)^2 + O((delta/A)^4).

    The flip amplitudes need the antisymmetric sign pattern (negative out
    of g2) to land on the M1 target in the balanced limit.
    """
    target = scheme_target("M1")
    a_bar = 0.2
    for rel in (0.02, 0.05, 0.1, 0.2):
        delta = rel * a_bar
        g = unbalanced_two_nv_gate(
            [-(a_bar + delta / 2), a_bar - delta / 2,
             -(a_bar + delta / 2), a_bar - delta / 2])
        f = entanglement_fidelity(target, g)
        leading = 1.0 - (delta / (2.0 * a_bar)) ** 2
        assert abs(f - leading) <= 0.13 * rel**4


def test_perturbed_gate_matches_scalar_path(scheme, dipole, nu_magic,
                                            amps_magic):
    for name in ("M1", "M2", "M3"):
        direct = scheme_gate(name, amps_magic).matrix
        full = perturbed_scheme_gate(name, scheme, dipole, nu_magic).matrix
        np.testing.assert_allclose(full, direct, atol=1e-12)


def test_perturbed_gate_degrades_under_y_strain(scheme, dipole, nu_magic):
    strained = apply_strain(scheme, "y", 1.0)
    f = entanglement_fidelity(
        scheme_target("M1"),
        perturbed_scheme_gate("M1", strained, dipole, nu_magic).matrix)
    assert f < 0.95
    # the scalar amplitude reduction refuses axis-impure emissions
    with pytest.raises(ValueError, match="axis-pure"):
        amplitudes(strained, dipole, nu_magic)


def test_entanglement_fidelity_range(amps_magic):
    target = scheme_target("M1")
    assert entanglement_fidelity(target, target) == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    for _ in range(10):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        f = entanglement_fidelity(target, m)
        assert 0.0 <= f <= 1.0 + 1e-12
