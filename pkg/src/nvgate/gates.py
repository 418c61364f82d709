"""Two-NV gate matrices heralded by a single photon detection.

A photon emitted collectively by the pair and caught behind the analyzer
applies i*(T x I) + (I x T) to the two qubits, where T is the single-NV
conditional transform and the relative i comes from the quarter-wave path
difference between the emitters for the detected propagation direction
(the opposite detector swaps which NV picks up the phase).

Scheme dictionary:

    M1: x drive, y analyzer, at the magic point (flips only, unbalanced)
    M2: diagonal drive, antidiagonal analyzer, magic point
    M3: diagonal drive, diagonal analyzer, magic point (exactly balanced)
    B1: x drive, y analyzer, at the balance point

Qubit basis order: |g2 g2>, |g2 g3>, |g3 g2>, |g3 g3>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import polarization as pol
from .levels import DipoleModel, LevelScheme
from .scattering import AmplitudeSet, scatter_table

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
IDENT2 = np.eye(2, dtype=complex)

SCHEMES = ("M1", "M2", "M3", "B1")

# (drive axis, analyzer axis) per scheme
SCHEME_OPTICS = {
    "M1": ("x", "y"),
    "M2": ("diag", "antidiag"),
    "M3": ("diag", "diag"),
    "B1": ("x", "y"),
}


def ideal_gates(chi: float = np.pi / 2) -> tuple[np.ndarray, np.ndarray]:
    """The two heralded target gates for detection on the right and left.

    G_r(chi) = (e^{i chi} X x I + I x X)/sqrt(2); unitary only for
    chi = +-pi/2. The pair is related by G_r = (X x X) G_l at chi = pi/2.
    """
    g_r = (np.exp(1j * chi) * np.kron(PAULI_X, IDENT2)
           + np.kron(IDENT2, PAULI_X)) / np.sqrt(2.0)
    g_l = (np.kron(PAULI_X, IDENT2)
           + np.exp(1j * chi) * np.kron(IDENT2, PAULI_X)) / np.sqrt(2.0)
    return g_r, g_l


def collective_op(t_single: np.ndarray, detector: str = "right") -> np.ndarray:
    """Two-NV jump operator for one collectively emitted, analyzed photon."""
    t = np.asarray(t_single, dtype=complex)
    if detector == "right":
        return 1j * np.kron(t, np.eye(t.shape[0])) + np.kron(np.eye(t.shape[0]), t)
    if detector == "left":
        return np.kron(t, np.eye(t.shape[0])) + 1j * np.kron(np.eye(t.shape[0]), t)
    raise ValueError(f"detector must be 'right' or 'left', got {detector!r}")


@dataclass(frozen=True)
class GateMatrix:
    """A heralded gate: unnormalized matrix plus its success normalization."""

    matrix: np.ndarray
    scheme: str
    detector: str

    @property
    def normalized(self) -> np.ndarray:
        """Matrix scaled so the average success-conditioned map is trace-1."""
        m = self.matrix
        scale = np.sqrt(np.trace(m.conj().T @ m).real / 4.0)
        return m / scale

    def unitarity_defect(self) -> float:
        """Deviation of the normalized gate from unitarity (operator norm)."""
        g = self.normalized
        return float(np.linalg.norm(g.conj().T @ g - np.eye(4), ord=2))


def scheme_transforms(scheme: str, amps: AmplitudeSet) -> tuple[np.ndarray, np.ndarray]:
    """(analyzer-passed, analyzer-blocked) single-NV transforms for a scheme."""
    if scheme not in SCHEME_OPTICS:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    drive_name, analyzer_name = SCHEME_OPTICS[scheme]
    drive = pol.NAMED_AXES[drive_name]
    analyzer = pol.NAMED_AXES[analyzer_name]
    table = pol.scattered_states(amps, drive)
    t_pass = pol.conditional_transform(table, analyzer)
    t_block = pol.conditional_transform(table, pol.orthogonal(analyzer))
    return t_pass, t_block


def scheme_gate(scheme: str, amps: AmplitudeSet, detector: str = "right") -> GateMatrix:
    """The gate applied when the scheme's detector clicks once."""
    t_pass, _ = scheme_transforms(scheme, amps)
    return GateMatrix(matrix=collective_op(t_pass, detector),
                      scheme=scheme, detector=detector)


def perturbed_scheme_gate(
    scheme: str,
    level_scheme: LevelScheme,
    dipole: DipoleModel,
    nu_d_ghz: float,
    detector: str = "right",
    a0_yx_ratio: float = 1.0,
) -> GateMatrix:
    """Scheme gate from the full Jones table of a (possibly strained) scheme.

    Projects the emitted photons directly against the scheme analyzer, so
    it stays valid when the emissions are not axis-pure and the scalar
    amplitude reduction would fail. Equals scheme_gate for unperturbed
    inputs.
    """
    if scheme not in SCHEME_OPTICS:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    drive_name, analyzer_name = SCHEME_OPTICS[scheme]
    table = scatter_table(level_scheme, dipole, nu_d_ghz,
                          pol.NAMED_AXES[drive_name], a0_yx_ratio)
    t_pass = pol.conditional_transform(table, pol.NAMED_AXES[analyzer_name])
    return GateMatrix(matrix=collective_op(t_pass, detector),
                      scheme=scheme, detector=detector)


def scheme_target(scheme: str, detector: str = "right") -> np.ndarray:
    """Ideal unitary the scheme aims for (its zero-imperfection limit).

    M1 and M2 reduce to the balanced antisymmetric pattern (T proportional to
    [[0, 1], [-1, 0]]); M3 and B1 reduce to the symmetric flip pattern
    (T proportional to X), which is the canonical heralded gate.
    """
    if scheme in ("M1", "M2"):
        t = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    elif scheme in ("M3", "B1"):
        t = PAULI_X
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return collective_op(t, detector) / np.sqrt(2.0)


def entanglement_fidelity(ideal: np.ndarray, actual: np.ndarray) -> float:
    """Entanglement fidelity of a success-conditioned single-Kraus map.

    F_e = |Tr(U^dag M)|^2 / (d * Tr(M^dag M)) with d = 4; equals 1 exactly
    when M is proportional to the ideal unitary U.
    """
    u = np.asarray(ideal, dtype=complex)
    m = np.asarray(actual, dtype=complex)
    num = abs(np.trace(u.conj().T @ m)) ** 2
    den = 4.0 * np.trace(m.conj().T @ m).real
    return float(num / den)


def unbalanced_two_nv_gate(a) -> np.ndarray:
    """Heralded-gate matrix when the two NVs have unequal flip amplitudes.

    ``a`` holds four real amplitudes (af2_nv1, af3_nv1, af2_nv2, af3_nv2);
    the result is i*(T1 x I) + (I x T2) with T_k the single-NV flip
    transform of emitter k.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (4,):
        raise ValueError("expected four amplitudes")
    t1 = np.array([[0.0, a[1]], [a[0], 0.0]], dtype=complex)
    t2 = np.array([[0.0, a[3]], [a[2], 0.0]], dtype=complex)
    return 1j * np.kron(t1, IDENT2) + np.kron(IDENT2, t2)


def pass_fraction(scheme: str, amps: AmplitudeSet) -> np.ndarray:
    """Per-initial-state probability that an emitted photon heralds the gate.

    The fraction of single-photon emissions that pass the scheme's analyzer,
    for an NV starting in g2 and in g3 (leakage photons excluded; they are
    spectrally filtered).
    """
    drive_name, analyzer_name = SCHEME_OPTICS[scheme]
    table = pol.scattered_states(amps, pol.NAMED_AXES[drive_name])
    return pol.pass_probabilities(table, pol.NAMED_AXES[analyzer_name])
