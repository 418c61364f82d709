"""Jones-vector bookkeeping for the emitted Raman photons.

The collection path holds a polarization analyzer. Projecting the emitted
photon on the analyzer axis conditions the NV pair on a 2x2 transform of the
qubit ground states; projecting on the orthogonal axis gives the complementary
(blocked) transform. Gate schemes differ only in the drive polarization and
the analyzer setting.
"""

from __future__ import annotations

import math

import numpy as np

from .scattering import AmplitudeSet, ScatterTable

JONES_X = np.array([1.0, 0.0], dtype=complex)
JONES_Y = np.array([0.0, 1.0], dtype=complex)
JONES_DIAG = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
JONES_ANTIDIAG = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)

NAMED_AXES = {
    "x": JONES_X,
    "y": JONES_Y,
    "diag": JONES_DIAG,
    "antidiag": JONES_ANTIDIAG,
}


def normalize(jones) -> np.ndarray:
    v = np.asarray(jones, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero Jones vector")
    return v / n


def orthogonal(jones) -> np.ndarray:
    """The Jones vector orthogonal to the given one (conjugate inner product)."""
    v = normalize(jones)
    return np.array([-np.conj(v[1]), np.conj(v[0])])


def project(analyzer, jones) -> complex:
    """Amplitude of a photon with Jones vector ``jones`` past the analyzer."""
    a = normalize(analyzer)
    return complex(np.vdot(a, np.asarray(jones, dtype=complex)))


def scattered_states(amps: AmplitudeSet, drive=None) -> ScatterTable:
    """Rebuild the emitted-photon table from axis amplitudes and a drive.

    Linearity in the drive field: an arbitrary drive Jones vector produces
    the weighted superposition of the x-drive and y-drive emissions. The
    x-drive component emits preserving photons and the g2 leak along x,
    flipping photons and the g3 leak along y; the y-drive component swaps
    the roles.
    """
    lam = normalize(JONES_X if drive is None else drive)
    jones = np.zeros((3, 3, 2), dtype=complex)
    x, y = lam[0], lam[1]
    jones[1, 1] = (x * amps.ap2_x, y * amps.ap2_y)
    jones[2, 2] = (x * amps.ap3_x, y * amps.ap3_y)
    jones[2, 1] = (y * amps.af2_y, x * amps.af2_x)
    jones[1, 2] = (y * amps.af3_y, x * amps.af3_x)
    jones[0, 1] = (x * amps.al2_x, y * amps.al2_y)
    jones[0, 2] = (y * amps.al3_y, x * amps.al3_x)
    return ScatterTable(nu_d_ghz=amps.nu_d_ghz, drive=lam, jones=jones)


def conditional_transform(table: ScatterTable, analyzer) -> np.ndarray:
    """Qubit-space transform conditioned on the photon passing the analyzer.

    Returns the 2x2 matrix T with T[i', i] the amplitude for the NV to go
    from ground state i to i' (0 = g2, 1 = g3) while the emitted photon
    projects onto the analyzer axis.
    """
    a = normalize(analyzer)
    t = np.zeros((2, 2), dtype=complex)
    for i in (0, 1):
        for f in (0, 1):
            t[f, i] = np.vdot(a, table.jones[f + 1, i + 1])
    return t


def leakage_transform(table: ScatterTable, analyzer) -> np.ndarray:
    """Amplitudes into g1 past the analyzer, one entry per initial state."""
    a = normalize(analyzer)
    return np.array([np.vdot(a, table.jones[0, 1]), np.vdot(a, table.jones[0, 2])])


def emission_rates(table: ScatterTable, include_leakage: bool = False) -> np.ndarray:
    """Total squared emission amplitude out of g2 and g3 (units A0^2)."""
    rows = (0, 1, 2) if include_leakage else (1, 2)
    out = np.zeros(2)
    for k, i in enumerate((1, 2)):
        out[k] = sum(float(np.vdot(table.jones[f, i], table.jones[f, i]).real)
                     for f in rows)
    return out


def pass_probabilities(table: ScatterTable, analyzer,
                       include_leakage: bool = False) -> np.ndarray:
    """Probability that the next emitted photon passes the analyzer.

    One entry per initial qubit state (g2, g3): the heralding success
    probability of a single scattering event for an NV starting there.
    """
    a = normalize(analyzer)
    total = emission_rates(table, include_leakage)
    passed = np.zeros(2)
    for k, i in enumerate((1, 2)):
        rows = (0, 1, 2) if include_leakage else (1, 2)
        passed[k] = sum(abs(np.vdot(a, table.jones[f, i])) ** 2 for f in rows)
    return passed / total


def polarization_angle_deg(jones, reference) -> float:
    """Signed angle (degrees) of a linearly polarized Jones vector.

    Measured from the reference axis, in (-90, 90]. Raises ValueError when
    the polarization is not linear (relative phase away from 0 or pi), since
    a single tilt angle does not describe it.
    """
    v = normalize(jones)
    # strip the global phase using the largest component
    k = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k]))
    if np.max(np.abs(v.imag)) > 1e-8:
        raise ValueError("polarization is not linear")
    r = normalize(reference)
    k = int(np.argmax(np.abs(r)))
    r = r * np.exp(-1j * np.angle(r[k]))
    if np.max(np.abs(r.imag)) > 1e-8:
        raise ValueError("reference axis is not linear")
    vr = v.real
    rr = r.real
    perp = np.array([-rr[1], rr[0]])
    ang = math.degrees(math.atan2(float(vr @ perp), float(vr @ rr)))
    if ang <= -90.0:
        ang += 180.0
    elif ang > 90.0:
        ang -= 180.0
    return ang
