"""Electronic structure of a single NV center near the optical transition.

Conventions used throughout the package:

* The qubit lives in the two degenerate ground spin states ``g2`` and ``g3``
  (symmetric/antisymmetric combinations of S_z = +1 and -1). Their energy
  defines zero; the S_z = 0 ground state ``g1`` sits 2.87 GHz below.
* Six excited states ``e1..e6``. Two bases matter: the spin-orbit (SO) basis,
  where the dipole matrix has a simple closed form, and the eigenbasis of the
  spin-orbit plus spin-spin Hamiltonian (the working basis, here "SS basis"),
  which is what the energy table in the default configuration refers to.
  Unperturbed, ``e1/e2`` and ``e3/e4`` are degenerate pairs.
* ``LevelScheme.mixing`` holds the SS eigenstates as rows expressed in the SO
  basis, so the excited-state Hamiltonian in the SO basis is
  ``mixing.T @ diag(excited_ghz) @ mixing`` and the ground-to-excited dipole
  rows transform as ``p_ss = p_so @ mixing.T``.
* Dipole vectors are transverse; every matrix element is a Jones vector with
  (x, y) components in units of the reduced dipole moment p0.

Energies are in GHz relative to an optical reference frequency chosen by the
calibrated configuration (the nominal magic drive frequency sits at 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

N_EXCITED = 6


@dataclass(frozen=True)
class DipoleModel:
    """Ground-to-excited dipole parameters.

    f11 fixes the spin-spin mixing angle (arcsin(f11) ~ 2.9 degrees); the
    remaining coefficients are derived from it. ``o_x`` scales every x
    component of the dipole matrix and models a mismatch between the two
    transverse reduced dipole moments (1.0 means none).
    """

    f11: float = 0.0513
    p0_debye: float = 5.2
    o_x: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.f11 < 1.0:
            raise ValueError(f"f11 must be in (0, 1), got {self.f11}")
        if self.p0_debye <= 0:
            raise ValueError("p0_debye must be positive")
        if self.o_x <= 0:
            raise ValueError("o_x must be positive")

    @property
    def f12(self) -> float:
        return math.sqrt(1.0 - self.f11**2)

    @property
    def f21(self) -> float:
        return self.f12 / math.sqrt(2.0)

    @property
    def f22(self) -> float:
        return self.f11 / math.sqrt(2.0)

    @property
    def f23(self) -> float:
        return 1.0 / math.sqrt(2.0)

    def so_matrix(self) -> np.ndarray:
        """Dipole rows in the SO basis, shape (3, 6, 2), units of p0.

        Rows are the ground states (g1, g2, g3); the last axis is the (x, y)
        Jones component of each matrix element.
        """
        s = 1.0 / math.sqrt(2.0)
        p = np.zeros((3, N_EXCITED, 2))
        # g1 couples only to the S_z = 0 orbital pair
        p[0, 2] = (1.0, 0.0)
        p[0, 3] = (0.0, 1.0)
        # g2 row
        p[1, 0] = (-s, 0.0)
        p[1, 1] = (0.0, s)
        p[1, 4] = (0.0, -s)
        p[1, 5] = (s, 0.0)
        # g3 row
        p[2, 0] = (0.0, s)
        p[2, 1] = (s, 0.0)
        p[2, 4] = (s, 0.0)
        p[2, 5] = (0.0, s)
        return p


def mixing_matrix(f11: float) -> np.ndarray:
    """SS eigenstates (rows) in the SO basis for mixing parameter f11.

    The spin-spin interaction mixes the S_z ~ +-1 pair (SO states 1, 2) with
    the S_z = 0 pair (SO states 3, 4); states 5 and 6 are untouched.
    """
    c = math.sqrt(1.0 - f11**2)
    s = f11
    u = np.eye(N_EXCITED)
    u[0, 0] = c
    u[0, 2] = -s
    u[1, 1] = c
    u[1, 3] = -s
    u[2, 0] = s
    u[2, 2] = c
    u[3, 1] = s
    u[3, 3] = c
    return u


@dataclass(frozen=True)
class LevelScheme:
    """Excited-state energies (SS basis) plus the SO-basis mixing matrix."""

    excited_ghz: np.ndarray
    mixing: np.ndarray
    g1_ghz: float = -2.87
    guard_band_ghz: float = 0.1

    def __post_init__(self):
        e = np.asarray(self.excited_ghz, dtype=float)
        u = np.asarray(self.mixing, dtype=float)
        if e.shape != (N_EXCITED,):
            raise ValueError(f"expected {N_EXCITED} excited energies, got {e.shape}")
        if u.shape != (N_EXCITED, N_EXCITED):
            raise ValueError("mixing matrix must be 6x6")
        if not np.allclose(u @ u.T, np.eye(N_EXCITED), atol=1e-10):
            raise ValueError("mixing matrix must be orthogonal")
        if self.guard_band_ghz <= 0:
            raise ValueError("guard_band_ghz must be positive")
        object.__setattr__(self, "excited_ghz", e)
        object.__setattr__(self, "mixing", u)

    def hamiltonian_so(self) -> np.ndarray:
        """Excited-manifold Hamiltonian in the SO basis, GHz."""
        return self.mixing.T @ np.diag(self.excited_ghz) @ self.mixing


def scheme_from_config(cfg: dict) -> LevelScheme:
    energies = np.array([cfg[f"level.e{i}_ghz"] for i in range(1, 7)], dtype=float)
    return LevelScheme(
        excited_ghz=energies,
        mixing=mixing_matrix(cfg["dipole.f11"]),
        g1_ghz=cfg["level.g1_ghz"],
        guard_band_ghz=cfg["level.guard_band_ghz"],
    )


def dipole_from_config(cfg: dict) -> DipoleModel:
    return DipoleModel(
        f11=cfg["dipole.f11"],
        p0_debye=cfg["dipole.p0_debye"],
        o_x=cfg.get("dipole.o_x", 1.0),
    )


def ss_dipoles(scheme: LevelScheme, dipole: DipoleModel) -> np.ndarray:
    """Dipole rows against the scheme's excited eigenbasis, shape (3, 6, 2).

    The x-component mismatch factor o_x applies after the basis rotation:
    it models unequal transverse reduced dipole moments, which rescale the
    x column of every matrix element regardless of basis.
    """
    p_so = dipole.so_matrix()
    p = np.einsum("gkc,jk->gjc", p_so, scheme.mixing)
    if dipole.o_x != 1.0:
        p = p.copy()
        p[:, :, 0] *= dipole.o_x
    return p


def strain_hamiltonian(axis: str, strength_ghz: float) -> np.ndarray:
    """Transverse-strain coupling in the SO basis, GHz.

    x-direction strain mixes SO states (1,6) and (2,5) and splits the S_z=0
    pair; y-direction strain mixes (1,5), (2,6) and (3,4). Axial strain only
    shifts all levels and is not modeled here.
    """
    e = float(strength_ghz)
    h = np.zeros((N_EXCITED, N_EXCITED))
    if axis == "x":
        h[0, 5] = h[5, 0] = -e
        h[1, 4] = h[4, 1] = e
        h[2, 2] = e
        h[3, 3] = -e
    elif axis == "y":
        h[0, 4] = h[4, 0] = -e
        h[1, 5] = h[5, 1] = -e
        h[2, 3] = h[3, 2] = -e
    else:
        raise ValueError(f"strain axis must be 'x' or 'y', got {axis!r}")
    return h


def apply_shift(scheme: LevelScheme, index: int, delta_ghz: float) -> LevelScheme:
    """Shift one SS-basis excited energy (1-based index), dipoles unchanged."""
    if not 1 <= index <= N_EXCITED:
        raise ValueError(f"excited-state index must be 1..6, got {index}")
    energies = scheme.excited_ghz.copy()
    energies[index - 1] += delta_ghz
    return replace(scheme, excited_ghz=energies)


def apply_strain(scheme: LevelScheme, axis: str, strength_ghz: float) -> LevelScheme:
    """Re-diagonalize the excited manifold with a transverse strain field.

    Returns a new scheme whose energies and mixing matrix include the strain.
    Eigenstates are matched to the unperturbed labels by overlap (so e.g. the
    state called e1 deforms continuously as strength grows from zero), and
    eigenvector signs are fixed to keep that overlap positive.
    """
    if strength_ghz == 0.0:
        return scheme
    h = scheme.hamiltonian_so() + strain_hamiltonian(axis, strength_ghz)
    vals, vecs = np.linalg.eigh(h)
    # overlap[j, k] = <old eigenstate j | new eigenstate k>
    overlap = scheme.mixing @ vecs
    rows, cols = linear_sum_assignment(-np.abs(overlap))
    order = np.empty(N_EXCITED, dtype=int)
    order[rows] = cols
    new_mixing = np.empty_like(scheme.mixing)
    new_energies = np.empty(N_EXCITED)
    for j in range(N_EXCITED):
        k = order[j]
        sign = 1.0 if overlap[j, k] >= 0 else -1.0
        new_mixing[j] = sign * vecs[:, k]
        new_energies[j] = vals[k]
    return replace(scheme, excited_ghz=new_energies, mixing=new_mixing)


def orthogonality_defect(dipoles: np.ndarray) -> float:
    """Largest |<d_g2,j | d_g3,j>| over excited states j.

    Zero means the two qubit ground states couple to each excited state with
    orthogonal polarizations, which is what lets a polarizer separate
    state-preserving from state-flipping photons.
    """
    d2 = dipoles[1]
    d3 = dipoles[2]
    dots = np.einsum("jc,jc->j", d2.conj(), d3)
    return float(np.max(np.abs(dots)))
