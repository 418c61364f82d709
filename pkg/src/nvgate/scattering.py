"""Photon-scattering transition amplitudes and drive working points.

Second-order (Raman) amplitudes for a driven NV center: the drive couples a
ground state to the virtually-populated excited manifold, which re-emits into
the collection mode. For ground states i -> i' and drive Jones vector lam,
the emitted-photon Jones vector is

    J[i', i] = sum_j  conj(d[i', j]) * (d[i, j] . lam) / delta_j

with d the dipole rows (units p0) and delta_j = (e_j - nu_d) / nu0 the
dimensionless detuning of excited state j. Everything here is in those
dimensionless "per-GHz-detuning" units; the physical rate of a transition
with amplitude A is gamma0() * |A|^2.

With the unperturbed dipole matrix and an axis-aligned drive, every emitted
photon is purely x- or y-polarized: preserving transitions (i' = i) carry the
drive axis, flipping transitions (g2 <-> g3) the orthogonal one. AmplitudeSet
packages those twelve signed scalars. Strain along y breaks the axis purity,
in which case only the full ScatterTable is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import DEBYE, NU0_GHZ, c, epsilon_0, h, hbar
from .levels import DipoleModel, LevelScheme, ss_dipoles

X_AXIS = np.array([1.0, 0.0])
Y_AXIS = np.array([0.0, 1.0])

# relative cross-polarization above which the axis-pure scalar picture is
# considered broken (y-strain territory)
AXIS_PURITY_TOL = 1e-9


class NoBracket(Exception):
    """Root search found no sign change in the scanned range."""


class NearResonance(Exception):
    """Requested drive frequency (or found root) violates a guard band."""


def detunings(scheme: LevelScheme, nu_d_ghz: float) -> np.ndarray:
    """Dimensionless detunings (e_j - nu_d)/nu0 of the six excited states."""
    return (scheme.excited_ghz - nu_d_ghz) / NU0_GHZ


def check_guard_band(scheme: LevelScheme, nu_d_ghz: float) -> None:
    gap = np.min(np.abs(scheme.excited_ghz - nu_d_ghz))
    if gap < scheme.guard_band_ghz:
        raise NearResonance(
            f"drive at {nu_d_ghz:.6f} GHz is {gap:.4f} GHz from an excited "
            f"state, inside the {scheme.guard_band_ghz} GHz guard band"
        )


def is_valid_frequency(scheme: LevelScheme, nu_d_ghz) -> np.ndarray:
    """Vectorized guard-band check; True where the frequency is usable."""
    nu = np.atleast_1d(np.asarray(nu_d_ghz, dtype=float))
    gaps = np.min(np.abs(scheme.excited_ghz[None, :] - nu[:, None]), axis=1)
    return gaps >= scheme.guard_band_ghz


@dataclass(frozen=True)
class ScatterTable:
    """Emitted-photon Jones vectors for one drive frequency and polarization.

    ``jones[i_final, i_initial]`` is the (x, y) amplitude pair for the
    transition between ground states (0 = g1, 1 = g2, 2 = g3); only the
    qubit states are valid initial states. Amplitudes are in units of the
    common scale A0 (x-drive convention).
    """

    nu_d_ghz: float
    drive: np.ndarray
    jones: np.ndarray  # shape (3, 3, 2), complex

    def flip(self, i_initial: int) -> np.ndarray:
        """Jones vector of the qubit-flipping photon from g2 (2) or g3 (3)."""
        other = 5 - i_initial
        return self.jones[other - 1, i_initial - 1]

    def preserve(self, i_initial: int) -> np.ndarray:
        return self.jones[i_initial - 1, i_initial - 1]

    def leak(self, i_initial: int) -> np.ndarray:
        return self.jones[0, i_initial - 1]


def scatter_table(
    scheme: LevelScheme,
    dipole: DipoleModel,
    nu_d_ghz: float,
    drive,
    a0_yx_ratio: float = 1.0,
    enforce_guard_band: bool = True,
) -> ScatterTable:
    """Full second-order scattering table for an arbitrary drive Jones vector.

    ``a0_yx_ratio`` is the ratio of the y- to x-drive amplitude scales (the
    two guided modes may couple unequally to the emitter; the default
    balanced-coupling position makes it 1).
    """
    if enforce_guard_band:
        check_guard_band(scheme, nu_d_ghz)
    lam = np.asarray(drive, dtype=complex)
    if lam.shape != (2,):
        raise ValueError("drive must be a 2-component Jones vector")
    norm = np.linalg.norm(lam)
    if norm == 0:
        raise ValueError("drive Jones vector cannot be zero")
    lam = lam / norm
    d = ss_dipoles(scheme, dipole).astype(complex)
    delta = detunings(scheme, nu_d_ghz)
    scale = np.array([1.0, a0_yx_ratio])
    absorb = np.einsum("ijc,c->ij", d, scale * lam)  # (3, 6)
    jones = np.einsum("fjc,ij,j->fic", d.conj(), absorb, 1.0 / delta)
    return ScatterTable(nu_d_ghz=float(nu_d_ghz), drive=lam, jones=jones)


@dataclass(frozen=True)
class AmplitudeSet:
    """The twelve signed axis-drive amplitudes at one drive frequency.

    Naming: ``af2_x`` is the state-flipping amplitude out of g2 under x-
    polarized drive (the photon is y-polarized), ``ap3_y`` the state-
    preserving amplitude of g3 under y drive (photon y-polarized), ``al*``
    the leakage amplitudes into g1 (the g2 leak photon carries the drive
    axis, the g3 leak photon the orthogonal one). Units of A0.
    """

    nu_d_ghz: float
    ap2_x: float
    ap3_x: float
    af2_x: float
    af3_x: float
    al2_x: complex
    al3_x: complex
    ap2_y: float
    ap3_y: float
    af2_y: float
    af3_y: float
    al2_y: complex
    al3_y: complex
    drive: np.ndarray = field(default_factory=lambda: X_AXIS.copy())

    def flip_pair(self, drive_axis: str = "x") -> tuple[float, float]:
        if drive_axis == "x":
            return self.af2_x, self.af3_x
        return self.af2_y, self.af3_y

    def preserve_pair(self, drive_axis: str = "x") -> tuple[float, float]:
        if drive_axis == "x":
            return self.ap2_x, self.ap3_x
        return self.ap2_y, self.ap3_y


def _pure_scalar(vec: np.ndarray, axis: int, context: str) -> float:
    """Extract the single nonzero Jones component, checking axis purity."""
    on = vec[axis]
    off = vec[1 - axis]
    scale = max(abs(on), abs(off), 1e-300)
    if abs(off) > AXIS_PURITY_TOL * scale and abs(off) > AXIS_PURITY_TOL:
        raise ValueError(
            f"{context}: emission is not axis-pure "
            f"(|cross| = {abs(off):.3e} vs |on| = {abs(on):.3e}); "
            "use scatter_table for this configuration"
        )
    if abs(on.imag) > AXIS_PURITY_TOL * scale:
        raise ValueError(f"{context}: expected a real amplitude")
    return float(on.real)


def amplitudes(
    scheme: LevelScheme,
    dipole: DipoleModel,
    nu_d_ghz: float,
    drive=None,
    a0_yx_ratio: float = 1.0,
    enforce_guard_band: bool = True,
) -> AmplitudeSet:
    """Axis-drive amplitude scalars at one frequency.

    Computes the scattering tables for x- and y-polarized drive and reduces
    each transition to its single signed amplitude. Raises ValueError when
    the dipole set does not emit axis-pure photons (e.g. under y strain);
    ``drive`` is recorded for downstream superposition bookkeeping and may be
    any Jones vector.
    """
    tx = scatter_table(scheme, dipole, nu_d_ghz, X_AXIS, a0_yx_ratio,
                       enforce_guard_band)
    ty = scatter_table(scheme, dipole, nu_d_ghz, Y_AXIS, a0_yx_ratio,
                       enforce_guard_band)
    vals = {}
    for name, table, axis in (("x", tx, 0), ("y", ty, 1)):
        pres_axis = axis          # preserving photons carry the drive axis
        flip_axis = 1 - axis      # flipping photons are orthogonal
        vals[f"ap2_{name}"] = _pure_scalar(
            table.preserve(2), pres_axis, f"A_p2^{name}")
        vals[f"ap3_{name}"] = _pure_scalar(
            table.preserve(3), pres_axis, f"A_p3^{name}")
        vals[f"af2_{name}"] = _pure_scalar(
            table.flip(2), flip_axis, f"A_f2^{name}")
        vals[f"af3_{name}"] = _pure_scalar(
            table.flip(3), flip_axis, f"A_f3^{name}")
        # The g2 leak photon shares the drive axis, the g3 leak photon is
        # orthogonal to it (the reachable intermediate states differ).
        vals[f"al2_{name}"] = complex(table.leak(2)[pres_axis])
        vals[f"al3_{name}"] = complex(table.leak(3)[flip_axis])
    drive_vec = X_AXIS.copy() if drive is None else np.asarray(drive, dtype=complex)
    return AmplitudeSet(nu_d_ghz=float(nu_d_ghz), drive=drive_vec, **vals)


def sweep(
    scheme: LevelScheme,
    dipole: DipoleModel,
    nu_start_ghz: float,
    nu_stop_ghz: float,
    step_ghz: float,
    drive_axis: str = "x",
    a0_yx_ratio: float = 1.0,
) -> dict:
    """Amplitude magnitudes on a frequency grid.

    Returns columns ``nu_ghz``, ``abs_Ap2`` .. ``abs_Al3`` and a ``valid``
    flag that is 0 inside the guard band of any excited state (amplitude
    columns are still filled there unless exactly on resonance).
    """
    if step_ghz <= 0:
        raise ValueError("step_ghz must be positive")
    if nu_stop_ghz <= nu_start_ghz:
        raise ValueError("empty sweep range")
    n = int(round((nu_stop_ghz - nu_start_ghz) / step_ghz)) + 1
    nus = nu_start_ghz + step_ghz * np.arange(n)
    nus = nus[nus <= nu_stop_ghz + 1e-12]
    valid = is_valid_frequency(scheme, nus)
    cols = {k: np.zeros(nus.size) for k in
            ("abs_Ap2", "abs_Ap3", "abs_Af2", "abs_Af3", "abs_Al2", "abs_Al3")}
    for i, nu in enumerate(nus):
        if np.min(np.abs(scheme.excited_ghz - nu)) < 1e-9:
            for k in cols:
                cols[k][i] = np.inf
            continue
        amps = amplitudes(scheme, dipole, nu, a0_yx_ratio=a0_yx_ratio,
                          enforce_guard_band=False)
        f2, f3 = amps.flip_pair(drive_axis)
        p2, p3 = amps.preserve_pair(drive_axis)
        if drive_axis == "x":
            l2, l3 = amps.al2_x, amps.al3_x
        else:
            l2, l3 = amps.al2_y, amps.al3_y
        cols["abs_Ap2"][i] = abs(p2)
        cols["abs_Ap3"][i] = abs(p3)
        cols["abs_Af2"][i] = abs(f2)
        cols["abs_Af3"][i] = abs(f3)
        cols["abs_Al2"][i] = abs(l2)
        cols["abs_Al3"][i] = abs(l3)
    out = {"nu_ghz": nus, "valid": valid.astype(int)}
    out.update(cols)
    return out


def _bisect(fn, lo: float, hi: float, tol: float = 1e-6) -> float:
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NoBracket(f"no sign change in [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _valid_segments(scheme: LevelScheme, lo: float, hi: float):
    """Frequency intervals between guard bands, clipped to [lo, hi]."""
    edges = []
    for e in np.sort(scheme.excited_ghz):
        edges.append((e - scheme.guard_band_ghz, e + scheme.guard_band_ghz))
    segments = []
    cursor = lo
    for a, b in edges:
        if b <= cursor:
            continue
        if a > hi:
            break
        if a > cursor:
            segments.append((cursor, min(a, hi)))
        cursor = max(cursor, b)
    if cursor < hi:
        segments.append((cursor, hi))
    return [(a, b) for a, b in segments if b - a > 1e-9]


def _scan_roots(scheme, fn, lo, hi, n_scan=2000):
    roots = []
    for a, b in _valid_segments(scheme, lo, hi):
        grid = np.linspace(a, b, max(int((b - a) / (hi - lo) * n_scan), 8))
        vals = np.array([fn(x) for x in grid])
        sign = np.sign(vals)
        for i in range(len(grid) - 1):
            if sign[i] == 0:
                roots.append(grid[i])
            elif sign[i] * sign[i + 1] < 0:
                roots.append(_bisect(fn, grid[i], grid[i + 1]))
    return roots


def find_magic(
    scheme: LevelScheme,
    dipole: DipoleModel,
    nu_start_ghz: float | None = None,
    nu_stop_ghz: float | None = None,
) -> float:
    """Drive frequency where the two state-preserving amplitudes cancel.

    Solves A_p2^x + A_p3^x = 0 (at such a point A_p2 = -A_p3, so both
    preserving transitions are suppressed to the same magnitude). If several
    roots exist in the scan range the one with the smallest residual
    preserving amplitude wins.
    """
    lo, hi = _default_range(scheme, nu_start_ghz, nu_stop_ghz)

    def h(nu):
        amps = amplitudes(scheme, dipole, nu, enforce_guard_band=False)
        return amps.ap2_x + amps.ap3_x

    roots = _scan_roots(scheme, h, lo, hi)
    if not roots:
        raise NoBracket(f"no magic point in [{lo:.3f}, {hi:.3f}] GHz")

    def residual(nu):
        amps = amplitudes(scheme, dipole, nu, enforce_guard_band=False)
        return max(abs(amps.ap2_x), abs(amps.ap3_x))

    return min(roots, key=residual)


def find_balance(
    scheme: LevelScheme,
    dipole: DipoleModel,
    nu_start_ghz: float | None = None,
    nu_stop_ghz: float | None = None,
) -> float:
    """Drive frequency where the two state-flipping amplitudes are equal.

    Solves A_f2^x - A_f3^x = 0 with both amplitudes carrying the same sign,
    which makes the heralded two-NV gate exactly balanced.
    """
    lo, hi = _default_range(scheme, nu_start_ghz, nu_stop_ghz)

    def g(nu):
        amps = amplitudes(scheme, dipole, nu, enforce_guard_band=False)
        return amps.af2_x - amps.af3_x

    roots = _scan_roots(scheme, g, lo, hi)
    same_sign = []
    for nu in roots:
        amps = amplitudes(scheme, dipole, nu, enforce_guard_band=False)
        if amps.af2_x * amps.af3_x > 0:
            same_sign.append(nu)
    if not same_sign:
        raise NoBracket(f"no balance point in [{lo:.3f}, {hi:.3f}] GHz")
    if len(same_sign) > 1:
        # prefer the root with the largest common flip amplitude
        def strength(nu):
            amps = amplitudes(scheme, dipole, nu, enforce_guard_band=False)
            return -abs(amps.af2_x)

        same_sign.sort(key=strength)
    return same_sign[0]


def _default_range(scheme, lo, hi):
    span_lo = float(np.min(scheme.excited_ghz)) - 3.0
    span_hi = float(np.max(scheme.excited_ghz)) + 3.0
    return (span_lo if lo is None else lo, span_hi if hi is None else hi)


@dataclass(frozen=True)
class RateParams:
    """Inputs for the physical scattering-rate constant.

    The drive is a plane wave of the given power focused on the given area,
    propagating inside the crystal (index n_diamond); the collection mode
    has effective index n_eff and normalized transverse profile u at the
    emitter. nu0 is the detuning unit used by the dimensionless amplitudes.
    """

    p0_debye: float = 5.2
    lambda_zpl_nm: float = 637.0
    n_eff: float = 1.580
    mode_u_per_um: float = 2.4847
    power_uw: float = 1.0
    area_um2: float = 1.0
    n_diamond: float = 2.42
    nu0_ghz: float = NU0_GHZ

    def __post_init__(self):
        for name in ("p0_debye", "lambda_zpl_nm", "n_eff", "mode_u_per_um",
                     "power_uw", "area_um2", "n_diamond", "nu0_ghz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def rate_params_from_config(cfg: dict) -> RateParams:
    return RateParams(
        p0_debye=cfg["dipole.p0_debye"],
        lambda_zpl_nm=cfg["drive.lambda_zpl_nm"],
        n_eff=cfg["drive.n_eff"],
        mode_u_per_um=cfg["drive.mode_field_per_um"],
        power_uw=cfg["drive.power_uw"],
        area_um2=cfg["drive.area_um2"],
        n_diamond=cfg["drive.n_diamond"],
        nu0_ghz=cfg["drive.nu0_ghz"],
    )


def drive_field_v_per_m(params: RateParams) -> float:
    """Drive electric field inside the crystal for the plane-wave model."""
    intensity = params.power_uw * 1e-6 / (params.area_um2 * 1e-12)  # W/m^2
    return float(np.sqrt(2.0 * intensity / (params.n_diamond * c * epsilon_0)))


def gamma0_mhz(params: RateParams) -> float:
    """Rate constant: physical rate = gamma0 * (dimensionless amplitude)^2.

    gamma0 = n_eff * omega_d * p0^4 * |u|^2 * E_d^2 / (4 pi c hbar^3 eps0 nu0^2)
    """
    p0 = params.p0_debye * DEBYE
    omega_d = 2.0 * np.pi * c / (params.lambda_zpl_nm * 1e-9)
    u2 = (params.mode_u_per_um * 1e6) ** 2
    e_d = drive_field_v_per_m(params)
    nu0 = params.nu0_ghz * 1e9
    rate = (params.n_eff * omega_d * p0**4 * u2 * e_d**2
            / (4.0 * np.pi * c * hbar**3 * epsilon_0 * nu0**2))
    return float(rate / 1e6)


def rabi_frequency_ghz(params: RateParams) -> float:
    """Drive Rabi frequency p0 E_d / h in GHz."""
    p0 = params.p0_debye * DEBYE
    return float(p0 * drive_field_v_per_m(params) / h / 1e9)
