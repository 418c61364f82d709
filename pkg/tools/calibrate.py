"""Closed-form calibration of the default level scheme.

Derives the six excited-state energies from the target magic-point amplitude
triple (|A_f2|, |A_f3|, |A_p|) = (0.1696, 0.2252, 0.0278) plus the 5.11 GHz
x-drive detuning of the top pair, placing the nominal magic point at zero
drive frequency. Prints the frozen config values and cross-checks every
downstream figure the tests rely on. Run from the repo root:

    python tools/calibrate.py
"""

import math
import sys

sys.path.insert(0, "src")

import numpy as np

from nvgate.levels import DipoleModel, LevelScheme, mixing_matrix
from nvgate.scattering import (
    RateParams, amplitudes, drive_field_v_per_m, find_balance, find_magic,
    gamma0_mhz, rabi_frequency_ghz,
)

A1 = 0.1696   # lower flip magnitude at the magic point
A2 = 0.2252   # upper flip magnitude
AP = 0.0278   # preserving magnitude
D1 = 5.11     # detuning of the degenerate top pair at the magic point


def derive_energies(dipole: DipoleModel):
    # consistency of the triple: both expressions for the shared partial sum
    a_from_low = (A1 + AP) / 2.0
    a_from_high = (A2 - AP) / 2.0
    assert abs(a_from_low - a_from_high) < 1e-12, (a_from_low, a_from_high)
    a = a_from_low

    t6 = AP - a          # f23^2 / d6
    t5 = -AP - a         # f23^2 / d5
    d6 = dipole.f23**2 / t6
    d5 = dipole.f23**2 / t5
    d3 = dipole.f22**2 / (a - dipole.f21**2 / D1)
    return np.array([D1, D1, d3, d3, d5, d6])


def main():
    dipole = DipoleModel()
    energies = derive_energies(dipole)
    scheme = LevelScheme(excited_ghz=energies, mixing=mixing_matrix(dipole.f11))

    print("frozen config values:")
    for i, e in enumerate(energies, start=1):
        print(f"  level.e{i}_ghz = {e!r}")

    amps = amplitudes(scheme, dipole, 0.0)
    print("\nmagic-point amplitudes at nu = 0 (must be exact):")
    print(f"  A_f2^x = {amps.af2_x!r}   target -{A1}")
    print(f"  A_f3^x = {amps.af3_x!r}   target +{A2}")
    print(f"  A_p2^x = {amps.ap2_x!r}   target +{AP}")
    print(f"  A_p3^x = {amps.ap3_x!r}   target -{AP}")
    assert abs(amps.af2_x + A1) < 1e-12
    assert abs(amps.af3_x - A2) < 1e-12
    assert abs(amps.ap2_x - AP) < 1e-12
    assert abs(amps.ap3_x + AP) < 1e-12

    nu_magic = find_magic(scheme, dipole)
    print(f"\nfind_magic -> {nu_magic!r} GHz (should be ~0)")
    assert abs(nu_magic) < 2e-6

    nu_bal = find_balance(scheme, dipole)
    bal = amplitudes(scheme, dipole, nu_bal)
    print(f"find_balance -> {nu_bal!r} GHz")
    print(f"  A_f2 = {bal.af2_x!r}  A_f3 = {bal.af3_x!r}")
    print(f"  A_p2 = {bal.ap2_x!r}  A_p3 = {bal.ap3_x!r}")
    e_sorted = np.sort(energies)
    assert e_sorted[0] < nu_bal < e_sorted[1], "balance not between lowest two"

    p_g2 = bal.af2_x**2 / (bal.af2_x**2 + bal.ap2_x**2)
    p_g3 = bal.af3_x**2 / (bal.af3_x**2 + bal.ap3_x**2)
    print(f"  first-photon pass probability: g2 {p_g2:.5f}, g3 {p_g3:.5f}, "
          f"worst {min(p_g2, p_g3):.5f} (target 0.374)")

    print("\nleakage magnitudes:")
    print(f"  magic   |A_l2^x| = {abs(amps.al2_x):.6f} (vs |A_p| {AP})")
    print(f"  balance |A_l2^x| = {abs(bal.al2_x):.6f} "
          f"(vs |A_f| {abs(bal.af2_x):.4f}, ratio "
          f"{abs(bal.af2_x)/abs(bal.al2_x):.1f}x)")

    params = RateParams()
    g0 = gamma0_mhz(params)
    omega_r = rabi_frequency_ghz(params)
    print(f"\nE_d = {drive_field_v_per_m(params):.2f} V/m")
    print(f"gamma0 = {g0:.4f} MHz (target 20.78 +- 1%)")
    print(f"Omega_R = {omega_r:.5f} GHz")
    assert abs(g0 - 20.78) / 20.78 < 0.01

    gamma_nr = 1e3 * (1 / 7.8 - 1 / 12.0)
    print(f"gamma_NR = {gamma_nr:.3f} MHz")

    # smallest detuning to an S_z ~ +-1 state coupled from g2 by each drive
    # axis (x couples e1 and e6, y couples e2 and e5)
    def delta_min(nu, idxs):
        return min(abs(energies[i - 1] - nu) for i in idxs)

    rows = [
        ("magic  x", 0.0, (1, 6), A1),
        ("magic  y", 0.0, (2, 5), A1),
        ("balance x", nu_bal, (1, 6), abs(bal.af2_x)),
        ("balance y", nu_bal, (2, 5), abs(bal.af2_x)),
    ]
    print("\nloss-ratio table (target 1.63, 0.975, 0.744, 0.412):")
    for label, nu, idxs, amp in rows:
        delta = delta_min(nu, idxs)
        gamma_t = g0 * amp**2
        gamma_minus = gamma_nr * (omega_r / delta) ** 2
        print(f"  {label:10s} delta = {delta:.4f} GHz   "
              f"ratio = {gamma_t / gamma_minus:.4f}")


if __name__ == "__main__":
    main()
