"""Physical constants, SI units unless noted."""

from scipy.constants import c, epsilon_0, h, hbar  # noqa: F401

# 1 Debye in C*m
DEBYE = 1e-21 / c

# zero-field splitting of the ground-state spin triplet, GHz
ZERO_FIELD_SPLITTING_GHZ = 2.87

# reference frequency that makes detunings dimensionless, GHz
NU0_GHZ = 1.0
