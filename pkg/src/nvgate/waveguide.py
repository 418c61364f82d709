"""Waveguide mode ingestion and photon-collection estimates.

Mode profiles come from an external eigenmode solver as plain text:
header lines ``# mode <k> guided <0|1> neff <val>`` each followed by the
rows of that mode, ``x_um y_um eps Ex_re Ex_im Ey_re Ey_im Ez_re Ez_im``,
on a rectangular grid. All integrals are trapezoid sums on that grid,
with the convention that modes are normalized per unit length,

    integral dx dy eps(x, y) E*_m . E_n = delta_mn,

so field values carry units of 1/um and every derived rate formula is
free of the quantization length.

The collection efficiency of a dipole at r0 along the unit vector p is

    eta(r0) = sum_guided |E_n(r0) . p|^2 / sum_all |E_n(r0) . p|^2,

which is exact only when the supplied set spans the radiation modes as
well; with a guided-only file the result is relative to the supplied
set and a warning says so.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np
from scipy.integrate import trapezoid

__all__ = [
    "ModeFileError",
    "MalformedRowError",
    "GridError",
    "NormalizationError",
    "ModeProfile",
    "load_modes",
    "default_modes",
    "mode_overlap",
    "gram_matrix",
    "select_modes",
    "renormalize",
    "field_at",
    "collection_efficiency",
    "find_balanced_coupling",
]

NORMALIZATION_TOL = 0.01


class ModeFileError(Exception):
    """Base class for mode-file ingestion failures."""


class MalformedRowError(ModeFileError):
    """A line is neither a valid header nor a 9-column data row."""


class GridError(ModeFileError):
    """The sample points do not form one shared rectangular grid."""


class NormalizationError(ModeFileError):
    """The supplied fields are not orthonormal under the eps weight."""


_HEADER_RE = re.compile(
    r"^#\s*mode\s+(\d+)\s+guided\s+([01])\s+neff\s+(\S+)\s*$"
)


@dataclass(frozen=True)
class ModeProfile:
    """Mode fields sampled on a shared rectangular grid.

    ``fields`` has shape (n_modes, nx, ny, 3) with complex entries in
    1/um; ``eps`` is the relative permittivity on the same grid.
    """

    x_um: np.ndarray
    y_um: np.ndarray
    eps: np.ndarray
    fields: np.ndarray
    guided: np.ndarray
    n_eff: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.fields.shape[0]

    @property
    def guided_indices(self) -> np.ndarray:
        return np.flatnonzero(self.guided)


def _parse_sections(text: str):
    """Split the file into (header, rows) blocks, one per mode."""
    sections: list[tuple[int, bool, float, dict]] = []
    current: dict | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER_RE.match(line)
            if m is None:
                if current is None:
                    continue  # free-form preamble comments are allowed
                raise MalformedRowError(
                    f"line {line_no}: comment after the first mode header "
                    "must be a '# mode <k> guided <0|1> neff <val>' header"
                )
            points: dict = {}
            current = points
            sections.append(
                (int(m.group(1)), m.group(2) == "1", float(m.group(3)), points)
            )
            continue
        if current is None:
            raise MalformedRowError(f"line {line_no}: data row before any mode header")
        parts = line.split()
        if len(parts) != 9:
            raise MalformedRowError(
                f"line {line_no}: expected 9 columns, got {len(parts)}"
            )
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise MalformedRowError(f"line {line_no}: {exc}") from None
        key = (vals[0], vals[1])
        if key in current:
            raise GridError(f"line {line_no}: duplicate grid point {key}")
        current[key] = (
            vals[2],
            complex(vals[3], vals[4]),
            complex(vals[5], vals[6]),
            complex(vals[7], vals[8]),
        )
    if not sections:
        raise MalformedRowError("no mode header found")
    return sections


def _assemble_grid(sections) -> ModeProfile:
    ref_points = sections[0][3]
    keys = set(ref_points)
    for k, _, _, points in sections[1:]:
        if set(points) != keys:
            raise GridError(f"mode {k} samples a different point set")
    xs = np.array(sorted({x for x, _ in keys}))
    ys = np.array(sorted({y for _, y in keys}))
    if xs.size < 2 or ys.size < 2:
        raise GridError("grid needs at least 2 points per axis")
    if len(keys) != xs.size * ys.size:
        raise GridError(
            f"{len(keys)} points do not fill the {xs.size} x {ys.size} grid"
        )
    x_index = {x: i for i, x in enumerate(xs)}
    y_index = {y: j for j, y in enumerate(ys)}

    eps = np.empty((xs.size, ys.size))
    for (x, y), (e, _, _, _) in ref_points.items():
        eps[x_index[x], y_index[y]] = e

    fields = np.zeros((len(sections), xs.size, ys.size, 3), dtype=complex)
    guided = np.zeros(len(sections), dtype=bool)
    n_eff = np.zeros(len(sections))
    for m, (k, is_guided, neff, points) in enumerate(sections):
        guided[m] = is_guided
        n_eff[m] = neff
        for (x, y), (e, ex, ey, ez) in points.items():
            i, j = x_index[x], y_index[y]
            if e != eps[i, j]:
                raise GridError(
                    f"mode {k}: permittivity at ({x}, {y}) disagrees with mode "
                    f"{sections[0][0]}"
                )
            fields[m, i, j] = (ex, ey, ez)
    return ModeProfile(
        x_um=xs, y_um=ys, eps=eps, fields=fields, guided=guided, n_eff=n_eff
    )


def mode_overlap(profile: ModeProfile, m: int, n: int) -> complex:
    """Permittivity-weighted field overlap integral of two modes."""
    integrand = profile.eps * np.sum(
        profile.fields[m].conj() * profile.fields[n], axis=-1
    )
    return complex(
        trapezoid(trapezoid(integrand, profile.y_um, axis=1), profile.x_um, axis=0)
    )


def gram_matrix(profile: ModeProfile) -> np.ndarray:
    n = profile.n_modes
    g = np.empty((n, n), dtype=complex)
    for m in range(n):
        for k in range(m, n):
            g[m, k] = mode_overlap(profile, m, k)
            g[k, m] = g[m, k].conjugate()
    return g


def _check_normalization(profile: ModeProfile, tol: float) -> None:
    g = gram_matrix(profile)
    residual = np.max(np.abs(g - np.eye(profile.n_modes)))
    if residual > tol:
        raise NormalizationError(
            f"mode set is not orthonormal: worst residual {residual:.3e} "
            f"(tolerance {tol:g})"
        )


def load_modes(path, normalization_tol: float = NORMALIZATION_TOL) -> ModeProfile:
    """Parse and validate a mode-profile file.

    Raises MalformedRowError, GridError or NormalizationError depending
    on which stage fails. Row order within a mode block is irrelevant.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    profile = _assemble_grid(_parse_sections(text))
    _check_normalization(profile, normalization_tol)
    return profile


def default_modes() -> ModeProfile:
    """The bundled synthetic Gaussian mode set (2 guided + 2 radiative)."""
    ref = resources.files("nvgate.data").joinpath("synthetic_modes.dat")
    with resources.as_file(ref) as path:
        return load_modes(path)


def select_modes(profile: ModeProfile, indices) -> ModeProfile:
    """A profile restricted to the given mode indices (order kept)."""
    idx = np.atleast_1d(np.asarray(indices, dtype=int))
    return replace(
        profile,
        fields=profile.fields[idx],
        guided=profile.guided[idx],
        n_eff=profile.n_eff[idx],
    )


def renormalize(profile: ModeProfile) -> ModeProfile:
    """Rescale each mode to unit eps-weighted norm.

    Recovers a valid profile from a uniformly mis-scaled export; it does
    not fix non-orthogonal mode sets.
    """
    fields = profile.fields.copy()
    for m in range(profile.n_modes):
        norm = mode_overlap(profile, m, m).real
        if norm <= 0.0:
            raise NormalizationError(f"mode {m} has non-positive norm")
        fields[m] /= np.sqrt(norm)
    return replace(profile, fields=fields)


def _bracket(axis: np.ndarray, value: float, name: str) -> tuple[int, float]:
    if value < axis[0] or value > axis[-1]:
        raise ValueError(
            f"{name} = {value:g} um lies outside the grid "
            f"[{axis[0]:g}, {axis[-1]:g}]"
        )
    i = int(np.searchsorted(axis, value, side="right") - 1)
    i = min(max(i, 0), axis.size - 2)
    frac = (value - axis[i]) / (axis[i + 1] - axis[i])
    return i, frac


def field_at(profile: ModeProfile, mode: int, position) -> np.ndarray:
    """Bilinear interpolation of one mode's field at (x, y) in um."""
    x, y = float(position[0]), float(position[1])
    i, fx = _bracket(profile.x_um, x, "x")
    j, fy = _bracket(profile.y_um, y, "y")
    f = profile.fields[mode]
    return (
        f[i, j] * (1 - fx) * (1 - fy)
        + f[i + 1, j] * fx * (1 - fy)
        + f[i, j + 1] * (1 - fx) * fy
        + f[i + 1, j + 1] * fx * fy
    )


def collection_efficiency(profile: ModeProfile, position, dipole_axis) -> float:
    """Fraction of dipole emission captured by the guided modes.

    ``dipole_axis`` is a real 3-vector (normalized internally). With no
    non-guided modes in the set the denominator is incomplete and the
    value is only relative to the supplied modes; a warning says so.
    """
    p = np.asarray(dipole_axis, dtype=float)
    norm = np.linalg.norm(p)
    if norm == 0.0:
        raise ValueError("dipole axis must be a nonzero vector")
    p = p / norm
    if not (~profile.guided).any():
        warnings.warn(
            "mode set has no non-guided modes; the efficiency is relative "
            "to the supplied set, not to all emission channels",
            stacklevel=2,
        )
    num = 0.0
    den = 0.0
    for m in range(profile.n_modes):
        coupling = abs(np.dot(field_at(profile, m, position), p)) ** 2
        den += coupling
        if profile.guided[m]:
            num += coupling
    if den == 0.0:
        raise ValueError("no mode couples to this dipole at this position")
    return num / den


def _dominant_axis(profile: ModeProfile, mode: int) -> int:
    power = np.sum(np.abs(profile.fields[mode]) ** 2, axis=(0, 1))
    return int(np.argmax(power))


def find_balanced_coupling(profile: ModeProfile) -> tuple[float, float, float]:
    """Point on the x = 0 slice where the two guided modes couple equally.

    Returns (x, y, u) with u the common field amplitude in 1/um: the
    x-polarized guided mode's E_x equals the y-polarized one's E_y
    there. Among multiple equality points the strongest-field one wins.
    """
    guided = profile.guided_indices
    if guided.size < 2:
        raise ValueError("need two guided modes to balance")
    a, b = int(guided[0]), int(guided[1])
    if _dominant_axis(profile, a) != 0:
        a, b = b, a
    if _dominant_axis(profile, a) != 0 or _dominant_axis(profile, b) != 1:
        raise ValueError("expected one x-polarized and one y-polarized guided mode")

    ys = profile.y_um
    f = np.array([field_at(profile, a, (0.0, y))[0].real for y in ys])
    g = np.array([field_at(profile, b, (0.0, y))[1].real for y in ys])
    h = f - g
    scale = max(np.max(np.abs(f)), np.max(np.abs(g)))
    candidates: list[tuple[float, float]] = []
    for j in range(ys.size):
        if abs(h[j]) <= 1e-12 * scale:
            candidates.append((ys[j], f[j]))
        if j + 1 < ys.size and h[j] * h[j + 1] < 0.0:
            t = h[j] / (h[j] - h[j + 1])
            y_star = ys[j] + t * (ys[j + 1] - ys[j])
            u_star = f[j] + t * (f[j + 1] - f[j])
            candidates.append((y_star, u_star))
    if not candidates:
        raise ValueError("no balanced-coupling point on the x = 0 slice")
    y_best, u_best = max(candidates, key=lambda c: abs(c[1]))
    return 0.0, float(y_best), float(u_best)
