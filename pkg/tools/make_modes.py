"""Generate the bundled synthetic waveguide-mode dataset.

Four analytic Gaussian modes on a 41 x 41 grid: two guided (one x- and
one y-polarized, offset so the balanced-coupling crossing is
non-trivial), one odd-in-x radiative mode (vanishes on the x = 0 slice
and at the origin) and one z-polarized radiative mode. Each mode is
normalized numerically with the same trapezoid rule the loader uses, so
the file satisfies the orthonormality check to float precision.

Deterministic; rewriting the file is byte-stable.
"""

import pathlib
import sys

import numpy as np
from scipy.integrate import trapezoid

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "nvgate" / "data" / "synthetic_modes.dat"

N = 41
HALF_SPAN_UM = 1.5


def gaussian(xg, yg, x0, y0, sigma):
    return np.exp(-((xg - x0) ** 2 + (yg - y0) ** 2) / (2.0 * sigma**2))


def main() -> int:
    xs = np.linspace(-HALF_SPAN_UM, HALF_SPAN_UM, N)
    ys = np.linspace(-HALF_SPAN_UM, HALF_SPAN_UM, N)
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    eps = 1.0 + 4.0 * gaussian(xg, yg, 0.0, 0.0, 0.4)

    shapes = [
        # (guided, neff, polarization index, scalar profile)
        (True, 1.580, 0, gaussian(xg, yg, 0.0, 0.0, 0.30)),
        (True, 1.580, 1, gaussian(xg, yg, 0.0, 0.15, 0.38)),
        (False, 0.912, 0, xg * gaussian(xg, yg, 0.0, 0.0, 0.45)),
        (False, 0.783, 2, gaussian(xg, yg, 0.0, 0.0, 0.55)),
    ]

    lines = [
        "# synthetic Gaussian mode set for tests and demos",
        "# columns: x_um y_um eps Ex_re Ex_im Ey_re Ey_im Ez_re Ez_im",
    ]
    for k, (guided, neff, axis, profile) in enumerate(shapes, start=1):
        norm = trapezoid(trapezoid(eps * profile**2, ys, axis=1), xs, axis=0)
        profile = profile / np.sqrt(norm)
        lines.append(f"# mode {k} guided {int(guided)} neff {neff:.3f}")
        for i in range(N):
            for j in range(N):
                comp = [0.0, 0.0, 0.0]
                comp[axis] = profile[i, j]
                lines.append(
                    f"{xs[i]:.9g} {ys[j]:.9g} {eps[i, j]:.9g} "
                    f"{comp[0]:.9g} 0 {comp[1]:.9g} 0 {comp[2]:.9g} 0"
                )
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
