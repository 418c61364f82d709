"""Declarative descriptions of every rendered figure.

Each FigureSpec names its input CSV (as produced by
``nvgate --emit-figure-data``), maps plot series to CSV columns and
carries the axis labels. Validation against the actual CSV header
happens at render time; a column listed here but absent from the file
is a hard error.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class FigureSpec:
    name: str
    csv: str
    x: str
    series: tuple[tuple[str, str], ...]  # (column, legend label)
    xlabel: str
    ylabel: str
    logy: bool = False
    mask: str | None = None  # 0/1 validity column; 0 rows become gaps
    # names of rows in points_csv to mark with arrows
    annotations: tuple[str, ...] = ()
    points_csv: str | None = None

    def columns(self) -> tuple[str, ...]:
        cols = (self.x,) + tuple(c for c, _ in self.series)
        if self.mask:
            cols += (self.mask,)
        return cols


_AMPLITUDE_SERIES = (
    ("abs_Ap2", "|A_p2|"),
    ("abs_Ap3", "|A_p3|"),
    ("abs_Af2", "|A_f2|"),
    ("abs_Af3", "|A_f3|"),
)

_LEVEL_SERIES = tuple((f"level_{i}", f"level {i}") for i in range(1, 7))

_SCHEME_F_SERIES = (("F_M1", "M1"), ("F_M2", "M2"), ("F_M3", "M3"))

_ANGLE_SERIES = (
    ("angle_pres_deg", "preserving"),
    ("angle_flip_deg", "flipping"),
)

SPECS: tuple[FigureSpec, ...] = (
    FigureSpec(
        name="fig3", csv="fig3_amplitudes.csv", x="nu_ghz",
        series=_AMPLITUDE_SERIES, mask="valid",
        xlabel="drive detuning (GHz)", ylabel="amplitude",
        annotations=("magic", "balance"), points_csv="fig3_points.csv"),
    FigureSpec(
        name="fig6", csv="fig6_leakage.csv", x="nu_ghz",
        series=(("abs_Al2", "|A_l2|"), ("abs_Al3", "|A_l3|")), mask="valid",
        xlabel="drive detuning (GHz)", ylabel="leakage amplitude"),
    FigureSpec(
        name="fig7a", csv="fig7a_eta_sweep.csv", x="eta",
        series=(("mean_F", "fidelity"), ("P", "success")),
        xlabel="collection efficiency", ylabel="heralded value"),
    FigureSpec(
        name="fig7b", csv="fig7bc_window_sweep.csv", x="window",
        series=(("mean_F", "fidelity"),),
        xlabel="collection window (mean flip times)", ylabel="fidelity"),
    FigureSpec(
        name="fig7c", csv="fig7bc_window_sweep.csv", x="window",
        series=(("P", "success"),),
        xlabel="collection window (mean flip times)",
        ylabel="success probability"),
    FigureSpec(
        name="fig9a", csv="fig9a_magic_shift.csv", x="shift_ghz",
        series=_LEVEL_SERIES,
        xlabel="level shift (GHz)", ylabel="magic-point shift (GHz)"),
    FigureSpec(
        name="fig9b", csv="fig9b_m1_infidelity.csv", x="shift_ghz",
        series=_LEVEL_SERIES, logy=True,
        xlabel="level shift (GHz)", ylabel="M1 infidelity"),
    FigureSpec(
        name="fig9c", csv="fig9c_m2_infidelity.csv", x="shift_ghz",
        series=_LEVEL_SERIES, logy=True,
        xlabel="level shift (GHz)", ylabel="M2 infidelity"),
    FigureSpec(
        name="fig10a", csv="fig10a_mismatch_fidelity.csv", x="o_x",
        series=_SCHEME_F_SERIES,
        xlabel="x/y dipole strength ratio", ylabel="fidelity"),
    FigureSpec(
        name="fig10b", csv="fig10b_mismatch_angle.csv", x="o_x",
        series=(("angle_pres_deg", "preserving"),),
        xlabel="x/y dipole strength ratio",
        ylabel="emission angle (deg)"),
    FigureSpec(
        name="fig11a", csv="fig11a_xstrain_fidelity.csv", x="strain_ghz",
        series=_SCHEME_F_SERIES,
        xlabel="x strain (GHz)", ylabel="fidelity"),
    FigureSpec(
        name="fig11b", csv="fig11b_ystrain_fidelity.csv", x="strain_ghz",
        series=_SCHEME_F_SERIES,
        xlabel="y strain (GHz)", ylabel="fidelity"),
    FigureSpec(
        name="fig11c", csv="fig11c_xstrain_amplitudes.csv", x="strain_ghz",
        series=_AMPLITUDE_SERIES,
        xlabel="x strain (GHz)", ylabel="amplitude magnitude"),
    FigureSpec(
        name="fig11d", csv="fig11d_xstrain_diag.csv", x="strain_ghz",
        series=_ANGLE_SERIES,
        xlabel="x strain (GHz)", ylabel="emission angle (deg)"),
    FigureSpec(
        name="fig11e", csv="fig11e_ystrain_xdrive.csv", x="strain_ghz",
        series=_ANGLE_SERIES,
        xlabel="y strain (GHz)", ylabel="emission angle (deg)"),
    FigureSpec(
        name="fig11f", csv="fig11f_ystrain_diag.csv", x="strain_ghz",
        series=_ANGLE_SERIES,
        xlabel="y strain (GHz)", ylabel="emission angle (deg)"),
)


def all_specs() -> tuple[FigureSpec, ...]:
    return SPECS
