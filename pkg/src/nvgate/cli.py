"""Command-line front end: reproducible CSV and report outputs.

Every output file starts with a comment-line manifest (version, command,
config digest, seed where one applies, output names) so a result can be
traced back to exactly one (config, seed) pair. All numbers are printed
with 9 significant digits; identical inputs give byte-identical files.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import polarization as pol
from .config import (
    ConfigError,
    config_digest,
    default_config,
    load_config,
    merge_config,
    parse_config,
)
from .dynamics import build_channels, run_ensemble, run_trajectory, trajectory_rng
from .dynamics import input_state as make_input_state
from .dynamics import _NoJumpPropagator
from .gates import (
    SCHEMES,
    entanglement_fidelity,
    pass_fraction,
    perturbed_scheme_gate,
    scheme_gate,
    scheme_target,
)
from .levels import (
    apply_shift,
    apply_strain,
    dipole_from_config,
    scheme_from_config,
)
from .nonradiative import gamma_nr_from_lifetimes, loss_ratio_table
from .scattering import (
    NearResonance,
    NoBracket,
    amplitudes,
    find_balance,
    find_magic,
    gamma0_mhz,
    rabi_frequency_ghz,
    rate_params_from_config,
    scatter_table,
)
from .scattering import sweep as sweep_amplitudes
from .waveguide import (
    GridError,
    MalformedRowError,
    NormalizationError,
    collection_efficiency,
    default_modes,
    find_balanced_coupling,
    gram_matrix,
    load_modes,
)

SWEEP_COLUMNS = ("nu_ghz", "abs_Ap2", "abs_Ap3", "abs_Af2", "abs_Af3",
                 "abs_Al2", "abs_Al3", "valid")
ENSEMBLE_COLUMNS = ("scheme", "input", "eta", "window", "n_traj",
                    "n_success", "mean_F", "stderr_F", "P")


class ConfigFailure(click.ClickException):
    exit_code = 2


class NumericalFailure(click.ClickException):
    exit_code = 3


def _guarded(fn):
    """Map library errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except (ConfigError, MalformedRowError, GridError) as exc:
            raise ConfigFailure(str(exc)) from exc
        except (NoBracket, NearResonance, NormalizationError, FloatingPointError,
                np.linalg.LinAlgError, ZeroDivisionError, RuntimeError,
                ValueError) as exc:
            raise NumericalFailure(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


@dataclass(frozen=True)
class RunManifest:
    """Provenance header written on every output file."""

    command: str
    config_digest: str
    outputs: tuple[str, ...]
    seed: int | None = None
    version: str = __version__

    def header_lines(self) -> list[str]:
        lines = [
            f"# nvgate {self.version}",
            f"# command: {self.command}",
            f"# config: {self.config_digest}",
        ]
        if self.seed is not None:
            lines.append(f"# seed: {self.seed}")
        for name in self.outputs:
            lines.append(f"# output: {name}")
        return lines


def _write_csv(path: Path, manifest: RunManifest, columns, rows) -> None:
    lines = manifest.header_lines()
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_report(path: Path | None, manifest: RunManifest, lines) -> None:
    text_lines = manifest.header_lines() + list(lines)
    for line in text_lines:
        click.echo(line)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(text_lines) + "\n", encoding="utf-8")


@dataclass
class AppState:
    cfg: dict
    digest: str

    def physics(self):
        scheme = scheme_from_config(self.cfg)
        dipole = dipole_from_config(self.cfg)
        return scheme, dipole

    @property
    def a0_ratio(self) -> float:
        return float(self.cfg["dipole.a0_yx_ratio"])

    @property
    def lifetimes_ns(self) -> tuple[float, float]:
        return (float(self.cfg["lifetime.radiative_ns"]),
                float(self.cfg["lifetime.total_ns"]))

    def working_point(self, scheme_name: str, scheme, dipole) -> float:
        if scheme_name == "B1":
            return find_balance(scheme, dipole)
        return find_magic(scheme, dipole)


@click.group(invoke_without_command=True)
@click.version_option(version=__version__, prog_name="nvgate")
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Physics config file; its keys override the packaged "
                   "defaults.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override one config key (repeatable).")
@click.option("--emit-figure-data", "figure_dir",
              type=click.Path(file_okay=False), default=None,
              help="Write the figure-input CSV set to this directory and exit.")
@click.option("--figure-n", type=int, default=2000, show_default=True,
              help="Trajectories per point for the figure-data ensembles.")
@click.option("--figure-points", type=int, default=21, show_default=True,
              help="Grid points per perturbation axis in the figure data.")
@click.option("--figure-seed", type=int, default=7, show_default=True)
@click.pass_context
@_guarded
def cli(ctx, config_path, overrides, figure_dir, figure_n, figure_points,
        figure_seed):
    """Heralded two-qubit gate calculations between driven emitters."""
    cfg = default_config()
    if config_path:
        cfg = merge_config(cfg, load_config(config_path))
    if overrides:
        try:
            text = "\n".join(overrides)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg = merge_config(cfg, parse_config(text))
    state = AppState(cfg=cfg, digest=config_digest(cfg))
    ctx.obj = state
    if ctx.invoked_subcommand is None:
        if figure_dir is None:
            click.echo(ctx.get_help())
            ctx.exit(2)
        _emit_figure_data(state, Path(figure_dir), figure_n, figure_points,
                          figure_seed)
        ctx.exit(0)


@cli.command()
@click.option("--start", type=float, default=None,
              help="Sweep start in GHz (default: 3 GHz below the lowest level).")
@click.option("--stop", type=float, default=None,
              help="Sweep stop in GHz (default: 3 GHz above the highest level).")
@click.option("--step", type=float, default=0.01, show_default=True)
@click.option("--drive", type=click.Choice(["x", "y"]), default="x",
              show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default="sweep.csv",
              show_default=True)
@click.pass_obj
@_guarded
def sweep(state: AppState, start, stop, step, drive, output):
    """Transition-amplitude magnitudes over a drive-frequency grid."""
    scheme, dipole = state.physics()
    if start is None:
        start = float(scheme.excited_ghz.min() - 3.0)
    if stop is None:
        stop = float(scheme.excited_ghz.max() + 3.0)
    data = sweep_amplitudes(scheme, dipole, start, stop, step,
                            drive_axis=drive, a0_yx_ratio=state.a0_ratio)
    manifest = RunManifest(
        command=f"sweep start={_fmt(start)} stop={_fmt(stop)} "
                f"step={_fmt(step)} drive={drive}",
        config_digest=state.digest, outputs=(output,))
    rows = zip(*(data[c] for c in SWEEP_COLUMNS))
    _write_csv(Path(output), manifest, SWEEP_COLUMNS, rows)
    click.echo(f"wrote {output} ({data['nu_ghz'].size} rows)")


@cli.command("find-points")
@click.pass_obj
@_guarded
def find_points(state: AppState):
    """Locate the two special drive frequencies (single-line record)."""
    scheme, dipole = state.physics()
    nu_m = find_magic(scheme, dipole)
    nu_b = find_balance(scheme, dipole)
    am = amplitudes(scheme, dipole, nu_m, a0_yx_ratio=state.a0_ratio)
    ab = amplitudes(scheme, dipole, nu_b, a0_yx_ratio=state.a0_ratio)
    pass_b = [
        ab.af2_x**2 / (ab.af2_x**2 + ab.ap2_x**2),
        ab.af3_x**2 / (ab.af3_x**2 + ab.ap3_x**2),
    ]
    fields = {
        "magic_nu_ghz": nu_m,
        "balance_nu_ghz": nu_b,
        "magic_ap2": am.ap2_x,
        "magic_ap3": am.ap3_x,
        "magic_af2": am.af2_x,
        "magic_af3": am.af3_x,
        "balance_af2": ab.af2_x,
        "balance_af3": ab.af3_x,
        "balance_pass_worst": min(pass_b),
    }
    click.echo(" ".join(f"{k}={_fmt(v)}" for k, v in fields.items()))


@cli.command("gate-report")
@click.argument("scheme_name", metavar="SCHEME",
                type=click.Choice(SCHEMES, case_sensitive=False))
@click.option("--nu-d", type=float, default=None,
              help="Drive frequency in GHz (default: the scheme's point).")
@click.option("--detector", type=click.Choice(["right", "left"]),
              default="right", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Also write the report to this file.")
@click.pass_obj
@_guarded
def gate_report(state: AppState, scheme_name, nu_d, detector, output):
    """Gate matrix, fidelity, pass probability and unitarity defect."""
    scheme_name = scheme_name.upper()
    scheme, dipole = state.physics()
    if nu_d is None:
        nu_d = state.working_point(scheme_name, scheme, dipole)
    amps = amplitudes(scheme, dipole, nu_d, a0_yx_ratio=state.a0_ratio)
    gate = scheme_gate(scheme_name, amps, detector)
    target = scheme_target(scheme_name, detector)
    fid = entanglement_fidelity(target, gate.matrix)
    passes = pass_fraction(scheme_name, amps)
    normalized = gate.normalized
    lines = [
        f"scheme: {scheme_name}",
        f"detector: {detector}",
        f"nu_d_ghz: {_fmt(nu_d)}",
        "matrix (normalized, row-major re,im pairs):",
    ]
    for row in normalized:
        lines.append(",".join(f"{_fmt(v.real)},{_fmt(v.imag)}" for v in row))
    lines += [
        f"entanglement_fidelity: {_fmt(fid)}",
        f"pass_fraction_g2: {_fmt(passes[0])}",
        f"pass_fraction_g3: {_fmt(passes[1])}",
        f"pass_fraction_worst: {_fmt(min(passes))}",
        f"unitarity_defect: {_fmt(gate.unitarity_defect())}",
    ]
    manifest = RunManifest(
        command=f"gate-report {scheme_name} nu_d={_fmt(nu_d)} detector={detector}",
        config_digest=state.digest,
        outputs=(output,) if output else ())
    _write_report(Path(output) if output else None, manifest, lines)


def _ensemble_row(res) -> tuple:
    return (res.scheme, res.input_name, res.eta, res.window, res.n_traj,
            res.n_success, res.mean_fidelity, res.stderr_fidelity,
            res.success_probability)


@cli.command()
@click.option("--scheme", "scheme_name",
              type=click.Choice(SCHEMES + ("idealized",), case_sensitive=False),
              default="B1", show_default=True)
@click.option("--input", "input_name",
              type=click.Choice(["psi1", "psi2", "psi3"]), default="psi3",
              show_default=True)
@click.option("--eta", type=float, default=0.85, show_default=True,
              help="Overall detection efficiency for analyzer-passed photons.")
@click.option("--window", type=float, default=math.inf, show_default="inf",
              help="Heralding window in mean-flip-rate time units.")
@click.option("--n", "n_traj", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--detector", type=click.Choice(["right", "left"]),
              default="right", show_default=True)
@click.option("--include-leakage", is_flag=True,
              help="Model Raman leakage into the shelf state as extra loss.")
@click.option("--output", type=click.Path(dir_okay=False),
              default="trajectories.csv", show_default=True)
@click.option("--dump", type=click.Path(dir_okay=False), default=None,
              help="Also write one row per trajectory for debugging.")
@click.pass_obj
@_guarded
def trajectories(state: AppState, scheme_name, input_name, eta, window,
                 n_traj, seed, detector, include_leakage, output, dump):
    """Monte Carlo heralded-gate ensemble (one CSV row)."""
    scheme_name = scheme_name if scheme_name == "idealized" else scheme_name.upper()
    channels = _scheme_channels(state, scheme_name, eta, include_leakage,
                                detector)
    res = run_ensemble(channels, input_name, window, n_traj, seed)
    command = (f"trajectories scheme={scheme_name} input={input_name} "
               f"eta={_fmt(eta)} window={_fmt(window)} n={n_traj} "
               f"detector={detector} leakage={int(include_leakage)}")
    outputs = (output,) + ((dump,) if dump else ())
    manifest = RunManifest(command=command, config_digest=state.digest,
                           outputs=outputs, seed=seed)
    _write_csv(Path(output), manifest, ENSEMBLE_COLUMNS,
               [_ensemble_row(res)])
    if dump:
        psi0 = make_input_state(input_name, channels.dim)
        target_state = channels.target @ psi0
        target_state = target_state / np.linalg.norm(target_state)
        prop = _NoJumpPropagator(channels)
        rows = []
        for i in range(n_traj):
            tr = run_trajectory(channels, psi0, window,
                                trajectory_rng(seed, i), prop, target_state)
            rows.append((i, int(tr.detected), tr.t_click, tr.n_lost,
                         tr.fidelity if tr.detected else math.nan))
        _write_csv(Path(dump), manifest,
                   ("index", "detected", "t_click", "n_lost", "fidelity"),
                   rows)
    click.echo(f"wrote {output}: mean_F={_fmt(res.mean_fidelity)} "
               f"P={_fmt(res.success_probability)} "
               f"({res.n_success}/{res.n_traj} heralded)")


def _scheme_channels(state: AppState, scheme_name, eta, include_leakage,
                     detector):
    if scheme_name == "idealized":
        return build_channels("idealized", None, eta,
                              include_leakage=include_leakage,
                              detector=detector)
    scheme, dipole = state.physics()
    nu_d = state.working_point(scheme_name, scheme, dipole)
    amps = amplitudes(scheme, dipole, nu_d, a0_yx_ratio=state.a0_ratio)
    return build_channels(scheme_name, amps, eta,
                          include_leakage=include_leakage, detector=detector)


def _one_click_fidelity(state: AppState, scheme_name: str,
                        input_name: str) -> float:
    """Upper-bound fidelity: the heralded gate applied once, no dynamics."""
    scheme, dipole = state.physics()
    nu_d = state.working_point(scheme_name, scheme, dipole)
    amps = amplitudes(scheme, dipole, nu_d, a0_yx_ratio=state.a0_ratio)
    gate = scheme_gate(scheme_name, amps)
    psi = make_input_state(input_name, 4)
    out = gate.matrix @ psi
    tgt = scheme_target(scheme_name) @ psi
    tgt = tgt / np.linalg.norm(tgt)
    denom = float(np.vdot(out, out).real)
    if denom <= 0:
        raise FloatingPointError("gate annihilates the input state")
    return float(abs(np.vdot(tgt, out)) ** 2 / denom)


@cli.command()
@click.option("--eta", type=float, default=0.85, show_default=True)
@click.option("--window", type=float, default=0.1, show_default=True,
              help="Finite collection window for the windowed column.")
@click.option("--n", "n_traj", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False),
              default="table3.csv", show_default=True)
@click.pass_obj
@_guarded
def table3(state: AppState, eta, window, n_traj, seed, output):
    """Fidelity/success grid: schemes x inputs x collection conditions.

    The perfect-collection rows (eta=1, infinite window) are deterministic
    upper bounds, the single-click gate applied to the input (n_traj=0
    marks them); the imperfect-collection rows are Monte Carlo ensembles.
    """
    conditions = ((1.0, math.inf), (eta, math.inf), (eta, window))
    rows = []
    row_index = 0
    for scheme_name in SCHEMES:
        for cond_eta, cond_window in conditions:
            exact = cond_eta == 1.0 and math.isinf(cond_window)
            if not exact:
                channels = _scheme_channels(state, scheme_name, cond_eta,
                                            False, "right")
            for input_name in ("psi1", "psi2", "psi3"):
                if exact:
                    fid = _one_click_fidelity(state, scheme_name, input_name)
                    rows.append((scheme_name, input_name, 1.0, math.inf,
                                 0, 0, fid, 0.0, 1.0))
                else:
                    res = run_ensemble(channels, input_name, cond_window,
                                       n_traj, seed + row_index)
                    rows.append(_ensemble_row(res))
                row_index += 1
    command = (f"table3 eta={_fmt(eta)} window={_fmt(window)} n={n_traj}")
    manifest = RunManifest(command=command, config_digest=state.digest,
                           outputs=(output,), seed=seed)
    _write_csv(Path(output), manifest, ENSEMBLE_COLUMNS, rows)
    click.echo(f"wrote {output} ({len(rows)} rows)")


@cli.command()
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Also write the report to this file.")
@click.pass_obj
@_guarded
def table4(state: AppState, output):
    """Loss-rate ratios Gamma_t / Gamma_minus at both working points."""
    scheme, dipole = state.physics()
    rates = rate_params_from_config(state.cfg)
    tau0, tau1 = state.lifetimes_ns
    rows = loss_ratio_table(scheme, dipole, rates, tau0, tau1)
    lines = [
        f"gamma_nr_mhz: {_fmt(gamma_nr_from_lifetimes(tau0, tau1))}",
        f"gamma0_mhz: {_fmt(gamma0_mhz(rates))}",
        f"omega_r_ghz: {_fmt(rabi_frequency_ghz(rates))}",
    ]
    for row in rows:
        tag = f"{row['point']}_{row['drive']}"
        lines.append(
            f"{tag}: nu_d_ghz={_fmt(row['nu_d_ghz'])} "
            f"delta_ghz={_fmt(row['delta_ghz'])} "
            f"gamma_t_mhz={_fmt(row['gamma_t_mhz'])} "
            f"gamma_minus_mhz={_fmt(row['gamma_minus_mhz'])} "
            f"ratio={_fmt(row['ratio'])}"
        )
    manifest = RunManifest(command="table4", config_digest=state.digest,
                           outputs=(output,) if output else ())
    _write_report(Path(output) if output else None, manifest, lines)


def _strain_record(scheme, dipole, nu_m, axis, strength, a0_ratio):
    """Fidelities and diagonal-drive polarization data at one strain value."""
    strained = apply_strain(scheme, axis, strength)
    rec = {"strain_ghz": strength}
    for name in ("M1", "M2", "M3"):
        gate = perturbed_scheme_gate(name, strained, dipole, nu_m,
                                     a0_yx_ratio=a0_ratio)
        rec[f"F_{name}"] = entanglement_fidelity(scheme_target(name),
                                                 gate.matrix)
    diag = scatter_table(strained, dipole, nu_m, pol.NAMED_AXES["diag"],
                         a0_ratio)
    anti = pol.NAMED_AXES["antidiag"]
    rec["angle_pres_deg"] = pol.polarization_angle_deg(diag.preserve(2), anti)
    rec["angle_flip_deg"] = pol.polarization_angle_deg(diag.flip(2), anti)
    rec["abs_pres"] = float(np.linalg.norm(diag.preserve(2)))
    rec["abs_flip"] = float(np.linalg.norm(diag.flip(2)))
    xtab = scatter_table(strained, dipole, nu_m, pol.NAMED_AXES["x"], a0_ratio)
    rec["angle_pres_x_deg"] = pol.polarization_angle_deg(
        xtab.preserve(2), pol.NAMED_AXES["x"])
    rec["angle_flip_x_deg"] = pol.polarization_angle_deg(
        xtab.flip(2), pol.NAMED_AXES["y"])
    rec["abs_pres_x"] = float(np.linalg.norm(xtab.preserve(2)))
    rec["abs_flip_x"] = float(np.linalg.norm(xtab.flip(2)))
    return rec


def _shift_record(scheme, dipole, level, delta, nu_m0, a0_ratio):
    """Re-found magic point and gate fidelities for one level shift."""
    shifted = apply_shift(scheme, level, delta)
    nu_m = find_magic(shifted, dipole)
    amps = amplitudes(shifted, dipole, nu_m, a0_yx_ratio=a0_ratio)
    rec = {"shift_ghz": delta, "magic_nu_ghz": nu_m,
           "magic_shift_ghz": nu_m - nu_m0}
    for name in ("M1", "M2", "M3"):
        fid = entanglement_fidelity(scheme_target(name),
                                    scheme_gate(name, amps).matrix)
        rec[f"F_{name}"] = fid
    return rec


def _mismatch_record(scheme, dipole, o_x, nu_m, a0_ratio):
    from dataclasses import replace

    tilted = replace(dipole, o_x=o_x)
    amps = amplitudes(scheme, tilted, nu_m, a0_yx_ratio=a0_ratio)
    rec = {"o_x": o_x}
    for name in ("M1", "M2", "M3"):
        fid = entanglement_fidelity(scheme_target(name),
                                    scheme_gate(name, amps).matrix)
        rec[f"F_{name}"] = fid
    diag = pol.scattered_states(amps, pol.NAMED_AXES["diag"])
    rec["angle_pres_deg"] = pol.polarization_angle_deg(
        diag.preserve(2), pol.NAMED_AXES["antidiag"])
    return rec


@cli.command()
@click.option("--shift-level", type=click.IntRange(1, 6), default=None,
              help="Scan an energy shift of this excited level (1..6).")
@click.option("--dipole-mismatch", "mismatch", is_flag=True,
              help="Scan the x/y dipole-strength ratio o_x.")
@click.option("--strain", type=click.Choice(["x", "y"]), default=None,
              help="Scan a crystal strain field along this axis.")
@click.option("--range", "scan_range", type=float, default=1.0,
              show_default=True, help="Half-width of the scan (GHz or ratio).")
@click.option("--points", type=int, default=21, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False),
              default="perturb.csv", show_default=True)
@click.pass_obj
@_guarded
def perturb(state: AppState, shift_level, mismatch, strain, scan_range,
            points, output):
    """Fidelity scans under level shifts, dipole mismatch or strain."""
    chosen = sum((shift_level is not None, bool(mismatch), strain is not None))
    if chosen != 1:
        raise click.UsageError(
            "pick exactly one of --shift-level, --dipole-mismatch, --strain")
    if points < 2:
        raise click.UsageError("--points must be at least 2")
    scheme, dipole = state.physics()
    nu_m = find_magic(scheme, dipole)
    a0 = state.a0_ratio
    if shift_level is not None:
        grid = np.linspace(-scan_range, scan_range, points)
        recs = [_shift_record(scheme, dipole, shift_level, d, nu_m, a0)
                for d in grid]
        columns = ("shift_ghz", "magic_nu_ghz", "magic_shift_ghz",
                   "F_M1", "F_M2", "F_M3")
        mode = f"shift-level={shift_level}"
    elif mismatch:
        grid = np.linspace(1.0 - scan_range / 2.0, 1.0 + scan_range / 2.0,
                           points)
        recs = [_mismatch_record(scheme, dipole, o, nu_m, a0) for o in grid]
        columns = ("o_x", "F_M1", "F_M2", "F_M3", "angle_pres_deg")
        mode = "dipole-mismatch"
    else:
        grid = np.linspace(-scan_range, scan_range, points)
        recs = [_strain_record(scheme, dipole, nu_m, strain, e, a0)
                for e in grid]
        columns = ("strain_ghz", "F_M1", "F_M2", "F_M3",
                   "angle_pres_deg", "angle_flip_deg", "abs_pres", "abs_flip")
        mode = f"strain={strain}"
    manifest = RunManifest(
        command=f"perturb {mode} range={_fmt(scan_range)} points={points}",
        config_digest=state.digest, outputs=(output,))
    rows = [tuple(rec[c] for c in columns) for rec in recs]
    _write_csv(Path(output), manifest, columns, rows)
    click.echo(f"wrote {output} ({len(rows)} rows)")


@cli.command()
@click.option("--modes", "modes_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Mode-profile file (default: the bundled synthetic set).")
@click.option("--position", nargs=2, type=float, default=(0.0, 0.0),
              show_default=True, metavar="X Y",
              help="Emitter position in the cross-section, um.")
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Also write the report to this file.")
@click.pass_obj
@_guarded
def collection(state: AppState, modes_path, position, output):
    """Waveguide-mode validation and collection-efficiency report."""
    profile = load_modes(modes_path) if modes_path else default_modes()
    gram = gram_matrix(profile)
    residual = float(np.max(np.abs(gram - np.eye(profile.n_modes))))
    lines = [
        f"modes: {profile.n_modes}",
        f"guided: {int(profile.guided.sum())}",
        f"n_eff_guided: " + ",".join(
            _fmt(v) for v in profile.n_eff[profile.guided]),
        f"normalization_residual: {_fmt(residual)}",
    ]
    for axis_name, axis in (("x", (1.0, 0.0, 0.0)), ("y", (0.0, 1.0, 0.0)),
                            ("z", (0.0, 0.0, 1.0))):
        eta = collection_efficiency(profile, position, axis)
        lines.append(f"eta_{axis_name}: {_fmt(eta)}")
    bx, by, bu = find_balanced_coupling(profile)
    lines += [
        f"balance_x_um: {_fmt(bx)}",
        f"balance_y_um: {_fmt(by)}",
        f"balance_u_per_um: {_fmt(bu)}",
    ]
    manifest = RunManifest(
        command=(f"collection position={_fmt(position[0])},{_fmt(position[1])} "
                 f"modes={'bundled' if modes_path is None else modes_path}"),
        config_digest=state.digest,
        outputs=(output,) if output else ())
    _write_report(Path(output) if output else None, manifest, lines)


def _emit_figure_data(state: AppState, out_dir: Path, n_traj: int,
                      points: int, seed: int) -> None:
    """Write the CSV set the figure renderer consumes."""
    out_dir.mkdir(parents=True, exist_ok=True)
    scheme, dipole = state.physics()
    a0 = state.a0_ratio
    nu_m = find_magic(scheme, dipole)
    nu_b = find_balance(scheme, dipole)

    def manifest(name: str) -> RunManifest:
        return RunManifest(
            command=f"emit-figure-data n={n_traj} points={points}",
            config_digest=state.digest, outputs=(name,), seed=seed)

    def emit(name: str, columns, rows) -> None:
        _write_csv(out_dir / name, manifest(name), columns, rows)
        click.echo(f"wrote {out_dir / name}")

    # amplitude and leakage sweeps (shared grid)
    lo = float(scheme.excited_ghz.min() - 3.0)
    hi = float(scheme.excited_ghz.max() + 3.0)
    data = sweep_amplitudes(scheme, dipole, lo, hi, 0.01, "x", a0)
    sweep_rows = list(zip(*(data[c] for c in SWEEP_COLUMNS)))
    emit("fig3_amplitudes.csv", SWEEP_COLUMNS, sweep_rows)
    emit("fig3_points.csv", ("name", "nu_ghz"),
         [("magic", nu_m), ("balance", nu_b)])
    emit("fig6_leakage.csv", SWEEP_COLUMNS, sweep_rows)

    # collection-efficiency studies on the idealized gate
    rows = []
    for eta in np.linspace(0.05, 1.0, 20):
        channels = build_channels("idealized", None, float(eta))
        res = run_ensemble(channels, "psi3", math.inf, n_traj, seed)
        rows.append((res.eta, res.mean_fidelity, res.stderr_fidelity,
                     res.success_probability))
    emit("fig7a_eta_sweep.csv", ("eta", "mean_F", "stderr_F", "P"), rows)

    channels = build_channels("idealized", None, 0.85)
    rows = []
    for window in np.linspace(0.1, 3.0, 30):
        res = run_ensemble(channels, "psi3", float(window), n_traj, seed)
        rows.append((res.window, res.mean_fidelity, res.stderr_fidelity,
                     res.success_probability))
    emit("fig7bc_window_sweep.csv", ("window", "mean_F", "stderr_F", "P"),
         rows)

    # per-level energy-shift scans (re-found magic point)
    shifts = np.linspace(-1.0, 1.0, points)
    level_cols = tuple(f"level_{i}" for i in range(1, 7))
    shift_recs = {
        lvl: [_shift_record(scheme, dipole, lvl, float(d), nu_m, a0)
              for d in shifts]
        for lvl in range(1, 7)
    }
    emit("fig9a_magic_shift.csv", ("shift_ghz",) + level_cols,
         [(d,) + tuple(shift_recs[lvl][k]["magic_shift_ghz"]
                       for lvl in range(1, 7))
          for k, d in enumerate(shifts)])
    emit("fig9b_m1_infidelity.csv", ("shift_ghz",) + level_cols,
         [(d,) + tuple(1.0 - shift_recs[lvl][k]["F_M1"]
                       for lvl in range(1, 7))
          for k, d in enumerate(shifts)])
    emit("fig9c_m2_infidelity.csv", ("shift_ghz",) + level_cols,
         [(d,) + tuple(1.0 - shift_recs[lvl][k]["F_M2"]
                       for lvl in range(1, 7))
          for k, d in enumerate(shifts)])

    # dipole-mismatch scans
    mm = [_mismatch_record(scheme, dipole, float(o), nu_m, a0)
          for o in np.linspace(0.5, 1.5, points)]
    emit("fig10a_mismatch_fidelity.csv", ("o_x", "F_M1", "F_M2", "F_M3"),
         [(r["o_x"], r["F_M1"], r["F_M2"], r["F_M3"]) for r in mm])
    emit("fig10b_mismatch_angle.csv", ("o_x", "angle_pres_deg"),
         [(r["o_x"], r["angle_pres_deg"]) for r in mm])

    # strain scans at the fixed nominal magic point
    strains = np.linspace(-1.0, 1.0, points)
    x_recs = [_strain_record(scheme, dipole, nu_m, "x", float(e), a0)
              for e in strains]
    y_recs = [_strain_record(scheme, dipole, nu_m, "y", float(e), a0)
              for e in strains]
    emit("fig11a_xstrain_fidelity.csv",
         ("strain_ghz", "F_M1", "F_M2", "F_M3"),
         [(r["strain_ghz"], r["F_M1"], r["F_M2"], r["F_M3"]) for r in x_recs])
    emit("fig11b_ystrain_fidelity.csv",
         ("strain_ghz", "F_M1", "F_M2", "F_M3"),
         [(r["strain_ghz"], r["F_M1"], r["F_M2"], r["F_M3"]) for r in y_recs])
    emit("fig11c_xstrain_amplitudes.csv",
         ("strain_ghz", "abs_Af2", "abs_Af3", "abs_Ap2", "abs_Ap3"),
         [(r["strain_ghz"], r["abs_flip_x"], _flip3_mag(scheme, dipole, nu_m,
                                                        "x", r["strain_ghz"],
                                                        a0),
           r["abs_pres_x"], _pres3_mag(scheme, dipole, nu_m, "x",
                                       r["strain_ghz"], a0))
          for r in x_recs])
    emit("fig11d_xstrain_diag.csv",
         ("strain_ghz", "angle_pres_deg", "angle_flip_deg",
          "abs_pres", "abs_flip"),
         [(r["strain_ghz"], r["angle_pres_deg"], r["angle_flip_deg"],
           r["abs_pres"], r["abs_flip"]) for r in x_recs])
    emit("fig11e_ystrain_xdrive.csv",
         ("strain_ghz", "angle_pres_deg", "angle_flip_deg",
          "abs_pres", "abs_flip"),
         [(r["strain_ghz"], r["angle_pres_x_deg"], r["angle_flip_x_deg"],
           r["abs_pres_x"], r["abs_flip_x"]) for r in y_recs])
    emit("fig11f_ystrain_diag.csv",
         ("strain_ghz", "angle_pres_deg", "angle_flip_deg",
          "abs_pres", "abs_flip"),
         [(r["strain_ghz"], r["angle_pres_deg"], r["angle_flip_deg"],
           r["abs_pres"], r["abs_flip"]) for r in y_recs])


def _flip3_mag(scheme, dipole, nu_m, axis, strength, a0):
    strained = apply_strain(scheme, axis, strength)
    tab = scatter_table(strained, dipole, nu_m, pol.NAMED_AXES["x"], a0)
    return float(np.linalg.norm(tab.flip(3)))


def _pres3_mag(scheme, dipole, nu_m, axis, strength, a0):
    strained = apply_strain(scheme, axis, strength)
    tab = scatter_table(strained, dipole, nu_m, pol.NAMED_AXES["x"], a0)
    return float(np.linalg.norm(tab.preserve(3)))


def main() -> None:
    cli(prog_name="nvgate")


if __name__ == "__main__":
    main()
