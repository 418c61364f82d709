"""Conditioned two-NV dynamics: jump channels, trajectories, oracles.

The pair scatters photons continuously while the drive is on. Detected
photons herald the gate; photons that miss the detector (finite collection
efficiency eta) or are blocked by the analyzer still happen and decohere the
pair. Everything is expressed in "mean flip rate" time units: one unit of
time is 1/Gamma_bar_f with Gamma_bar_f = (|A_f2|^2 + |A_f3|^2)/2 in physical
units, so the jump operators below are dimensionless.

The Monte Carlo unraveling is the standard one: between jumps the state
evolves as exp(-Q t) with Q = (1/2) sum_k C_k^dag C_k (there is no coherent
Hamiltonian in the rotating frame; the qubit states are degenerate), jump
times come from inverting the survival probability, and the jump channel is
drawn proportionally to ||C_k psi||^2. Each trajectory owns a counter-based
RNG stream keyed by (seed, trajectory index), so results are bit-for-bit
reproducible regardless of how an ensemble is batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import polarization as pol
from .gates import SCHEME_OPTICS, collective_op, scheme_target
from .scattering import AmplitudeSet

MAX_JUMPS = 200_000


@dataclass(frozen=True)
class JumpChannel:
    """One collapse operator of the conditioned master equation."""

    op: np.ndarray
    detected: bool
    label: str


@dataclass(frozen=True)
class ChannelSet:
    """All jump channels of a scheme at a given collection efficiency."""

    channels: tuple
    scheme: str
    eta: float
    gamma_bar_f: float  # mean flip rate in units of A0^2
    dim: int
    target: np.ndarray

    def operators(self):
        return [ch.op for ch in self.channels]


def _embed_qutrit(t2: np.ndarray) -> np.ndarray:
    t3 = np.zeros((3, 3), dtype=complex)
    t3[1:, 1:] = t2
    return t3


def build_channels(
    scheme: str,
    amps: AmplitudeSet,
    eta: float,
    include_leakage: bool = False,
    detector: str = "right",
) -> ChannelSet:
    """Jump channels for one gate scheme.

    Channels:
      * detected: analyzer-passed photon reaching the detector, weight eta
      * missed: analyzer-passed photon lost in the collection path, 1 - eta
      * blocked: analyzer-rejected photon (always lost)
      * leak_pass / leak_block (only with include_leakage): Raman photons
        that shelve an NV in g1; spectrally filtered, never detected. The
        state space grows to two qutrits.

    For the "idealized" scheme the flip transform is replaced by the exact
    symmetric pattern T = X (unit amplitude) with no preserving emission:
    the textbook limit used for collection-efficiency studies.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")

    if scheme == "idealized":
        t_pass = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        t_block = np.zeros((2, 2), dtype=complex)
        leak = np.zeros(2, dtype=complex)
        gamma_bar = 1.0
        target = scheme_target("B1", detector)
    else:
        drive_name, analyzer_name = SCHEME_OPTICS[scheme]
        drive = pol.NAMED_AXES[drive_name]
        analyzer = pol.NAMED_AXES[analyzer_name]
        table = pol.scattered_states(amps, drive)
        t_pass = pol.conditional_transform(table, analyzer)
        t_block = pol.conditional_transform(table, pol.orthogonal(analyzer))
        leak = pol.leakage_transform(table, analyzer)
        leak_b = pol.leakage_transform(table, pol.orthogonal(analyzer))
        af2, af3 = amps.flip_pair("x")
        gamma_bar = 0.5 * (abs(af2) ** 2 + abs(af3) ** 2)
        target = scheme_target(scheme, detector)

    scale = 1.0 / math.sqrt(gamma_bar)
    t_pass = t_pass * scale
    t_block = t_block * scale

    channels = []
    if include_leakage:
        if scheme == "idealized":
            raise ValueError("leakage channels need a physical scheme")
        tp = _embed_qutrit(t_pass)
        tb = _embed_qutrit(t_block)
        tl_pass = np.zeros((3, 3), dtype=complex)
        tl_pass[0, 1:] = leak * scale
        tl_block = np.zeros((3, 3), dtype=complex)
        tl_block[0, 1:] = leak_b * scale
        dim = 9
        make = lambda t: collective_op(t, detector)
        if eta > 0:
            channels.append(JumpChannel(math.sqrt(eta) * make(tp), True, "detected"))
        if eta < 1:
            channels.append(JumpChannel(math.sqrt(1 - eta) * make(tp), False, "missed"))
        channels.append(JumpChannel(make(tb), False, "blocked"))
        channels.append(JumpChannel(make(tl_pass), False, "leak_pass"))
        channels.append(JumpChannel(make(tl_block), False, "leak_block"))
        target_full = np.zeros((9, 9), dtype=complex)
        idx = _qubit_indices_in_qutrit_pair()
        target_full[np.ix_(idx, idx)] = target
        target = target_full
    else:
        dim = 4
        l_pass = collective_op(t_pass, detector)
        l_block = collective_op(t_block, detector)
        if eta > 0:
            channels.append(JumpChannel(math.sqrt(eta) * l_pass, True, "detected"))
        if eta < 1:
            channels.append(JumpChannel(math.sqrt(1 - eta) * l_pass, False, "missed"))
        if np.any(np.abs(l_block) > 1e-15):
            channels.append(JumpChannel(l_block, False, "blocked"))

    return ChannelSet(channels=tuple(channels), scheme=scheme, eta=eta,
                      gamma_bar_f=gamma_bar, dim=dim, target=target)


def _qubit_indices_in_qutrit_pair():
    """Positions of the qubit-pair basis inside the two-qutrit basis."""
    # qutrit order (g1, g2, g3) per NV; qubit order (g2, g3)
    idx = []
    for a in (1, 2):
        for b in (1, 2):
            idx.append(3 * a + b)
    return idx


def input_state(name: str, dim: int = 4) -> np.ndarray:
    """Canonical two-qubit input states.

    psi1 = |g2 g2>, psi2 = |g2 g3>, psi3 = (|g2 g2> + i |g3 g3>)/sqrt(2).
    """
    base = {
        "psi1": np.array([1, 0, 0, 0], dtype=complex),
        "psi2": np.array([0, 1, 0, 0], dtype=complex),
        "psi3": np.array([1, 0, 0, 1j], dtype=complex) / math.sqrt(2.0),
    }
    if name not in base:
        raise ValueError(f"unknown input state {name!r}")
    psi = base[name]
    if dim == 4:
        return psi
    if dim == 9:
        full = np.zeros(9, dtype=complex)
        full[_qubit_indices_in_qutrit_pair()] = psi
        return full
    raise ValueError(f"dim must be 4 or 9, got {dim}")


class _NoJumpPropagator:
    """Eigen-decomposed no-jump generator for fast survival evaluations."""

    def __init__(self, channels: ChannelSet):
        q = np.zeros((channels.dim, channels.dim), dtype=complex)
        for ch in channels.channels:
            q += 0.5 * ch.op.conj().T @ ch.op
        vals, vecs = np.linalg.eigh(q)
        self.rates = np.clip(vals.real, 0.0, None)
        self.vecs = vecs

    def weights(self, psi: np.ndarray) -> np.ndarray:
        amp = self.vecs.conj().T @ psi
        return np.abs(amp) ** 2, amp

    def survival(self, weights: np.ndarray, t: float) -> float:
        return float(weights @ np.exp(-2.0 * self.rates * t))

    def evolve(self, amp_eig: np.ndarray, t: float) -> np.ndarray:
        return self.vecs @ (np.exp(-self.rates * t) * amp_eig)

    def sample_jump_time(self, weights: np.ndarray, u: float) -> float:
        """Solve sum_i w_i exp(-2 q_i t) = u for t (u in (0, 1))."""
        w = weights
        r = self.rates
        mean_rate = float(w @ r)
        if mean_rate <= 0:
            return math.inf
        t = -math.log(u) / (2.0 * mean_rate)
        hi = t
        while self.survival(w, hi) > u:
            hi *= 2.0
            if hi > 1e18:
                return math.inf
        lo = 0.0
        for _ in range(200):
            s = self.survival(w, t)
            if s > u:
                lo = t
            else:
                hi = t
            ds = -2.0 * float((w * r) @ np.exp(-2.0 * r * t))
            step_ok = ds < 0
            if step_ok:
                t_new = t - (s - u) / ds
                if not (lo < t_new < hi):
                    t_new = 0.5 * (lo + hi)
            else:
                t_new = 0.5 * (lo + hi)
            if abs(t_new - t) <= 1e-13 * max(1.0, abs(t)):
                return t_new
            t = t_new
        return t


@dataclass
class TrajectoryResult:
    detected: bool
    t_click: float
    n_lost: int
    fidelity: float


def run_trajectory(
    channels: ChannelSet,
    psi0: np.ndarray,
    window: float,
    rng: np.random.Generator,
    propagator: _NoJumpPropagator | None = None,
    target_state: np.ndarray | None = None,
) -> TrajectoryResult:
    """One conditioned trajectory, ending at the first detector click.

    ``window`` is the heralding window in mean-flip-rate time units
    (math.inf waits forever). Uniform draws are consumed strictly in
    (jump-time, channel) order so a trajectory is a pure function of its
    RNG stream.
    """
    prop = propagator or _NoJumpPropagator(channels)
    if target_state is None:
        target_state = channels.target @ psi0
        target_state = target_state / np.linalg.norm(target_state)
    ops = [ch.op for ch in channels.channels]
    detected_flags = [ch.detected for ch in channels.channels]

    psi = np.asarray(psi0, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    t = 0.0
    n_lost = 0
    for _ in range(MAX_JUMPS):
        weights, amp_eig = prop.weights(psi)
        u = rng.random()
        if u <= 0.0:
            u = np.nextafter(0.0, 1.0)
        tau = prop.sample_jump_time(weights, u)
        if t + tau > window:
            return TrajectoryResult(False, math.nan, n_lost, math.nan)
        t += tau
        psi = prop.evolve(amp_eig, tau)
        psi = psi / np.linalg.norm(psi)
        jumped = [op @ psi for op in ops]
        rates = np.array([float(np.vdot(v, v).real) for v in jumped])
        total = rates.sum()
        if total <= 0:
            return TrajectoryResult(False, math.nan, n_lost, math.nan)
        u2 = rng.random()
        k = int(np.searchsorted(np.cumsum(rates / total), u2, side="right"))
        k = min(k, len(ops) - 1)
        psi = jumped[k] / math.sqrt(rates[k])
        if detected_flags[k]:
            fid = float(abs(np.vdot(target_state, psi)) ** 2)
            return TrajectoryResult(True, t, n_lost, fid)
        n_lost += 1
    raise RuntimeError(f"no detection after {MAX_JUMPS} jumps")


@dataclass(frozen=True)
class EnsembleResult:
    scheme: str
    input_name: str
    eta: float
    window: float
    n_traj: int
    n_success: int
    mean_fidelity: float
    stderr_fidelity: float
    success_probability: float
    mean_lost_jumps: float
    seed: int


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based per-trajectory stream; independent of batch layout."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def run_ensemble(
    channels: ChannelSet,
    input_name: str,
    window: float,
    n_traj: int,
    seed: int,
) -> EnsembleResult:
    """Monte Carlo ensemble; identical seeds give identical results."""
    if n_traj <= 0:
        raise ValueError("n_traj must be positive")
    prop = _NoJumpPropagator(channels)
    psi0 = input_state(input_name, channels.dim)
    target_state = channels.target @ psi0
    nrm = np.linalg.norm(target_state)
    if nrm < 1e-12:
        raise ValueError(f"target gate annihilates input {input_name!r}")
    target_state = target_state / nrm

    fids = []
    lost = []
    for i in range(n_traj):
        rng = trajectory_rng(seed, i)
        res = run_trajectory(channels, psi0, window, rng, prop, target_state)
        if res.detected:
            fids.append(res.fidelity)
            lost.append(res.n_lost)
    n_success = len(fids)
    if n_success:
        arr = np.array(fids)
        mean = float(arr.mean())
        stderr = float(arr.std(ddof=1) / math.sqrt(n_success)) if n_success > 1 else math.inf
        mean_lost = float(np.mean(lost))
    else:
        mean = math.nan
        stderr = math.nan
        mean_lost = math.nan
    return EnsembleResult(
        scheme=channels.scheme, input_name=input_name, eta=channels.eta,
        window=window, n_traj=n_traj, n_success=n_success,
        mean_fidelity=mean, stderr_fidelity=stderr,
        success_probability=n_success / n_traj,
        mean_lost_jumps=mean_lost, seed=seed,
    )


def oracle_conditional_fidelity(
    channels: ChannelSet,
    input_name: str,
    max_lost_jumps: int = 10_000,
    tail_tol: float = 1e-12,
) -> float:
    """Deterministic click-conditioned fidelity (infinite window).

    Sums the exact jump expansion: the density matrix is propagated through
    "integrate the no-jump flow, then one lost jump" k times, and the
    detected branch is collected after each k. Truncation stops when the
    not-yet-detected weight drops below ``tail_tol``.
    """
    prop = _NoJumpPropagator(channels)
    v = prop.vecs
    rates = prop.rates
    denom = rates[:, None] + rates[None, :]
    if np.min(denom) <= 0:
        raise ValueError("no-jump generator has a dark state; oracle diverges")

    def resolvent(rho):
        r = v.conj().T @ rho @ v
        return v @ (r / denom) @ v.conj().T

    lost_ops = [ch.op for ch in channels.channels if not ch.detected]
    det_ops = [ch.op for ch in channels.channels if ch.detected]
    if not det_ops:
        raise ValueError("channel set has no detected channel (eta = 0?)")
    psi0 = input_state(input_name, channels.dim)
    target = channels.target @ psi0
    nrm = np.linalg.norm(target)
    if nrm < 1e-12:
        raise ValueError(f"target gate annihilates input {input_name!r}")
    target = target / nrm

    rho = np.outer(psi0, psi0.conj())
    fid_sum = 0.0
    weight_sum = 0.0
    for _ in range(max_lost_jumps + 1):
        smoothed = resolvent(rho)
        for op in det_ops:
            branch = op @ smoothed @ op.conj().T
            w = float(np.trace(branch).real)
            weight_sum += w
            fid_sum += float(np.vdot(target, branch @ target).real)
        rho = sum((op @ smoothed @ op.conj().T for op in lost_ops),
                  start=np.zeros_like(smoothed))
        tail = float(np.trace(rho).real)
        if tail < tail_tol:
            break
    else:
        raise RuntimeError(
            f"tail {tail:.2e} above {tail_tol} after {max_lost_jumps} lost jumps")
    return fid_sum / weight_sum


def liouvillian_matrix(channels: ChannelSet) -> np.ndarray:
    """Unconditioned Lindblad generator as a dim^2 x dim^2 matrix."""
    d = channels.dim
    ident = np.eye(d)
    l_mat = np.zeros((d * d, d * d), dtype=complex)
    for ch in channels.channels:
        c = ch.op
        cc = c.conj().T @ c
        l_mat += np.kron(c, c.conj())
        l_mat -= 0.5 * np.kron(cc, ident)
        l_mat -= 0.5 * np.kron(ident, cc.T)
    return l_mat


def lindblad_evolve(
    channels: ChannelSet,
    rho0: np.ndarray,
    t_final: float,
    dt: float = 1e-3,
) -> np.ndarray:
    """Fixed-step RK4 integration of the unconditioned master equation."""
    ops = channels.operators()
    q2 = sum(op.conj().T @ op for op in ops)

    def rhs(rho):
        out = -0.5 * (q2 @ rho + rho @ q2)
        for op in ops:
            out += op @ rho @ op.conj().T
        return out

    steps = max(int(math.ceil(t_final / dt)), 1)
    h = t_final / steps
    rho = np.asarray(rho0, dtype=complex).copy()
    for _ in range(steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def steady_state(channels: ChannelSet) -> np.ndarray:
    """Null vector of the Liouvillian, normalized to unit trace."""
    l_mat = liouvillian_matrix(channels)
    vals, vecs = np.linalg.eig(l_mat)
    k = int(np.argmin(np.abs(vals)))
    if abs(vals[k]) > 1e-8:
        raise RuntimeError(f"no steady state found (smallest |eig| {abs(vals[k]):.2e})")
    d = channels.dim
    rho = vecs[:, k].reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real
