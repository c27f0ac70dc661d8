"""Piecewise-constant control simulation with exact segment propagators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qsysid.operators import expm_hermitian_prop, is_density
from qsysid.system import QuantumSystem


@dataclass(frozen=True)
class ControlSchedule:
    """Ordered ``(duration, amplitudes)`` segments of the control inputs."""

    segments: tuple[tuple[float, tuple[float, ...]], ...] = ()

    def __post_init__(self):
        segs = []
        for j, seg in enumerate(self.segments):
            dt, amps = seg
            dt = float(dt)
            if not dt > 0 or not np.isfinite(dt):
                raise ValueError(f"segments[{j}]: duration must be positive, got {dt}")
            segs.append((dt, tuple(float(a) for a in amps)))
        object.__setattr__(self, "segments", tuple(segs))

    @property
    def total_duration(self) -> float:
        return float(sum(dt for dt, _ in self.segments))

    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([dt for dt, _ in self.segments])])

    def check_compatible(self, system: QuantumSystem) -> None:
        for j, (_, amps) in enumerate(self.segments):
            if len(amps) != system.n_controls:
                raise ValueError(
                    f"segments[{j}]: {len(amps)} amplitudes for {system.n_controls} controls"
                )


def random_schedule(
    n_controls: int,
    rng: np.random.Generator,
    n_segments: int = 8,
    total_time: float = 1.0,
    amplitude: float = 2.0,
) -> ControlSchedule:
    """Equal-length segments with amplitudes uniform in ``[-amplitude, amplitude]``."""
    dt = total_time / n_segments
    return ControlSchedule(
        tuple((dt, tuple(rng.uniform(-amplitude, amplitude, n_controls))) for _ in range(n_segments))
    )


def segment_hamiltonian(system: QuantumSystem, amplitudes) -> np.ndarray:
    H = system.drift.copy()
    for f, Hk in zip(amplitudes, system.controls):
        H = H + f * Hk
    return H


def propagate(system: QuantumSystem, schedule: ControlSchedule, check: bool = True) -> np.ndarray:
    """Final state after the whole schedule, segment by segment."""
    schedule.check_compatible(system)
    rho = system.initial_state
    for dt, amps in schedule.segments:
        V = expm_hermitian_prop(segment_hamiltonian(system, amps), dt)
        rho = V @ rho @ V.conj().T
    if check and not is_density(rho, 1e-8):
        raise FloatingPointError("propagated state is no longer a density matrix")
    return rho


@dataclass(frozen=True)
class ExpectationRecord:
    """``values[l, j]`` is ``tr{M_l rho(times[j])}``."""

    times: np.ndarray
    values: np.ndarray


def record(
    system: QuantumSystem,
    schedule: ControlSchedule,
    sample_times,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
) -> ExpectationRecord:
    """Expectation values of every observable at ``sample_times``.

    Samples inside a segment are evaluated in that segment's eigenbasis, so
    no interpolation or time stepping is involved.  ``noise_std`` adds
    Gaussian noise to the outputs; it is an extension for robustness tests
    and defaults to exact values.
    """
    schedule.check_compatible(system)
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1:
        raise ValueError("sample_times must be one-dimensional")
    if times.size and (np.any(np.diff(times) < 0)):
        raise ValueError("sample_times must be nondecreasing")
    total = schedule.total_duration
    eps = 1e-12 * max(total, 1.0)
    if times.size and (times[0] < 0 or times[-1] > total + eps):
        raise ValueError(f"sample times must lie in [0, {total}]")

    obs = np.array(system.observables)
    values = np.empty((len(obs), times.size))
    rho = system.initial_state
    t0 = 0.0
    j = 0
    while j < times.size and times[j] <= eps and not schedule.segments:
        values[:, j] = np.real(np.einsum("lij,ji->l", obs, rho))
        j += 1
    for dt, amps in schedule.segments:
        t1 = t0 + dt
        H = segment_hamiltonian(system, amps)
        w, W = np.linalg.eigh(H)
        rt = W.conj().T @ rho @ W
        j_end = j
        while j_end < times.size and times[j_end] <= t1 + eps:
            j_end += 1
        if j_end > j:
            tau = times[j:j_end] - t0
            mt = W.conj().T @ obs @ W
            phase = np.exp(-1j * np.subtract.outer(w, w)[None, :, :] * tau[:, None, None])
            # tr(M~ (phase * rho~)) = sum_ij M~_ji rho~_ij phase_ij
            vals = np.einsum("lji,tij->lt", mt, phase * rt[None, :, :])
            values[:, j:j_end] = vals.real
            j = j_end
        V = (W * np.exp(-1j * w * dt)) @ W.conj().T
        rho = V @ rho @ V.conj().T
        t0 = t1
    if noise_std > 0:
        rng = np.random.default_rng() if rng is None else rng
        values = values + rng.normal(scale=noise_std, size=values.shape)
    return ExpectationRecord(times=times, values=values)


def state_at(system: QuantumSystem, schedule: ControlSchedule, t: float) -> np.ndarray:
    """State at time ``t`` (exact, splitting the segment that contains ``t``)."""
    rho = system.initial_state
    t0 = 0.0
    for dt, amps in schedule.segments:
        if t <= t0:
            break
        step = min(dt, t - t0)
        V = expm_hermitian_prop(segment_hamiltonian(system, amps), step)
        rho = V @ rho @ V.conj().T
        t0 += dt
    return rho


def expectation_derivative(system: QuantumSystem, schedule: ControlSchedule, t: float) -> np.ndarray:
    """``tr{M_l L(t) rho(t)}`` for every observable, at a time inside a segment."""
    bounds = schedule.boundaries()
    seg = int(np.searchsorted(bounds, t, side="right")) - 1
    seg = min(max(seg, 0), len(schedule.segments) - 1)
    H = segment_hamiltonian(system, schedule.segments[seg][1])
    rho = state_at(system, schedule, t)
    drho = -1j * (H @ rho - rho @ H)
    return np.array([np.real(np.trace(M @ drho)) for M in system.observables])
