"""Pulse sequences: state preparation, rotations, free evolution, Floquet cycles.

A schedule is an ordered list of steps, each either a microwave pulse or a
free-evolution segment under some Hamiltonian. Pulses rotate about an axis in
the equatorial plane set by their phase (0 -> +x, pi/2 -> +y, pi -> -x,
-pi/2 -> -y) and are either instantaneous rotations or finite-duration drives
with a square or Gaussian Rabi envelope, optionally with the interactions
left on during the drive.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import pi

import numpy as np

from . import engine
from .engine import KrylovParams
from .operators import (
    Hamiltonian,
    apply_global_rotation,
    apply_jx,
    apply_jy,
    heisenberg_hamiltonian,
)

__all__ = [
    "ScheduleError",
    "FinitePulse",
    "Pulse",
    "FreeEvolution",
    "ProtocolSchedule",
    "DrivenHamiltonian",
    "prepare_coherent_y",
    "apply_pulse",
    "run_schedule",
    "wahuha_cycle",
    "wahuha_average_hamiltonian",
]

GAUSSIAN_TRUNCATION_SIGMAS = 4.0
GAUSSIAN_SUBSTEPS = 32


class ScheduleError(ValueError):
    """Ill-formed pulse schedule or checkpoint request."""


@dataclass(frozen=True)
class FinitePulse:
    """Finite-duration drive model.

    ``rabi_mhz`` is the peak Rabi frequency (MHz, E/h convention, so a square
    pulse of duration T accumulates rotation angle 2 pi Omega T).
    ``half_width_ns`` is the Gaussian envelope half-width at 1/sqrt(e).
    """

    rabi_mhz: float
    shape: str = "square"
    half_width_ns: float | None = None
    interactions_on: bool = True

    def __post_init__(self):
        if not self.rabi_mhz > 0:
            raise ScheduleError("rabi_mhz must be positive")
        if self.shape not in ("square", "gaussian"):
            raise ScheduleError(f"unknown pulse shape {self.shape!r}")
        if self.shape == "gaussian" and not (self.half_width_ns and self.half_width_ns > 0):
            raise ScheduleError("gaussian pulses need a positive half_width_ns")


@dataclass(frozen=True)
class Pulse:
    """Global rotation by ``angle_rad`` about the axis at azimuth ``phase_rad``."""

    phase_rad: float
    angle_rad: float
    finite: FinitePulse | None = None
    h: Hamiltonian | None = None  # interactions during a finite pulse

    def __post_init__(self):
        if not np.isfinite(self.angle_rad):
            raise ScheduleError("pulse angle must be finite")

    @property
    def duration_us(self) -> float:
        if self.finite is None:
            return 0.0
        if self.finite.shape == "square":
            return abs(self.angle_rad) / (2.0 * pi * self.finite.rabi_mhz)
        sigma_us = self.finite.half_width_ns * 1e-3
        return 2.0 * GAUSSIAN_TRUNCATION_SIGMAS * sigma_us


@dataclass(frozen=True)
class FreeEvolution:
    h: Hamiltonian
    t_us: float

    def __post_init__(self):
        if self.t_us < 0:
            raise ScheduleError("free evolution time must be non-negative")


Step = Pulse | FreeEvolution


@dataclass(frozen=True)
class ProtocolSchedule:
    steps: tuple
    readout: Pulse | None = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def duration_us(self) -> float:
        return sum(
            s.t_us if isinstance(s, FreeEvolution) else s.duration_us for s in self.steps
        )


class DrivenHamiltonian:
    """Interaction Hamiltonian plus a resonant drive of fixed amplitude.

    H_drive = Omega (cos(phase) Jx + sin(phase) Jy), i.e. (Omega/2) per spin,
    so the rotation rate in the rotating frame is 2 pi Omega.
    """

    def __init__(self, base: Hamiltonian | None, phase_rad: float, omega_mhz: float, n: int):
        if base is not None and base.n != n:
            raise ScheduleError("drive and interaction act on different sizes")
        self.base = base
        self.n = n
        self._cx = omega_mhz * np.cos(phase_rad)
        self._cy = omega_mhz * np.sin(phase_rad)

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = self.base.apply(v) if self.base is not None else np.zeros_like(v, dtype=complex)
        if self._cx:
            out += self._cx * apply_jx(v, self.n)
        if self._cy:
            out += self._cy * apply_jy(v, self.n)
        return out


def prepare_coherent_y(n: int) -> np.ndarray:
    """Product state with every spin along +y: (|up> + i |down>)/sqrt(2).

    Equivalent to rotating the all-up state by -pi/2 about x; <Jy> = N/2 and
    the transverse variances equal N/4.
    """
    if n < 1:
        raise ValueError("need at least one spin")
    single = np.array([1j, 1.0], dtype=complex) / np.sqrt(2.0)  # (down, up) slots
    return reduce(np.kron, [single] * n)


def _pulse_segments(p: Pulse, n: int):
    """Expand a pulse into (duration, operator) atoms; instantaneous -> rotation."""
    if p.finite is None:
        return [("rot", 0.0, (p.phase_rad, p.angle_rad))]
    base = p.h if p.finite.interactions_on else None
    if p.finite.interactions_on and p.h is None:
        raise ScheduleError("finite pulse with interactions_on requires a Hamiltonian")
    sign = 1.0 if p.angle_rad >= 0 else -1.0
    if p.finite.shape == "square":
        duration = p.duration_us
        omega = sign * p.finite.rabi_mhz
        return [("drive", duration, DrivenHamiltonian(base, p.phase_rad, omega, n))]
    # Gaussian: midpoint-sampled piecewise-constant envelope, rescaled so the
    # discrete pulse area matches the requested angle exactly
    sigma_us = p.finite.half_width_ns * 1e-3
    duration = 2.0 * GAUSSIAN_TRUNCATION_SIGMAS * sigma_us
    dt = duration / GAUSSIAN_SUBSTEPS
    t_mid = (np.arange(GAUSSIAN_SUBSTEPS) + 0.5) * dt - 0.5 * duration
    envelope = np.exp(-0.5 * (t_mid / sigma_us) ** 2)
    scale = abs(p.angle_rad) / (2.0 * pi * envelope.sum() * dt)
    omegas = sign * scale * envelope
    return [("drive", dt, DrivenHamiltonian(base, p.phase_rad, om, n)) for om in omegas]


def _expand_steps(steps, n: int):
    atoms = []
    for step in steps:
        if isinstance(step, FreeEvolution):
            atoms.append(("free", step.t_us, step.h))
        elif isinstance(step, Pulse):
            atoms.extend(_pulse_segments(step, n))
        else:
            raise ScheduleError(f"unknown step type {type(step).__name__}")
    return atoms


def apply_pulse(p: Pulse, v: np.ndarray, h: Hamiltonian | None = None,
                params: KrylovParams | None = None) -> np.ndarray:
    """Apply a single pulse to a state.

    ``h`` supplies the interactions for finite pulses with interactions_on
    when the pulse itself carries none.
    """
    n = int(round(np.log2(np.asarray(v).size)))
    if p.finite is not None and p.h is None and h is not None:
        p = Pulse(p.phase_rad, p.angle_rad, p.finite, h)
    state = np.asarray(v, dtype=complex)
    for kind, dt, payload in _pulse_segments(p, n):
        if kind == "rot":
            state = apply_global_rotation(state, *payload)
        else:
            state = engine.evolve(payload, state, dt, params)
    return state


def run_schedule(schedule: ProtocolSchedule, v0: np.ndarray, checkpoints,
                 params: KrylovParams | None = None) -> list[np.ndarray]:
    """Execute a schedule and return the state at each checkpoint time.

    Checkpoints must be sorted and lie within the total duration. Zero
    duration pulses scheduled at a checkpoint time are applied before the
    state is recorded; free segments are split as needed. The readout
    rotation, when present, is not part of the timed sequence.
    """
    eps = 1e-9
    cps = list(checkpoints)
    if any(cps[k] > cps[k + 1] for k in range(len(cps) - 1)):
        raise ScheduleError("checkpoints must be sorted")
    if cps and cps[0] < -eps:
        raise ScheduleError("negative checkpoint")
    v = np.asarray(v0, dtype=complex)
    n = int(round(np.log2(v.size)))
    atoms = _expand_steps(schedule.steps, n)
    total = sum(dt for _, dt, _ in atoms)
    if cps and cps[-1] > total + eps:
        raise ScheduleError(f"checkpoint {cps[-1]} beyond schedule end {total}")

    results: list[np.ndarray] = []
    t = 0.0
    ci = 0

    def flush(now: float):
        nonlocal ci
        while ci < len(cps) and cps[ci] <= now + eps:
            results.append(v.copy())
            ci += 1

    for kind, dt, payload in atoms:
        if kind == "rot":
            v = apply_global_rotation(v, *payload)
            continue
        flush(t)
        seg_end = t + dt
        while ci < len(cps) and cps[ci] < seg_end - eps:
            sub = cps[ci] - t
            if sub > eps:
                v = engine.evolve(payload, v, sub, params)
                t = cps[ci]
            results.append(v.copy())
            ci += 1
        if seg_end - t > eps:
            v = engine.evolve(payload, v, seg_end - t, params)
        t = seg_end
    flush(total)
    if ci < len(cps):
        raise ScheduleError("unreached checkpoints remain")
    return results


def wahuha_cycle(h: Hamiltonian, t_f_us: float, pulse: FinitePulse | None = None) -> tuple:
    """One Floquet cycle of four pi/2 pulses about (x, y, -y, -x).

    Free-evolution intervals follow the symmetric pattern
    (tau, tau, 2 tau, tau, tau) with tau = t_F / 6, which weights the three
    toggled-frame orientations of the coupling equally, cancels the
    first-order average-Hamiltonian correction, and isotropizes the xy
    exchange into a Heisenberg coupling. Finite pulses are centered on the
    instants of their instantaneous counterparts and their durations are
    taken out of the adjacent delays.
    """
    if not t_f_us > 0:
        raise ScheduleError("cycle duration must be positive")
    tau = t_f_us / 6.0
    phases = (0.0, 0.5 * pi, -0.5 * pi, pi)
    if pulse is None:
        delays = (tau, tau, 2.0 * tau, tau, tau)
        pulses = [Pulse(ph, 0.5 * pi) for ph in phases]
    else:
        probe = Pulse(0.0, 0.5 * pi, pulse, h)
        dur = probe.duration_us
        delays = (tau - 0.5 * dur, tau - dur, 2.0 * tau - dur, tau - dur, tau - 0.5 * dur)
        if min(delays) < -1e-12:
            raise ScheduleError("pulse durations exceed the Floquet cycle")
        delays = tuple(max(d, 0.0) for d in delays)
        pulses = [Pulse(ph, 0.5 * pi, pulse, h) for ph in phases]
    steps: list[Step] = []
    for k, delay in enumerate(delays):
        if delay > 0.0:
            steps.append(FreeEvolution(h, delay))
        if k < 4:
            steps.append(pulses[k])
    return tuple(steps)


def wahuha_average_hamiltonian(h_xy: Hamiltonian) -> Hamiltonian:
    """Cycle-averaged interaction engineered by the four-pulse sequence.

    Equal time in the three toggled frames turns the xy exchange J into an
    isotropic Heisenberg coupling of effective exchange J/2 (each of the
    three Pauli products carries 2/3 of the original pair weight).
    """
    if h_xy.kind != "xy":
        raise ScheduleError("cycle averaging is defined for the xy model")
    return heisenberg_hamiltonian(h_xy.coupling, 0.5 * h_xy.j_mhz)
