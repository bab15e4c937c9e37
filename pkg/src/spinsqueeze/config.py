"""Run configuration: versioned YAML with explicit keys.

Example::

    version: 1
    seed: 7
    lattice: {rows: 4, cols: 4, spacing_um: 15.0, boundary: open, holes: []}
    j_mhz: 0.25
    time_grid: {start: 0.0, stop: 1.2, step: 0.05}
    shots: 200
    realizations: 1
    workers: 1
    error_model: {eta: 0.0, eps_up: 0.025, eps_down: 0.010, analysis_bias_deg: 0.0}
    krylov: {max_dim: 30, step_us: 0.01, tol: 1.0e-10}
    protocol: {kind: standard}

Protocols: ``standard`` (plain quench), ``multistep`` (keys ``t1_us`` and
``angle_deg`` or ``angle_deg: auto``), ``floquet`` (keys ``hold_us``,
``t_f_us``, ``cycles``, ``tail_us``), or ``custom`` with an explicit
``steps`` list, one entry per step::

    protocol:
      kind: custom
      steps:
        - {type: free, t_us: 0.3}
        - {type: pulse, phase_deg: 90.0, angle_deg: -25.0}
        - {type: free, t_us: 0.5}

Finite pulses add ``model: {rabi_mhz: 22.2, shape: square|gaussian,
half_width_ns: 6.5, interactions_on: true}`` to a pulse entry.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .engine import KrylovParams
from .errors import ErrorModel
from .lattice import LatticeError, LatticeSpec
from .protocols import FinitePulse, FreeEvolution, Pulse

__all__ = ["ConfigError", "RunConfig", "steps_from_config", "steps_to_config"]

KNOWN_VERSIONS = (1,)


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    version: int
    seed: int
    lattice: LatticeSpec
    j_mhz: float
    times: tuple
    shots: int = 0
    realizations: int = 1
    workers: int = 1
    error_model: ErrorModel = field(default_factory=lambda: ErrorModel(eta=0.0))
    krylov: KrylovParams = field(default_factory=KrylovParams)
    protocol: dict = field(default_factory=lambda: {"kind": "standard"})

    def __post_init__(self):
        if self.version not in KNOWN_VERSIONS:
            raise ConfigError(f"unsupported config version {self.version}")
        if self.shots < 0:
            raise ConfigError("shots must be non-negative")
        if self.realizations < 1:
            raise ConfigError("realizations must be at least 1")
        ts = tuple(float(t) for t in self.times)
        if not ts:
            raise ConfigError("empty time grid")
        if any(b < a for a, b in zip(ts, ts[1:])) or ts[0] < 0:
            raise ConfigError("time grid must be sorted and non-negative")
        object.__setattr__(self, "times", ts)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            lat = data.get("lattice", {})
            lattice = LatticeSpec(
                rows=int(lat["rows"]),
                cols=int(lat["cols"]),
                spacing_um=float(lat.get("spacing_um", 15.0)),
                boundary=lat.get("boundary", "open"),
                holes=frozenset(lat.get("holes", ())),
            )
            tg = data.get("time_grid")
            if isinstance(tg, dict):
                times = np.arange(float(tg["start"]),
                                  float(tg["stop"]) + 0.5 * float(tg["step"]),
                                  float(tg["step"]))
            elif tg is not None:
                times = [float(t) for t in tg]
            else:
                times = [float(t) for t in data["times"]]
            emd = data.get("error_model", {})
            em = ErrorModel(
                eta=float(emd.get("eta", 0.0)),
                eps_up=float(emd.get("eps_up", 0.0)),
                eps_down=float(emd.get("eps_down", 0.0)),
                seed=int(emd.get("seed", data.get("seed", 0))),
                analysis_bias_deg=float(emd.get("analysis_bias_deg", 0.0)),
            )
            kd = data.get("krylov", {})
            krylov = KrylovParams(
                max_dim=int(kd.get("max_dim", 30)),
                step_us=float(kd.get("step_us", 0.01)),
                tol=float(kd.get("tol", 1e-10)),
            )
            return cls(
                version=int(data.get("version", 1)),
                seed=int(data.get("seed", 0)),
                lattice=lattice,
                j_mhz=float(data.get("j_mhz", 0.25)),
                times=tuple(times),
                shots=int(data.get("shots", 0)),
                realizations=int(data.get("realizations", 1)),
                workers=int(data.get("workers", 1)),
                error_model=em,
                krylov=krylov,
                protocol=dict(data.get("protocol", {"kind": "standard"})),
            )
        except (KeyError, TypeError, ValueError, LatticeError) as err:
            if isinstance(err, ConfigError):
                raise
            raise ConfigError(f"bad configuration: {err}") from err

    @classmethod
    def from_yaml(cls, path) -> "RunConfig":
        with open(path) as f:
            data = yaml.safe_load(f)
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a mapping")
        return cls.from_dict(data)


def _pulse_from_entry(entry: dict, h) -> Pulse:
    finite = None
    model = entry.get("model")
    if isinstance(model, dict):
        finite = FinitePulse(
            rabi_mhz=float(model["rabi_mhz"]),
            shape=model.get("shape", "square"),
            half_width_ns=(float(model["half_width_ns"])
                           if model.get("half_width_ns") is not None else None),
            interactions_on=bool(model.get("interactions_on", True)),
        )
    return Pulse(
        phase_rad=np.deg2rad(float(entry.get("phase_deg", 0.0))),
        angle_rad=np.deg2rad(float(entry["angle_deg"])),
        finite=finite,
        h=h if finite is not None and finite.interactions_on else None,
    )


def steps_from_config(entries, h) -> tuple:
    """Materialize a ``custom`` protocol step list against a Hamiltonian."""
    steps = []
    for entry in entries:
        kind = entry.get("type")
        if kind == "free":
            steps.append(FreeEvolution(h, float(entry["t_us"])))
        elif kind == "pulse":
            steps.append(_pulse_from_entry(entry, h))
        else:
            raise ConfigError(f"unknown step type {kind!r}")
    return tuple(steps)


def steps_to_config(steps) -> list:
    """Serialize schedule steps back to the configuration form."""
    out = []
    for step in steps:
        if isinstance(step, FreeEvolution):
            out.append({"type": "free", "t_us": float(step.t_us)})
        elif isinstance(step, Pulse):
            entry = {
                "type": "pulse",
                "phase_deg": float(np.rad2deg(step.phase_rad)),
                "angle_deg": float(np.rad2deg(step.angle_rad)),
            }
            if step.finite is not None:
                entry["model"] = {
                    "rabi_mhz": step.finite.rabi_mhz,
                    "shape": step.finite.shape,
                    "half_width_ns": step.finite.half_width_ns,
                    "interactions_on": step.finite.interactions_on,
                }
            out.append(entry)
        else:
            raise ConfigError(f"cannot serialize step {type(step).__name__}")
    return out
