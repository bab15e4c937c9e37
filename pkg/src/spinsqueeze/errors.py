"""State-preparation and detection error models.

Two imperfections are modeled. First, each atom independently fails the
Rydberg excitation with probability eta; failed atoms sit out the dynamics
entirely and are imaged as spin up at readout. Second, the readout misreads
up as down with probability eps_up and down as up with probability eps_down.

The detection maps on the collective moments (exact for the mean, first
order in the flip probabilities for the variance) are

    <J>   = (N/2)(eps_down - eps_up) + (1 - eps_down - eps_up) <J~>
    Var(J) = (1 - 2 eps_down - 2 eps_up) Var(J~)
             + eps_down (N/2 - <J~>) + eps_up (N/2 + <J~>)

with tildes marking the error-free quantities; the inverse map produces the
"corrected" columns of the result tables.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeSpec
from .measurement import ShotSet

__all__ = [
    "ErrorModel",
    "HoleRealization",
    "apply_stirap_holes",
    "detection_forward_shots",
    "detection_forward_moments",
    "detection_inverse",
]


@dataclass(frozen=True)
class ErrorModel:
    eta: float = 0.02
    eps_up: float = 0.025
    eps_down: float = 0.010
    seed: int = 0
    analysis_bias_deg: float = 0.0  # fixed over/under-rotation of analysis pulses

    def __post_init__(self):
        for name in ("eta", "eps_up", "eps_down"):
            p = getattr(self, name)
            if not 0.0 <= p < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.eps_up + self.eps_down >= 0.5:
            raise ValueError("eps_up + eps_down must stay below 1/2")


@dataclass(frozen=True)
class HoleRealization:
    """One disorder draw of excitation failures.

    ``active_spec`` describes the atoms that interact (None when every atom
    failed); ``failed_sites`` are grid indices imaged as up regardless of the
    dynamics; ``n_imaged`` counts all assembled sites, failed or not.
    """

    active_spec: LatticeSpec | None
    failed_sites: tuple
    n_imaged: int

    @property
    def n_failed(self) -> int:
        return len(self.failed_sites)

    @property
    def n_active(self) -> int:
        return self.n_imaged - self.n_failed


def apply_stirap_holes(spec: LatticeSpec, em: ErrorModel,
                       rng: np.random.Generator | None = None) -> HoleRealization:
    """Mark each assembled atom as failed with probability eta."""
    if rng is None:
        rng = np.random.default_rng(em.seed)
    assembled = [s for s in range(spec.rows * spec.cols) if s not in spec.holes]
    failed = tuple(s for s in assembled if rng.random() < em.eta)
    if len(failed) == len(assembled):
        return HoleRealization(None, failed, len(assembled))
    active = LatticeSpec(
        rows=spec.rows,
        cols=spec.cols,
        spacing_um=spec.spacing_um,
        boundary=spec.boundary,
        holes=frozenset(spec.holes) | frozenset(failed),
    )
    return HoleRealization(active, failed, len(assembled))


def detection_forward_shots(shots: ShotSet, em: ErrorModel,
                            rng: np.random.Generator | None = None) -> ShotSet:
    """Flip each outcome with the state-dependent misread probability."""
    if rng is None:
        rng = np.random.default_rng(em.seed)
    out = shots.outcomes.copy()
    u = rng.random(out.shape)
    flip = np.where(out == 1, u < em.eps_up, u < em.eps_down)
    out[flip] *= -1
    return ShotSet(outcomes=out, theta=shots.theta, t_us=shots.t_us,
                   seed=shots.seed, basis=shots.basis)


def detection_forward_moments(mean_tilde: float, var_tilde: float,
                              mean_theta_tilde: float, n: int,
                              em: ErrorModel) -> tuple[float, float]:
    """Map error-free (mean, variance) to their detected values."""
    s = em.eps_down + em.eps_up
    mean = 0.5 * n * (em.eps_down - em.eps_up) + (1.0 - s) * mean_tilde
    var = (1.0 - 2.0 * s) * var_tilde \
        + em.eps_down * (0.5 * n - mean_theta_tilde) \
        + em.eps_up * (0.5 * n + mean_theta_tilde)
    return mean, var


def detection_inverse(mean: float, var: float, mean_theta: float, n: int,
                      em: ErrorModel, neglect_theta_mean: bool = False) -> tuple[float, float]:
    """Invert the detection map to recover error-free moments.

    ``neglect_theta_mean`` drops the <J_theta> contribution to the variance
    correction, appropriate when |<J_theta>| << N/2.
    """
    s = em.eps_down + em.eps_up
    denom = 1.0 - s
    vdenom = 1.0 - 2.0 * s
    if denom <= 0.0 or vdenom == 0.0:
        raise ValueError("detection map is not invertible for these probabilities")
    mean_tilde = (mean - 0.5 * n * (em.eps_down - em.eps_up)) / denom
    if neglect_theta_mean:
        mt_tilde = 0.0
    else:
        mt_tilde = (mean_theta - 0.5 * n * (em.eps_down - em.eps_up)) / denom
    var_tilde = (var - em.eps_down * (0.5 * n - mt_tilde)
                 - em.eps_up * (0.5 * n + mt_tilde)) / vdenom
    return mean_tilde, var_tilde
