"""Square-lattice geometry and dipolar coupling strengths.

Atoms sit on a regular square grid with lattice constant ``spacing_um``
(micrometers). The pairwise coupling between sites i and j follows the
dipolar power law (a / r_ij)**3, so nearest neighbours couple with strength
exactly 1 and the coupling is dimensionless.

All energies elsewhere in the package are frequencies in MHz (E/h) and all
times are in microseconds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LatticeError",
    "LatticeSpec",
    "CouplingMatrix",
    "build_lattice",
    "coupling_matrix",
    "lattice_coupling",
    "twisting_rate",
]

DEFAULT_SPACING_UM = 15.0


class LatticeError(ValueError):
    """Inconsistent lattice description or coupling input."""


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of a rows x cols square array.

    ``holes`` are site indices (row-major over the full grid) where no atom
    is present; they are removed before any dynamics. Site indices of the
    remaining atoms are compacted in row-major order.
    """

    rows: int
    cols: int
    spacing_um: float = DEFAULT_SPACING_UM
    boundary: str = "open"
    holes: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise LatticeError("rows and cols must be positive")
        if not self.spacing_um > 0:
            raise LatticeError("spacing_um must be positive")
        if self.boundary not in ("open", "periodic"):
            raise LatticeError(f"unknown boundary {self.boundary!r}")
        holes = frozenset(int(h) for h in self.holes)
        object.__setattr__(self, "holes", holes)
        n_grid = self.rows * self.cols
        if any(h < 0 or h >= n_grid for h in holes):
            raise LatticeError("hole index outside the grid")
        if self.n_sites < 1:
            raise LatticeError("all sites are holes, empty lattice")

    @property
    def n_sites(self) -> int:
        return self.rows * self.cols - len(self.holes)

    @property
    def box_um(self) -> tuple[float, float]:
        """Periodic box dimensions (x extent, y extent)."""
        return (self.cols * self.spacing_um, self.rows * self.spacing_um)


@dataclass(eq=False)
class CouplingMatrix:
    """Symmetric dimensionless couplings w[i, j] = (a / r_ij)**3, zero diagonal."""

    n_sites: int
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.shape != (self.n_sites, self.n_sites):
            raise LatticeError("coupling matrix shape mismatch")
        if not np.allclose(w, w.T, atol=0.0):
            raise LatticeError("coupling matrix must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise LatticeError("coupling matrix diagonal must be zero")
        if np.any(w < 0.0):
            raise LatticeError("couplings must be non-negative")
        w.setflags(write=False)
        self.w = w

    def pair_sum(self) -> float:
        """Sum of w[i, j] over unordered pairs i < j."""
        return 0.5 * float(self.w.sum())


def build_lattice(spec: LatticeSpec) -> np.ndarray:
    """Return atom positions, shape (n_sites, 2), in micrometers.

    Sites are ordered row-major over the full grid; holes are removed and the
    remaining indices compacted, which fixes a deterministic site labelling.
    """
    a = spec.spacing_um
    positions = []
    for r in range(spec.rows):
        for c in range(spec.cols):
            if r * spec.cols + c in spec.holes:
                continue
            positions.append((c * a, r * a))
    return np.array(positions, dtype=float)


def coupling_matrix(
    positions: np.ndarray,
    spacing_um: float,
    boundary: str = "open",
    box_um: tuple[float, float] | None = None,
) -> CouplingMatrix:
    """Dipolar couplings (a / r_ij)**3 from explicit positions.

    For ``boundary="periodic"`` distances use the minimum-image convention,
    which requires the box dimensions ``box_um``. No long-range resummation
    beyond the nearest image is performed.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
        raise LatticeError("positions must be an (n, 2) array with n >= 1")
    n = pos.shape[0]
    delta = pos[:, None, :] - pos[None, :, :]
    if boundary == "periodic":
        if box_um is None:
            raise LatticeError("periodic boundary requires box_um")
        box = np.asarray(box_um, dtype=float)
        delta -= box * np.round(delta / box)
    elif boundary != "open":
        raise LatticeError(f"unknown boundary {boundary!r}")
    r = np.sqrt((delta**2).sum(axis=-1))
    off_diag = ~np.eye(n, dtype=bool)
    if np.any(r[off_diag] == 0.0):
        raise LatticeError("coincident positions")
    w = np.zeros((n, n))
    w[off_diag] = (spacing_um / r[off_diag]) ** 3
    return CouplingMatrix(n_sites=n, w=w)


def lattice_coupling(spec: LatticeSpec) -> CouplingMatrix:
    """Couplings for a lattice description, handling the periodic box."""
    return coupling_matrix(
        build_lattice(spec),
        spec.spacing_um,
        boundary=spec.boundary,
        box_um=spec.box_um if spec.boundary == "periodic" else None,
    )


def twisting_rate(cm: CouplingMatrix, j_mhz: float) -> float:
    """Collective twisting rate 1/(2I) in MHz for exchange strength J (MHz).

    1/(2I) = 2 J * sum_{i<j} w_ij / (N (N - 1)); I is the moment of inertia
    of the collective-spin rotor obtained by projecting the pairwise model
    onto the maximal-spin sector.
    """
    n = cm.n_sites
    if n < 2:
        raise LatticeError("twisting rate needs at least two atoms")
    return 2.0 * j_mhz * cm.pair_sum() / (n * (n - 1))
