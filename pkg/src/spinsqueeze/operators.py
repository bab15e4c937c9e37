"""Matrix-free spin-1/2 Hamiltonian actions on 2**N amplitude vectors.

Basis convention: basis state index n stores site i in bit i, and bit value 1
means spin up (sigma^z eigenvalue +1). Within every two-dimensional site
factor, slot 0 is down and slot 1 is up.

Hamiltonian kinds, with w the dimensionless couplings and J in MHz:

    xy          -(J/2) sum_{i<j} w_ij (sx_i sx_j + sy_i sy_j)
    heisenberg  -(2J/3) sum_{i<j} w_ij (vec s_i . vec s_j)
    zz          sum_{i<j} w_ij sz_i sz_j           (unit prefactor)
    oat         chi * Jz**2                        (chi in MHz)

Every pair term decomposes into an exchange (flip-flop) part and a diagonal
sz sz part; the exchange acts through strided views so no index arrays or
matrices are ever materialized, and the diagonal is precomputed once.
"""
from __future__ import annotations

import numpy as np

from .lattice import CouplingMatrix

__all__ = [
    "Hamiltonian",
    "xy_hamiltonian",
    "heisenberg_hamiltonian",
    "zz_hamiltonian",
    "oat_hamiltonian",
    "apply_hamiltonian",
    "apply_jx",
    "apply_jy",
    "apply_jz",
    "jz_values",
    "collective_expectations",
    "apply_global_rotation",
]

# vectors of 2**n complex amplitudes get large quickly; keep a guard rail
MAX_SITES = 20

_NORM_TOL = 1e-10

_jz_cache: dict[int, np.ndarray] = {}


def _check_dim(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (2**n,):
        raise ValueError(f"state has dimension {v.shape}, expected ({2**n},)")
    return v


def _site_axes(n: int, i: int) -> tuple[int, int]:
    # reshape (2**n,) -> (high, 2, low) so that the middle axis is bit i
    return 2 ** (n - 1 - i), 2**i


def _exchange_accumulate(out: np.ndarray, v: np.ndarray, i: int, j: int, c: float, n: int):
    """out += c * (|01><10| + |10><01|) acting on bits (i, j)."""
    lo, hi = (i, j) if i < j else (j, i)
    a, b, d = 2 ** (n - 1 - hi), 2 ** (hi - lo - 1), 2**lo
    vv = v.reshape(a, 2, b, 2, d)
    oo = out.reshape(a, 2, b, 2, d)
    oo[:, 0, :, 1, :] += c * vv[:, 1, :, 0, :]
    oo[:, 1, :, 0, :] += c * vv[:, 0, :, 1, :]


def jz_values(n: int) -> np.ndarray:
    """Diagonal of Jz: total magnetization m = (n_up - n_down)/2 per basis state."""
    if n not in _jz_cache:
        idx = np.arange(2**n, dtype=np.int64)
        m = np.zeros(2**n)
        for i in range(n):
            m += (idx >> i) & 1
        m -= 0.5 * n
        m.setflags(write=False)
        _jz_cache[n] = m
    return _jz_cache[n]


class Hamiltonian:
    """Matrix-free Hamiltonian action for a fixed kind and coupling."""

    def __init__(self, kind: str, n: int, coupling: CouplingMatrix | None = None,
                 j_mhz: float = 0.0, chi_mhz: float | None = None):
        if n < 1 or n > MAX_SITES:
            raise ValueError(f"site number {n} outside supported range 1..{MAX_SITES}")
        if kind not in ("xy", "heisenberg", "zz", "oat"):
            raise ValueError(f"unknown Hamiltonian kind {kind!r}")
        if kind == "oat":
            if chi_mhz is None:
                raise ValueError("oat kind requires chi_mhz")
            if coupling is not None:
                raise ValueError("oat kind takes no coupling matrix")
        else:
            if coupling is None:
                raise ValueError(f"{kind} kind requires a coupling matrix")
            if coupling.n_sites != n:
                raise ValueError("coupling matrix size does not match site number")
        self.kind = kind
        self.n = n
        self.coupling = coupling
        self.j_mhz = float(j_mhz)
        self.chi_mhz = None if chi_mhz is None else float(chi_mhz)
        # per-pair exchange coefficient alpha and diagonal zz coefficient beta
        alpha, beta = {
            "xy": (-self.j_mhz, 0.0),
            "heisenberg": (-4.0 * self.j_mhz / 3.0, -2.0 * self.j_mhz / 3.0),
            "zz": (0.0, 1.0),
            "oat": (0.0, 0.0),
        }[kind]
        self._exchange: list[tuple[int, int, float]] = []
        if alpha != 0.0 and coupling is not None:
            for i in range(n):
                for j in range(i + 1, n):
                    wij = coupling.w[i, j]
                    if wij != 0.0:
                        self._exchange.append((i, j, alpha * wij))
        self._diag = self._build_diagonal(beta)

    def _build_diagonal(self, beta: float) -> np.ndarray | None:
        if self.kind == "oat":
            return self.chi_mhz * jz_values(self.n) ** 2
        if beta == 0.0:
            return None
        idx = np.arange(2**self.n, dtype=np.int64)
        z = [(((idx >> i) & 1) * 2.0 - 1.0) for i in range(self.n)]
        diag = np.zeros(2**self.n)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                wij = self.coupling.w[i, j]
                if wij != 0.0:
                    diag += (beta * wij) * z[i] * z[j]
        return diag

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Return H @ v without materializing H."""
        v = _check_dim(v, self.n)
        if self._diag is not None:
            out = self._diag * v
        else:
            out = np.zeros_like(v, dtype=complex)
        for i, j, c in self._exchange:
            _exchange_accumulate(out, v, i, j, c, self.n)
        return out


def xy_hamiltonian(cm: CouplingMatrix, j_mhz: float) -> Hamiltonian:
    return Hamiltonian("xy", cm.n_sites, coupling=cm, j_mhz=j_mhz)


def heisenberg_hamiltonian(cm: CouplingMatrix, j_mhz: float) -> Hamiltonian:
    return Hamiltonian("heisenberg", cm.n_sites, coupling=cm, j_mhz=j_mhz)


def zz_hamiltonian(cm: CouplingMatrix) -> Hamiltonian:
    return Hamiltonian("zz", cm.n_sites, coupling=cm)


def oat_hamiltonian(n: int, chi_mhz: float) -> Hamiltonian:
    return Hamiltonian("oat", n, chi_mhz=chi_mhz)


def apply_hamiltonian(h: Hamiltonian, v: np.ndarray) -> np.ndarray:
    return h.apply(v)


def apply_jx(v: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros_like(v, dtype=complex)
    for i in range(n):
        a, d = _site_axes(n, i)
        vv = v.reshape(a, 2, d)
        oo = out.reshape(a, 2, d)
        oo[:, 1, :] += 0.5 * vv[:, 0, :]
        oo[:, 0, :] += 0.5 * vv[:, 1, :]
    return out


def apply_jy(v: np.ndarray, n: int) -> np.ndarray:
    # sy |up> = i |down>, sy |down> = -i |up>
    out = np.zeros_like(v, dtype=complex)
    for i in range(n):
        a, d = _site_axes(n, i)
        vv = v.reshape(a, 2, d)
        oo = out.reshape(a, 2, d)
        oo[:, 0, :] += 0.5j * vv[:, 1, :]
        oo[:, 1, :] += -0.5j * vv[:, 0, :]
    return out


def apply_jz(v: np.ndarray, n: int) -> np.ndarray:
    return jz_values(n) * v


def collective_expectations(v: np.ndarray, atol: float = _NORM_TOL):
    """Exact first and second moments of the collective spin.

    Returns (<Jx>, <Jy>, <Jz>, <Jx^2>, <Jz^2>, <{Jx,Jz}>/2) for a normalized
    state vector. Second moments come from single applications of the
    collective operators, so the cost is O(N 2**N).
    """
    v = np.asarray(v, dtype=complex)
    n = int(round(np.log2(v.size)))
    v = _check_dim(v, n)
    if abs(np.linalg.norm(v) - 1.0) > atol:
        raise ValueError("state vector is not normalized")
    u = apply_jx(v, n)
    d = jz_values(n) * v
    jx = float(np.vdot(v, u).real)
    jy = float(np.vdot(v, apply_jy(v, n)).real)
    jz = float(np.vdot(v, d).real)
    jx2 = float(np.vdot(u, u).real)
    jz2 = float(np.vdot(d, d).real)
    cross = float(np.vdot(u, d).real)  # Re <Jx v | Jz v> = <{Jx,Jz}>/2
    return jx, jy, jz, jx2, jz2, cross


def apply_global_rotation(v: np.ndarray, phase_rad: float, angle_rad: float) -> np.ndarray:
    """Apply exp(-i (angle/2) sum_i (cos(phase) sx_i + sin(phase) sy_i)).

    The rotation axis lies in the equatorial x-y plane at azimuth ``phase``.
    With this sign convention a rotation by -pi/2 about x (phase 0) maps the
    all-up state onto the +y coherent state.
    """
    v = np.asarray(v, dtype=complex)
    n = int(round(np.log2(v.size)))
    v = _check_dim(v, n)
    c = np.cos(0.5 * angle_rad)
    s = np.sin(0.5 * angle_rad)
    m_ud = -1j * s * np.exp(-1j * phase_rad)  # up <- down
    m_du = -1j * s * np.exp(1j * phase_rad)   # down <- up
    out = v.copy()
    for i in range(n):
        a, d = _site_axes(n, i)
        oo = out.reshape(a, 2, d)
        up = oo[:, 1, :].copy()
        dn = oo[:, 0, :].copy()
        oo[:, 1, :] = c * up + m_ud * dn
        oo[:, 0, :] = m_du * up + c * dn
    return out
