"""Time propagation of state vectors.

Free evolution applies exp(-i 2 pi H t) with H in MHz and t in microseconds.
The workhorse is a Lanczos (Krylov subspace) approximation with full
reorthogonalization and adaptive substepping; a dense eigendecomposition
oracle is available for small systems as an independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal

from .operators import Hamiltonian

__all__ = [
    "KrylovParams",
    "PropagationError",
    "evolve",
    "evolve_dense_oracle",
    "dense_hamiltonian",
]

DENSE_MAX_SITES = 10

# single-site Pauli matrices in (down, up) slot order; slot 1 is spin up
_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
_SZ = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)


class PropagationError(RuntimeError):
    """Krylov iteration failed to reach the requested accuracy."""


@dataclass(frozen=True)
class KrylovParams:
    max_dim: int = 30
    step_us: float = 0.01
    tol: float = 1e-10

    def __post_init__(self):
        if self.max_dim < 2:
            raise ValueError("max_dim must be at least 2")
        if not self.step_us > 0:
            raise ValueError("step_us must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def _expm_tridiag_e1(alphas: np.ndarray, betas: np.ndarray, dt_us: float) -> np.ndarray:
    """exp(-i 2 pi T dt) @ e1 for the real symmetric tridiagonal T."""
    if len(alphas) == 1:
        return np.array([np.exp(-2j * np.pi * dt_us * alphas[0])])
    evals, evecs = eigh_tridiagonal(alphas, betas)
    phases = np.exp(-2j * np.pi * dt_us * evals)
    return evecs @ (phases * evecs[0, :])


def _krylov_apply_expm(apply_h, v: np.ndarray, dt_us: float, max_dim: int, tol: float):
    """One Lanczos propagation attempt. Returns (result, error_estimate).

    ``result`` is None when the a-posteriori local error estimate stays above
    ``tol`` at the maximal subspace size; the caller then substeps.
    """
    nrm = np.linalg.norm(v)
    basis = [v / nrm]
    alphas: list[float] = []
    betas: list[float] = []
    w = apply_h(basis[0])
    alphas.append(float(np.vdot(basis[0], w).real))
    w = w - alphas[0] * basis[0]
    y = None
    est = np.inf
    for _ in range(1, max_dim + 1):
        beta = float(np.linalg.norm(w))
        y = _expm_tridiag_e1(np.array(alphas), np.array(betas), dt_us)
        est = abs(2.0 * np.pi * dt_us * beta * y[-1])
        if est <= tol or beta <= 1e-14 * max(1.0, max(abs(a) for a in alphas)):
            break
        if len(alphas) == max_dim:
            break
        vm = w / beta
        # full reorthogonalization keeps the basis clean in long recurrences
        for vk in basis:
            vm = vm - np.vdot(vk, vm) * vk
        vm = vm / np.linalg.norm(vm)
        basis.append(vm)
        betas.append(beta)
        w = apply_h(vm) - beta * basis[-2]
        a = float(np.vdot(vm, w).real)
        alphas.append(a)
        w = w - a * vm
    if est > tol:
        return None, est
    out = np.zeros_like(v, dtype=complex)
    for coeff, vk in zip(y, basis):
        out += coeff * vk
    return nrm * out, est


def evolve(h: Hamiltonian, v: np.ndarray, t_us: float, params: KrylovParams | None = None) -> np.ndarray:
    """Propagate ``v`` under ``h`` for ``t_us`` microseconds.

    Substeps of ``params.step_us`` are halved whenever the local Lanczos
    error estimate exceeds ``params.tol``; the norm is restored after every
    substep (drift beyond 1e-6 aborts, indicating a broken operator).
    """
    p = params or KrylovParams()
    if t_us < 0:
        raise ValueError("negative evolution time")
    v = np.asarray(v, dtype=complex)
    if t_us == 0.0:
        return v.copy()
    norm0 = np.linalg.norm(v)
    state = v
    remaining = float(t_us)
    dt = min(p.step_us, remaining)
    while remaining > 1e-15:
        step = min(dt, remaining)
        out, est = _krylov_apply_expm(h.apply, state, step, p.max_dim, p.tol)
        halvings = 0
        while out is None:
            halvings += 1
            if halvings > 25:
                raise PropagationError(
                    f"Krylov residual {est:.3e} above tol {p.tol:.1e} after {halvings} halvings"
                )
            step *= 0.5
            out, est = _krylov_apply_expm(h.apply, state, step, p.max_dim, p.tol)
        drift = abs(np.linalg.norm(out) - norm0)
        if drift > 1e-6:
            raise PropagationError(f"norm drift {drift:.3e} in a single substep")
        out *= norm0 / np.linalg.norm(out)
        state = out
        remaining -= step
        dt = step  # keep a successful (possibly halved) step size
    return state


def _site_operator(op: np.ndarray, i: int, n: int) -> np.ndarray:
    full = np.eye(2 ** (n - 1 - i), dtype=complex)
    full = np.kron(full, op)
    return np.kron(full, np.eye(2**i, dtype=complex))


def dense_hamiltonian(h: Hamiltonian) -> np.ndarray:
    """Explicit 2**N x 2**N matrix built from Kronecker products.

    Independent of the matrix-free action on purpose: this is the reference
    construction that the fast path is tested against.
    """
    n = h.n
    if n > DENSE_MAX_SITES:
        raise PropagationError(f"dense construction refused for N={n} > {DENSE_MAX_SITES}")
    dim = 2**n
    mat = np.zeros((dim, dim), dtype=complex)
    if h.kind == "oat":
        jz = sum(_site_operator(_SZ, i, n) for i in range(n)) * 0.5
        return h.chi_mhz * (jz @ jz)
    prefactors = {
        "xy": (-0.5 * h.j_mhz, -0.5 * h.j_mhz, 0.0),
        "heisenberg": (-2.0 * h.j_mhz / 3.0,) * 3,
        "zz": (0.0, 0.0, 1.0),
    }[h.kind]
    sx = [_site_operator(_SX, i, n) for i in range(n)]
    sy = [_site_operator(_SY, i, n) for i in range(n)]
    sz = [_site_operator(_SZ, i, n) for i in range(n)]
    cx, cy, cz = prefactors
    for i in range(n):
        for j in range(i + 1, n):
            wij = h.coupling.w[i, j]
            if wij == 0.0:
                continue
            if cx:
                mat += (cx * wij) * (sx[i] @ sx[j])
            if cy:
                mat += (cy * wij) * (sy[i] @ sy[j])
            if cz:
                mat += (cz * wij) * (sz[i] @ sz[j])
    return mat


def evolve_dense_oracle(h: Hamiltonian, v: np.ndarray, t_us: float) -> np.ndarray:
    """Exact propagation through the eigendecomposition of the dense matrix.

    Only feasible for N <= 10; the spectrum is cached on the Hamiltonian so
    repeated calls over a time grid stay cheap.
    """
    if h.n > DENSE_MAX_SITES:
        raise PropagationError(f"dense oracle refused for N={h.n} > {DENSE_MAX_SITES}")
    if t_us < 0:
        raise ValueError("negative evolution time")
    cache = getattr(h, "_dense_eig", None)
    if cache is None:
        evals, evecs = eigh(dense_hamiltonian(h))
        cache = (evals, evecs)
        h._dense_eig = cache
    evals, evecs = cache
    v = np.asarray(v, dtype=complex)
    phases = np.exp(-2j * np.pi * evals * t_us)
    return evecs @ (phases * (evecs.conj().T @ v))
