import numpy as np
import pytest

from spinsqueeze import (
    LatticeSpec,
    lattice_coupling,
    prepare_coherent_y,
    squeezing_record,
    xy_hamiltonian,
)
from spinsqueeze.engine import evolve
from spinsqueeze.measurement import moment_summary


def random_state(n, seed):
    gen = np.random.default_rng(seed)
    v = gen.normal(size=2**n) + 1j * gen.normal(size=2**n)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="session")
def xy_3x3():
    spec = LatticeSpec(rows=3, cols=3)
    return xy_hamiltonian(lattice_coupling(spec), 0.25)


@pytest.fixture(scope="session")
def xy_4x4():
    spec = LatticeSpec(rows=4, cols=4)
    return xy_hamiltonian(lattice_coupling(spec), 0.25)


@pytest.fixture(scope="session")
def curve_4x4(xy_4x4):
    """Ideal 4x4 quench: checkpoint states, moments and records to 1.2 us.

    Shared across the acceptance tests; the single most expensive fixture.
    """
    times = np.round(np.arange(0.0, 1.2001, 0.05), 10)
    state = prepare_coherent_y(16)
    states, records, moments = [], [], []
    t_prev = 0.0
    for t in times:
        state = evolve(xy_4x4, state, float(t) - t_prev)
        t_prev = float(t)
        states.append(state)
        moments.append(moment_summary(state))
        records.append(squeezing_record(state, float(t)))
    return {"times": times, "states": states, "moments": moments, "records": records}
