import numpy as np
import pytest

from conftest import random_state
from spinsqueeze.engine import evolve, evolve_dense_oracle
from spinsqueeze.lattice import LatticeSpec, lattice_coupling
from spinsqueeze.measurement import moment_summary
from spinsqueeze.operators import (
    apply_global_rotation,
    collective_expectations,
    heisenberg_hamiltonian,
    xy_hamiltonian,
)
from spinsqueeze.protocols import (
    FinitePulse,
    FreeEvolution,
    ProtocolSchedule,
    Pulse,
    ScheduleError,
    apply_pulse,
    prepare_coherent_y,
    run_schedule,
    wahuha_average_hamiltonian,
    wahuha_cycle,
)

J = 0.25


def fidelity(a, b):
    return abs(np.vdot(a, b)) ** 2


def test_prepare_single_spin_amplitudes():
    v = prepare_coherent_y(1)
    target = np.array([1j, 1.0]) / np.sqrt(2.0)  # (down, up): (|up> + i|down>)/sqrt(2)
    assert abs(np.vdot(target, v)) == pytest.approx(1.0, abs=1e-14)
    # +1 eigenstate of sigma_y in the (down, up) ordering
    sy = np.array([[0.0, 1j], [-1j, 0.0]])
    assert np.allclose(sy @ v, v, atol=1e-14)


def test_prepare_n4_statistics():
    jx, jy, jz, jx2, jz2, cross = collective_expectations(prepare_coherent_y(4))
    assert jy == pytest.approx(2.0, abs=1e-13)
    assert jz2 - jz**2 == pytest.approx(1.0, abs=1e-13)


def test_instantaneous_pulse_prepares_coherent_state():
    n = 4
    all_up = np.zeros(2**n, complex)
    all_up[-1] = 1.0
    out = apply_pulse(Pulse(phase_rad=0.0, angle_rad=-np.pi / 2), all_up)
    assert fidelity(out, prepare_coherent_y(n)) == pytest.approx(1.0, abs=1e-13)


def test_pulse_composition():
    v = random_state(3, 2)
    two = apply_pulse(Pulse(0.0, np.pi / 2), apply_pulse(Pulse(0.0, np.pi / 2), v))
    one = apply_pulse(Pulse(0.0, np.pi), v)
    assert np.allclose(two, one, atol=1e-12)


def test_finite_square_pulse_matches_instantaneous_without_interactions():
    v = random_state(4, 5)
    finite = FinitePulse(rabi_mhz=22.2, shape="square", interactions_on=False)
    a = apply_pulse(Pulse(0.7, np.pi / 2, finite), v)
    b = apply_pulse(Pulse(0.7, np.pi / 2), v)
    assert fidelity(a, b) >= 1.0 - 1e-9


def test_finite_gaussian_pulse_area_is_exact():
    v = random_state(3, 8)
    finite = FinitePulse(rabi_mhz=22.2, shape="gaussian", half_width_ns=6.5,
                         interactions_on=False)
    a = apply_pulse(Pulse(0.0, np.pi / 2, finite), v)
    b = apply_pulse(Pulse(0.0, np.pi / 2), v)
    assert fidelity(a, b) >= 1.0 - 1e-9


def test_negative_angle_finite_pulse():
    v = random_state(3, 9)
    finite = FinitePulse(rabi_mhz=10.0, shape="square", interactions_on=False)
    a = apply_pulse(Pulse(0.0, -np.pi / 2, finite), v)
    b = apply_pulse(Pulse(0.0, -np.pi / 2), v)
    assert fidelity(a, b) >= 1.0 - 1e-9


def test_finite_pulse_with_interactions_reduces_polarization():
    # preparation pulse on the 3x3 array with the dipolar coupling left on
    spec = LatticeSpec(rows=3, cols=3)
    h = xy_hamiltonian(lattice_coupling(spec), J)
    all_up = np.zeros(2**9, complex)
    all_up[-1] = 1.0
    finite = FinitePulse(rabi_mhz=22.2, shape="square", interactions_on=True)
    out = apply_pulse(Pulse(0.0, -np.pi / 2, finite), all_up, h=h)
    _, jy, *_ = collective_expectations(out)
    polarization = jy / 4.5
    assert polarization < 1.0 - 1e-6
    assert polarization > 0.97  # interactions perturb only weakly at 22.2 MHz


def test_finite_pulse_with_interactions_requires_hamiltonian():
    finite = FinitePulse(rabi_mhz=22.2, interactions_on=True)
    with pytest.raises(ScheduleError):
        apply_pulse(Pulse(0.0, np.pi / 2, finite), prepare_coherent_y(2))


def test_run_schedule_empty_checkpoint_zero():
    v = prepare_coherent_y(2)
    out = run_schedule(ProtocolSchedule(()), v, [0.0])
    assert np.allclose(out[0], v)


def test_run_schedule_standard_equals_evolve(xy_3x3):
    v = prepare_coherent_y(9)
    schedule = ProtocolSchedule((FreeEvolution(xy_3x3, 0.4),))
    states = run_schedule(schedule, v, [0.1, 0.25, 0.4])
    for t, state in zip((0.1, 0.25, 0.4), states):
        assert fidelity(state, evolve_dense_oracle(xy_3x3, v, t)) >= 1.0 - 1e-8


def test_run_schedule_checkpoint_beyond_end():
    h = xy_hamiltonian(lattice_coupling(LatticeSpec(rows=1, cols=2)), J)
    schedule = ProtocolSchedule((FreeEvolution(h, 0.2),))
    with pytest.raises(ScheduleError):
        run_schedule(schedule, prepare_coherent_y(2), [0.3])


def test_run_schedule_unsorted_checkpoints():
    h = xy_hamiltonian(lattice_coupling(LatticeSpec(rows=1, cols=2)), J)
    schedule = ProtocolSchedule((FreeEvolution(h, 0.5),))
    with pytest.raises(ScheduleError):
        run_schedule(schedule, prepare_coherent_y(2), [0.3, 0.1])


def test_run_schedule_pulse_applies_before_checkpoint():
    h = xy_hamiltonian(lattice_coupling(LatticeSpec(rows=1, cols=2)), J)
    v = prepare_coherent_y(2)
    schedule = ProtocolSchedule((FreeEvolution(h, 0.2), Pulse(0.0, np.pi / 2)))
    out = run_schedule(schedule, v, [0.2])[0]
    ref = apply_global_rotation(evolve(h, v, 0.2), 0.0, np.pi / 2)
    assert fidelity(out, ref) >= 1.0 - 1e-9


def test_rotations_commute_with_heisenberg_evolution():
    cm = lattice_coupling(LatticeSpec(rows=2, cols=3))
    h = heisenberg_hamiltonian(cm, J)
    v = random_state(6, 12)
    rot_then_evolve = evolve(h, apply_global_rotation(v, 0.4, 1.1), 0.3)
    evolve_then_rot = apply_global_rotation(evolve(h, v, 0.3), 0.4, 1.1)
    assert np.linalg.norm(rot_then_evolve - evolve_then_rot) <= 1e-10


def test_heisenberg_freezes_collective_moments():
    cm = lattice_coupling(LatticeSpec(rows=2, cols=3))
    hxy = xy_hamiltonian(cm, J)
    hheis = heisenberg_hamiltonian(cm, J)
    squeezed = evolve(hxy, prepare_coherent_y(6), 0.25)
    before = collective_expectations(squeezed)
    after = collective_expectations(evolve(hheis, squeezed, 0.6))
    assert np.allclose(before, after, atol=1e-8)


def test_wahuha_identity_on_noninteracting_system():
    cm = lattice_coupling(LatticeSpec(rows=2, cols=2))
    h_free = xy_hamiltonian(cm, 0.0)
    v = prepare_coherent_y(4)
    steps = wahuha_cycle(h_free, 0.36)
    out = run_schedule(ProtocolSchedule(steps), v, [0.36])[0]
    assert fidelity(out, v) >= 1.0 - 1e-12


def test_wahuha_duration_bookkeeping():
    cm = lattice_coupling(LatticeSpec(rows=1, cols=2))
    h = xy_hamiltonian(cm, J)
    steps = wahuha_cycle(h, 0.36)
    total = sum(s.t_us for s in steps if isinstance(s, FreeEvolution))
    assert total == pytest.approx(0.36, abs=1e-12)
    assert sum(1 for s in steps if isinstance(s, Pulse)) == 4
    # symmetric delay pattern tau, tau, 2tau, tau, tau
    delays = [s.t_us for s in steps if isinstance(s, FreeEvolution)]
    tau = 0.36 / 6.0
    assert np.allclose(delays, [tau, tau, 2 * tau, tau, tau])


def test_wahuha_finite_pulses_fit_or_error():
    cm = lattice_coupling(LatticeSpec(rows=1, cols=2))
    h = xy_hamiltonian(cm, J)
    fast = FinitePulse(rabi_mhz=22.2, shape="square", interactions_on=True)
    steps = wahuha_cycle(h, 0.36, pulse=fast)
    dur = sum(s.t_us if isinstance(s, FreeEvolution) else s.duration_us for s in steps)
    assert dur == pytest.approx(0.36, abs=1e-12)
    slow = FinitePulse(rabi_mhz=0.5, shape="square", interactions_on=True)
    with pytest.raises(ScheduleError):
        wahuha_cycle(h, 0.36, pulse=slow)


def test_wahuha_approaches_engineered_heisenberg():
    # one cycle against exact evolution under the cycle average; the gap
    # shrinks monotonically (and superlinearly) as the cycle gets faster
    cm = lattice_coupling(LatticeSpec(rows=2, cols=3))
    h = xy_hamiltonian(cm, J)
    havg = wahuha_average_hamiltonian(h)
    entry = evolve(h, prepare_coherent_y(6), 0.3)
    gaps = []
    for t_f in (0.36, 0.18, 0.09):
        cycle = run_schedule(ProtocolSchedule(wahuha_cycle(h, t_f)), entry, [t_f])[0]
        ref = evolve(havg, entry, t_f)
        gaps.append(1.0 - fidelity(cycle, ref))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-4


def test_wahuha_average_has_half_exchange():
    cm = lattice_coupling(LatticeSpec(rows=2, cols=2))
    h = xy_hamiltonian(cm, J)
    havg = wahuha_average_hamiltonian(h)
    assert havg.kind == "heisenberg"
    assert havg.j_mhz == pytest.approx(0.5 * J)


def test_wahuha_freezes_squeezing_small_system():
    cm = lattice_coupling(LatticeSpec(rows=2, cols=3))
    h = xy_hamiltonian(cm, J)
    entry = evolve(h, prepare_coherent_y(6), 0.25)
    m0 = moment_summary(entry)
    state = entry
    for _ in range(3):
        state = run_schedule(ProtocolSchedule(wahuha_cycle(h, 0.18)), state, [0.18])[0]
    m1 = moment_summary(state)
    # free evolution over the same 0.54 us changes the variance a lot more
    free = moment_summary(evolve(h, entry, 0.54))
    drift = abs(m1.var_z - m0.var_z) + abs(m1.var_x - m0.var_x)
    change = abs(free.var_z - m0.var_z) + abs(free.var_x - m0.var_x)
    assert drift < 0.2 * change


def test_invalid_cycle_duration():
    cm = lattice_coupling(LatticeSpec(rows=1, cols=2))
    with pytest.raises(ScheduleError):
        wahuha_cycle(xy_hamiltonian(cm, J), 0.0)
