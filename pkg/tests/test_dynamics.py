import numpy as np
import pytest
from conftest import random_system

from qsysid.dynamics import (
    ControlSchedule,
    expectation_derivative,
    propagate,
    random_schedule,
    record,
)
from qsysid.operators import PAULI_X, PAULI_Z, random_unitary
from qsysid.system import QuantumSystem, conjugate_system

RHO0 = np.diag([1.0, 0.0]).astype(complex)


def test_empty_schedule_returns_initial_state(rng):
    s = random_system(3, rng)
    np.testing.assert_array_equal(propagate(s, ControlSchedule()), s.initial_state)


def test_pi_pulse():
    s = QuantumSystem(0 * PAULI_Z, (PAULI_X,), (PAULI_Z,), RHO0)
    # exp(-i X t) flips |0> to |1> at t = pi/2; at t = pi it is -I
    flipped = propagate(s, ControlSchedule(((np.pi / 2, (1.0,)),)))
    np.testing.assert_allclose(flipped, np.diag([0.0, 1.0]), atol=1e-15)
    back = propagate(s, ControlSchedule(((np.pi, (1.0,)),)))
    np.testing.assert_allclose(back, RHO0, atol=1e-15)


def test_segment_merge(rng):
    s = random_system(4, rng)
    a = propagate(s, ControlSchedule(((0.3, (0.5,)), (0.9, (0.5,)))))
    b = propagate(s, ControlSchedule(((1.2, (0.5,)),)))
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_schedule_validation(rng):
    with pytest.raises(ValueError):
        ControlSchedule(((0.0, (1.0,)),))
    with pytest.raises(ValueError):
        ControlSchedule(((-1.0, (1.0,)),))
    s = random_system(2, rng)
    with pytest.raises(ValueError):
        propagate(s, ControlSchedule(((1.0, (1.0, 2.0)),)))


def test_record_at_zero(rng):
    s = random_system(3, rng, n_observables=2)
    rec = record(s, random_schedule(1, rng), [0.0])
    for ell, M in enumerate(s.observables):
        assert rec.values[ell, 0] == pytest.approx(np.trace(M @ s.initial_state).real, abs=1e-14)


def test_record_empty_schedule_time_zero(rng):
    s = random_system(2, rng)
    rec = record(s, ControlSchedule(), [0.0])
    assert rec.values[0, 0] == pytest.approx(np.trace(s.observables[0] @ s.initial_state).real)


def test_free_precession():
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    s = QuantumSystem(PAULI_Z, (), (PAULI_X,), rho)
    times = np.linspace(0, 3, 31)
    rec = record(s, ControlSchedule(((1.0, ()), (2.0, ()))), times)
    np.testing.assert_allclose(rec.values[0], np.cos(2 * times), atol=1e-14)


def test_record_matches_propagate_at_boundaries(rng):
    s = random_system(4, rng)
    sch = random_schedule(1, rng, n_segments=5, total_time=2.0)
    bounds = sch.boundaries()
    rec = record(s, sch, bounds)
    for j, t in enumerate(bounds):
        part = ControlSchedule(sch.segments[:j])
        rho = propagate(s, part)
        assert rec.values[0, j] == pytest.approx(np.trace(s.observables[0] @ rho).real, abs=1e-12)


def test_record_rejects_out_of_range(rng):
    s = random_system(2, rng)
    sch = random_schedule(1, rng, total_time=1.0)
    with pytest.raises(ValueError):
        record(s, sch, [0.5, 1.5])
    with pytest.raises(ValueError):
        record(s, sch, [0.6, 0.5])


def test_record_values_within_spectrum(rng):
    s = random_system(4, rng)
    rec = record(s, random_schedule(1, rng, total_time=3.0), np.linspace(0, 3, 40))
    w = np.linalg.eigvalsh(s.observables[0])
    assert np.all(rec.values[0] >= w[0] - 1e-12) and np.all(rec.values[0] <= w[-1] + 1e-12)


def test_noise_hook_is_opt_in(rng):
    s = random_system(2, rng)
    sch = random_schedule(1, rng)
    a = record(s, sch, [0.5, 1.0])
    b = record(s, sch, [0.5, 1.0], noise_std=0.1, rng=np.random.default_rng(0))
    assert not np.allclose(a.values, b.values)
    assert np.array_equal(a.values, record(s, sch, [0.5, 1.0]).values)


def test_conservation_long_schedule(rng):
    s = random_system(4, rng)
    sch = random_schedule(1, rng, n_segments=1000, total_time=100.0)
    rho = propagate(s, sch)
    assert abs(np.trace(rho) - 1) <= 1e-12
    assert np.linalg.norm(rho - rho.conj().T) <= 1e-12
    assert abs(np.trace(rho @ rho) - 1) <= 1e-10


def test_equivalent_systems_give_equal_records(rng):
    s = random_system(4, rng, n_controls=2)
    c = conjugate_system(s, random_unitary(4, rng))
    for _ in range(5):
        sch = random_schedule(2, rng, n_segments=6, total_time=2.0)
        t = np.linspace(0, 2, 15)
        np.testing.assert_allclose(record(s, sch, t).values, record(c, sch, t).values, atol=1e-10)


def test_finite_difference_second_order(rng):
    s = random_system(3, rng)
    sch = random_schedule(1, rng, n_segments=4, total_time=2.0)
    t = 0.7  # inside the third segment
    exact = expectation_derivative(s, sch, t)[0]
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        v = record(s, sch, [t - h, t + h]).values[0]
        errs.append(abs((v[1] - v[0]) / (2 * h) - exact))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.5 < r < 4.5 for r in ratios)
