import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiphys.errors import DegenerateWitness, EmptySelection, OutOfInterval, UnknownParticle
from quasiphys.mss import (
    ConstantExternal,
    FunctionInternal,
    Gravity,
    Grouped,
    MSSSystem,
    TabulatedExternal,
    Trajectory,
    ZeroExternal,
    ZeroInternal,
    absorb_external,
    accel,
    conservation_drift,
    embed_isolated_uniform,
    embedding_horizon,
    equivalent,
    is_isolated,
    is_subsystem,
    isolation_check,
    resplit_forces,
    restrict,
    simulate,
    subsystem_residual,
    total_applied_force,
    validate,
    verify_embedding,
)
from quasiphys.mss.orbits import circular_two_body, kepler_period, measured_period


def line(t):
    return np.array([t, 0.0, 0.0])


def free_system(h=1e-2, interval=(0.0, 1.0)):
    tr = Trajectory.from_function(line, interval[0], interval[1], h)
    return MSSSystem(("a",), {"a": tr}, {"a": 1.0})


@pytest.fixture(scope="module")
def orbit():
    masses, pos, vel = circular_two_body(1.0, 1.0, 1.0)
    return simulate(masses, pos, vel, Gravity(1.0), h=1e-3, interval=(0.0, 1.0))


# accel


def test_accel_linear_is_zero():
    tr = Trajectory.from_function(line, 0.0, 1.0, 1e-3)
    for t in (0.0, 0.3, 0.50005, 1.0):
        assert np.allclose(accel(tr, t), 0.0, atol=1e-8)


def test_accel_quadratic_is_exact():
    tr = Trajectory.from_function(lambda t: np.array([t * t, 0.0, 0.0]), 0.0, 1.0, 1e-3)
    for t in (0.0, 0.001, 0.5, 0.999, 1.0):
        assert np.allclose(accel(tr, t), [2.0, 0.0, 0.0], atol=1e-5)


def test_accel_sine_within_bound():
    tr = Trajectory.from_function(lambda t: np.array([math.sin(t), 0.0, 0.0]), 0.0, 2.0, 1e-3)
    for t in np.linspace(0.0, 2.0, 41):
        assert abs(accel(tr, t)[0] + math.sin(t)) <= 1e-5


def test_accel_outside_interval():
    tr = Trajectory.from_function(line, 0.0, 1.0, 1e-2)
    with pytest.raises(OutOfInterval):
        accel(tr, 1.5)


def test_trajectory_needs_five_samples():
    with pytest.raises(ValueError):
        Trajectory(0.0, 0.1, np.zeros((4, 3)))


# validate


def test_free_particle_validates():
    report = validate(free_system())
    assert report.passed
    assert [c.name for c in report] == [f"P{i}" for i in range(1, 8)]


def test_symmetric_force_breaks_p5():
    tr = {p: Trajectory.from_function(lambda t, x=x: np.array([x, 0.0, 0.0]), 0.0, 1.0, 0.1) for p, x in (("a", 0), ("b", 1))}
    push = FunctionInternal(lambda p, q, t, pos, mass: np.zeros(3) if p == q else np.array([1.0, 0.0, 0.0]))
    report = validate(MSSSystem(("a", "b"), tr, {"a": 1, "b": 1}, push))
    assert not report["P5"].passed
    assert report["P5"].witness is not None
    assert report["P5"].max_residual == pytest.approx(2.0)


def test_self_force_is_checked():
    tr = {"a": Trajectory.from_function(line, 0.0, 1.0, 0.1)}
    selfish = FunctionInternal(lambda p, q, t, pos, mass: np.array([0.0, 1.0, 0.0]))
    report = validate(MSSSystem(("a",), tr, {"a": 1.0}, selfish, ConstantExternal({"a": [0.0, -1.0, 0.0]})))
    assert not report["P5"].passed
    assert report["P5"].witness[:2] == ("a", "a")


def test_gravity_self_force_zero(orbit):
    for p in orbit.particles:
        assert np.array_equal(orbit.f(p, p, 0.3), np.zeros(3))


def test_nonpositive_mass_fails_p4():
    sys = free_system()
    bad = MSSSystem(sys.particles, sys.trajectories, {"a": -1.0})
    assert not validate(bad)["P4"].passed


def test_orbit_validates(orbit):
    report = validate(orbit, tol=1e-4)
    assert report.passed, report.failures()
    dp, dl = conservation_drift(orbit)
    assert dp < 1e-6 and dl < 1e-6


def test_orbit_period():
    masses, pos, vel = circular_two_body(1.0, 1.0, 1.0)
    period = kepler_period(1.0, 1.0, 1.0, 1.0)
    n = math.ceil(period / 1e-3) + 10
    sys = simulate(masses, pos, vel, Gravity(1.0), h=1e-3, interval=(0.0, n * 1e-3))
    assert measured_period(sys, *sys.particles) == pytest.approx(period, rel=1e-3)


# subsystems


def three_body(h=1e-2):
    masses = {"a": 1.0, "b": 1.0, "c": 2.0}
    pos = {"a": [0.0, 0.0, 0.0], "b": [1.0, 0.0, 0.0], "c": [0.0, 3.0, 0.0]}
    vel = {"a": [0.0, -0.5, 0.0], "b": [0.0, 0.5, 0.0], "c": [0.2, 0.0, 0.1]}
    return masses, pos, vel


def test_full_set_is_subsystem(orbit):
    assert is_subsystem(orbit, orbit.particles, tol=1e-4)
    assert absorb_external(orbit, orbit.particles).particles == orbit.particles


def test_pair_without_cross_forces_is_subsystem():
    masses, pos, vel = three_body()
    law = Grouped(Gravity(1.0), {"a": 0, "b": 0, "c": 1})
    sys = simulate(masses, pos, vel, law, h=1e-3, interval=(0.0, 0.5))
    assert is_subsystem(sys, ("a", "b"), tol=1e-4)
    assert validate(restrict(sys, ("a", "b")), tol=1e-4).passed


def test_single_gravitating_particle_not_subsystem(orbit):
    residual, witness = subsystem_residual(orbit, ("p1",))
    assert not is_subsystem(orbit, ("p1",), tol=1e-4)
    # the residual is the dropped pull: unit masses at unit separation
    assert residual == pytest.approx(1.0, rel=1e-3)
    assert witness[0] == "p1"


def test_absorbed_single_particle_validates(orbit):
    one = absorb_external(orbit, ("p1",))
    assert validate(one, tol=1e-4).passed
    t = 0.25
    assert np.allclose(one.g("p1", t), orbit.f("p1", "p2", t))


def test_three_body_chain_absorbed():
    masses, pos, vel = three_body()
    sys = simulate(masses, pos, vel, Gravity(1.0), h=1e-3, interval=(0.0, 0.5))
    assert validate(absorb_external(sys, ("a", "b")), tol=1e-4).passed


def test_restrict_errors(orbit):
    with pytest.raises(EmptySelection):
        restrict(orbit, ())
    with pytest.raises(UnknownParticle):
        restrict(orbit, ("p1", "zz"))


# equivalence and totals


def test_equivalence_cases(orbit):
    assert equivalent(orbit, orbit)
    split = resplit_forces(orbit, {frozenset(orbit.particles): lambda t: 0.3 + t})
    assert equivalent(orbit, split)
    heavier = MSSSystem(orbit.particles, orbit.trajectories, {"p1": 1.0, "p2": 2.0}, orbit.internal)
    assert not equivalent(orbit, heavier)


def test_resplit_keeps_totals(orbit):
    split = resplit_forces(orbit, {frozenset(orbit.particles): lambda t: math.cos(t)})
    assert validate(split, tol=1e-4).passed
    for t in np.linspace(0.0, 1.0, 11):
        for p in orbit.particles:
            assert np.allclose(total_applied_force(orbit, p, t), total_applied_force(split, p, t), atol=1e-9)


def test_total_applied_force_values(orbit):
    assert np.array_equal(total_applied_force(free_system(), "a", 0.5), np.zeros(3))
    # initial separation 1 along x: pull of magnitude 1 toward the partner
    f = total_applied_force(orbit, "p1", 0.0)
    s = orbit.trajectories["p2"].position(0.0) - orbit.trajectories["p1"].position(0.0)
    assert np.allclose(f, s / np.linalg.norm(s) ** 3)


# isolation


def test_isolation_cases():
    assert is_isolated(free_system())
    sys = free_system()
    falling = MSSSystem(sys.particles, sys.trajectories, sys.masses, external=ConstantExternal.uniform([0, 0, -9.8], ("a",)))
    assert not is_isolated(falling)
    spike = MSSSystem(sys.particles, sys.trajectories, sys.masses, external=TabulatedExternal({("a", 0.37): [0, 1e-9, 0]}))
    check = isolation_check(spike)
    assert not check.passed and check.witness == ("a", pytest.approx(0.37))


# embedding


def falling_system(t1, h=1e-2):
    g = np.array([0.0, 0.0, -1.0])
    tr = Trajectory.from_function(lambda t: 0.5 * g * t * t, 0.0, t1, h)
    return MSSSystem(("p",), {"p": tr}, {"p": 1.0}, ZeroInternal(), ConstantExternal({"p": g}))


def test_embedding_passes():
    sys = falling_system(0.5)
    assert validate(sys).passed
    big = embed_isolated_uniform(sys, 1.0)
    assert len(big.particles) == 2
    report = verify_embedding(sys, big, tol=1e-6)
    assert report.passed, report.failures()


def test_embedding_noop_without_field():
    sys = free_system()
    assert embed_isolated_uniform(sys, 1.0) is sys


def test_embedding_horizon_raises():
    assert embedding_horizon(1.0, 1.0, 1.0, 0.0) == pytest.approx(1.0)
    with pytest.raises(DegenerateWitness) as err:
        embed_isolated_uniform(falling_system(2.0), 1.0)
    assert err.value.horizon == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(
    g=st.floats(0.1, 5.0),
    m=st.floats(0.2, 5.0),
    m_e=st.floats(0.2, 5.0),
)
def test_embedding_family(g, m, m_e):
    t1 = 0.5 * (embedding_horizon(g, m, m_e, 0.0))
    t1 = round(t1 / 1e-2) * 1e-2
    if t1 < 0.05:
        return
    field = np.array([0.0, g, 0.0])
    tr = Trajectory.from_function(lambda t: 0.5 * field / m * t * t, 0.0, t1, 1e-2)
    sys = MSSSystem(("p",), {"p": tr}, {"p": m}, ZeroInternal(), ConstantExternal({"p": field}))
    report = verify_embedding(sys, embed_isolated_uniform(sys, m_e), tol=1e-6)
    assert report.passed, report.failures()


# integration


def test_free_particle_straight_line():
    sys = simulate({"a": 1.0}, {"a": [0, 0, 0]}, {"a": [1, 0, 0]}, h=1e-3, interval=(0.0, 1.0))
    tr = sys.trajectories["a"]
    expected = np.outer(tr.times, [1.0, 0.0, 0.0])
    assert np.max(np.abs(tr.samples - expected)) <= 1e-12


def test_uniform_field_parabola():
    ext = ConstantExternal.uniform([0, 0, -1], ("a",))
    sys = simulate({"a": 1.0}, {"a": [0, 0, 2.0]}, {"a": [0, 0, 0.7]}, ZeroInternal(), ext, h=1e-2, interval=(0.0, 2.0))
    tr = sys.trajectories["a"]
    z = 2.0 + 0.7 * tr.times - 0.5 * tr.times**2
    assert np.max(np.abs(tr.samples[:, 2] - z)) <= 1e-9
    assert validate(sys).passed


def test_interval_must_match_step():
    with pytest.raises(ValueError):
        simulate({"a": 1.0}, {"a": [0, 0, 0]}, {"a": [0, 0, 0]}, h=0.3, interval=(0.0, 1.0))


@settings(max_examples=8, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
)
def test_isolated_gravity_conserves(seed):
    rng = np.random.default_rng(seed)
    ids = ("a", "b", "c")
    masses = {p: float(rng.uniform(0.5, 2.0)) for p in ids}
    pos = {p: rng.uniform(-1, 1, 3) + 3 * np.eye(3)[i] for i, p in enumerate(ids)}
    vel = {p: rng.uniform(-0.3, 0.3, 3) for p in ids}
    sys = simulate(masses, pos, vel, Gravity(1.0), ZeroExternal(), h=1e-3, interval=(0.0, 0.2))
    dp, dl = conservation_drift(sys)
    assert dp < 1e-9 and dl < 1e-9
    report = validate(sys, tol=1e-4)
    assert report.passed, report.failures()
