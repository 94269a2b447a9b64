"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line that is printed in the terminal
summary (see ``conftest.py``).
"""
import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import record
from quasiphys.cli import main
from quasiphys.errors import DegenerateWitness, SingularityError
from quasiphys.mss import (
    ConstantExternal,
    Gravity,
    Grouped,
    MSSSystem,
    Trajectory,
    ZeroInternal,
    conservation_drift,
    embed_isolated_uniform,
    embedding_horizon,
    is_subsystem,
    resplit_forces,
    restrict,
    simulate,
    total_applied_force,
    validate,
    verify_embedding,
)
from quasiphys.mss.orbits import circular_two_body, free_fall_time, kepler_period, measured_period
from quasiphys.occupancy import Mode, count_configurations
from quasiphys.qset import (
    Collection,
    MacroAtom,
    MicroAtom,
    QuasiFunction,
    Species,
    enumerate_sub_classes,
    indist,
    power_qc,
    qc,
    qset,
    validate_qf,
)
from quasiphys.qset.suite import exhaustive_universes, run_suite
from quasiphys.quantum import (
    SIGMA_Z,
    X_UP,
    StateVector,
    direction,
    eprb_statistics,
    measure,
    pr,
    spin_observable,
)
from quasiphys.quasi_mss import (
    AnalyticField,
    AnalyticPair,
    build_qmss,
    individuation_report,
    simulate_gravity,
    validate_q,
)
from quasiphys.seeding import HashStream, seed_split

CONFIGS = Path(__file__).resolve().parent.parent / "scripts" / "configs"
AXIOM_TOL = 1e-4


def test_criterion_01_qset_axiom_suite():
    universes = list(exhaustive_universes())
    assert max(len(u.micro) for u in universes) == 5
    assert max(c for u in universes for _, c in u.micro) == 4
    assert max(u.depth for u in universes) == 2
    start = time.perf_counter()
    checks = run_suite(random_universes=1000, seed=0, exhaustive=True)
    elapsed = time.perf_counter() - start
    names = {c.name for c in checks}
    required = {
        "equivalence-reflexive",
        "equivalence-symmetric",
        "equivalence-transitive",
        "ext-eq-substitutivity",
        "weak-pair-membership",
        "separation",
        "qc-empty",
        "subqset-existence",
        "weak-extensionality",
    }
    failures = [c.name for c in checks if not c.passed]
    ok = required <= names and not failures and elapsed < 10.0
    cases = sum(c.cases for c in checks)
    record(1, ok, f"{len(checks)} checks, {cases} cases over {len(universes)} exhaustive + 1000 random universes, {elapsed:.2f}s, failures={failures}")
    assert required <= names
    assert not failures
    assert elapsed < 10.0


def labelled_class_count(n: int) -> int:
    # n labelled copies; a subset is remembered only by its size once labels are dropped
    return len({sum(mask) for mask in itertools.product((0, 1), repeat=n)})


def test_criterion_02_power_qset():
    rows = []
    ok = True
    for n in range(13):
        pure = qset({"electron": n})
        mixed = qset({"electron": n // 2, "proton": (n + 1) // 2 - 1}, macro=["a"]) if n else pure
        classes = enumerate_sub_classes(pure)
        oracle = labelled_class_count(n)
        rows.append((n, power_qc(pure), 2**n, len(classes), oracle))
        ok &= power_qc(pure) == 2**n and power_qc(mixed) == 2 ** qc(mixed)
        ok &= len(classes) == n + 1 == oracle
        ok &= sorted(qc(c) for c in classes) == list(range(n + 1))
    table = " ".join(f"qc={n}:{p}/{e},{c}/{o}" for n, p, e, c, o in rows)
    record(2, ok, f"power_qc/2^qc, classes/oracle -> {table}")
    assert ok


def _violating_mapping(rng, pool, outputs):
    size = int(rng.integers(1, 6))
    ins = [pool[i] for i in rng.integers(0, len(pool), size=size)]
    pairs = [(x, outputs[int(rng.integers(0, len(outputs)))]) for x in ins]
    # copy one input (an indistinguishable twin) and send it somewhere not indistinguishable
    x, y = pairs[int(rng.integers(0, len(pairs)))]
    other = [o for o in outputs if not indist(o, y)]
    pairs.insert(int(rng.integers(0, len(pairs) + 1)), (x, other[int(rng.integers(0, len(other)))]))
    return pairs


def test_criterion_03_quasi_function_congruence():
    rng = np.random.default_rng(2024)
    species = [Species(s) for s in ("electron", "proton", "neutron")]
    pool = [MicroAtom(s) for s in species] + [MacroAtom("a"), MacroAtom("b")]
    pool += [Collection(qset({"electron": k})) for k in (1, 2)] + [Collection(qset({"electron": 1}, macro=["a"]))]
    outputs = pool
    false_accepts = 0
    for _ in range(1000):
        if validate_qf(QuasiFunction(tuple(_violating_mapping(rng, pool, outputs)))).ok:
            false_accepts += 1
    false_rejects = 0
    for _ in range(1000):
        # choose an image per indistinguishability class, then list inputs with repeats
        image = {i: outputs[int(rng.integers(0, len(outputs)))] for i in range(len(pool))}
        idx = rng.integers(0, len(pool), size=int(rng.integers(1, 8)))
        pairs = [(pool[i], image[i]) for i in idx]
        if not validate_qf(QuasiFunction(tuple(pairs))).ok:
            false_rejects += 1
    ok = false_accepts == 0 and false_rejects == 0
    record(3, ok, f"1000 violating mappings: {false_accepts} accepted; 1000 class-constant mappings: {false_rejects} rejected")
    assert ok


def test_criterion_04_two_body_orbit():
    h = 1e-3
    period = kepler_period(1.0, 1.0, 1.0)
    t1 = math.ceil(period / h) * h
    start = time.perf_counter()
    masses, pos, vel = circular_two_body(1.0, 1.0, 1.0)
    sys = simulate(masses, pos, vel, Gravity(1.0), h=h, interval=(0.0, t1))
    report = validate(sys, tol=AXIOM_TOL)
    dp, dl = conservation_drift(sys)
    measured = measured_period(sys, "p1", "p2")
    elapsed = time.perf_counter() - start
    residual = max(c.max_residual for c in report)
    rel = abs(measured - period) / period
    ok = report.passed and residual < 1e-4 and dp < 1e-6 and dl < 1e-6 and rel < 1e-3 and elapsed < 5.0
    record(4, ok, f"max residual {residual:.2e}, drift p={dp:.1e} L={dl:.1e}, period {measured:.9f} vs {period:.9f} (rel {rel:.1e}), {elapsed:.2f}s")
    assert ok


def _random_grouped_system(rng):
    n = int(rng.integers(2, 5))
    ids = [f"q{i}" for i in range(n)]
    masses = {p: float(rng.uniform(0.5, 2.0)) for p in ids}
    pos = {p: np.array([3.0 * i, 0.0, 0.0]) + rng.uniform(-0.5, 0.5, 3) for i, p in enumerate(ids)}
    vel = {p: rng.uniform(-0.3, 0.3, 3) for p in ids}
    groups = {p: int(rng.integers(0, 2)) for p in ids}
    field = ConstantExternal({p: rng.uniform(-1, 1, 3) for p in ids})
    return simulate(masses, pos, vel, Grouped(Gravity(1.0), groups), field, h=1e-3, interval=(0.0, 0.1))


def test_criterion_05_subsystem_closure():
    rng = np.random.default_rng(5)
    systems = positives = revalidated = 0
    while systems < 100:
        sys = _random_grouped_system(rng)
        if not validate(sys, AXIOM_TOL).passed:
            continue
        systems += 1
        ids = sys.particles
        for mask in itertools.product((0, 1), repeat=len(ids)):
            sub = tuple(p for p, keep in zip(ids, mask) if keep)
            if sub and is_subsystem(sys, sub, AXIOM_TOL):
                positives += 1
                revalidated += validate(restrict(sys, sub), AXIOM_TOL).passed
    ok = positives > 0 and revalidated == positives
    record(5, ok, f"{systems} validated systems, {positives} subsystem-positive restrictions, {revalidated} re-validate")
    assert ok


def test_criterion_06_equivalent_force_splits():
    rng = np.random.default_rng(6)
    worst = 0.0
    pairs = 0
    for _ in range(100):
        sys = _random_grouped_system(rng)
        coeffs = {}
        for p, q in itertools.combinations(sys.particles, 2):
            a, b = rng.uniform(-2, 2, 2)
            coeffs[frozenset((p, q))] = lambda t, a=a, b=b: a + b * t
        split = resplit_forces(sys, coeffs)
        report = validate(split, AXIOM_TOL)
        assert report["P5"].passed and report["P6"].passed
        for t in sys.grid():
            for p in sys.particles:
                diff = np.linalg.norm(total_applied_force(sys, p, t) - total_applied_force(split, p, t))
                worst = max(worst, float(diff))
        pairs += 1
    ok = worst <= 10 * AXIOM_TOL
    record(6, ok, f"{pairs} equivalent pairs, max total-force gap {worst:.2e} (bound {10 * AXIOM_TOL:.0e})")
    assert ok


def _falling(g, m, t1, h=1e-2):
    field = np.array([0.0, 0.0, -g])
    tr = Trajectory.from_function(lambda t: 0.5 * field / m * t * t, 0.0, t1, h)
    return MSSSystem(("p",), {"p": tr}, {"p": m}, ZeroInternal(), ConstantExternal({"p": field}))


def test_criterion_07_isolated_embedding():
    sys = _falling(1.0, 1.0, 0.5)
    big = embed_isolated_uniform(sys, 1.0)
    report = verify_embedding(sys, big)
    horizons = []
    for g, m, m_e in ((1.0, 1.0, 1.0), (2.0, 0.5, 3.0), (0.3, 4.0, 0.2)):
        analytic = 1.0 / math.sqrt(0.5 * g * (1 / m + 1 / m_e))
        assert embedding_horizon(g, m, m_e, 0.0) == pytest.approx(analytic, rel=1e-15)
        with pytest.raises(DegenerateWitness) as err:
            embed_isolated_uniform(_falling(g, m, math.ceil(analytic * 1.5 * 100) / 100), m_e)
        horizons.append((analytic, err.value.horizon))
    ok = report.passed and all(abs(a - b) <= 1e-12 for a, b in horizons)
    detail = ", ".join(f"{c.name}={c.passed}" for c in report)
    record(7, ok, f"{detail}; DegenerateWitness at horizons {[round(b, 6) for _, b in horizons]} (analytic {[round(a, 6) for a, _ in horizons]})")
    assert ok


def test_criterion_08_quasi_mss():
    rng = np.random.default_rng(8)
    # (a) analytic force specs on systems that include indistinguishable twins
    congruent = 0
    for _ in range(20):
        base = [Trajectory.from_function(lambda t, x=rng.uniform(-3, 3, 3), v=rng.uniform(-1, 1, 3): x + v * t, 0.0, 0.5, 0.05) for _ in range(3)]
        trs = base + [base[0], base[1]]
        masses = [1.0, 2.0, 1.0, 1.0, 2.0]
        spring = AnalyticPair(lambda ma, sa, va, mb, sb, vb, t: ma * mb * (sb - sa))
        field = AnalyticField(lambda m, s, v, t: m * np.array([0.0, 0.0, -1.0]) + 0.1 * v)
        rep = validate_q(build_qmss("particle", masses, trs, spring, field))
        congruent += all(rep[n].passed for n in ("QP6", "QP7", "QP8", "QP9", "indist-zero-force"))
    ok_a = congruent == 20

    # (b) five same-mass bodies from distinct random states
    initial = [(1.0, np.array([4.0 * math.cos(k * 1.2566), 4.0 * math.sin(k * 1.2566), 0.0]) + rng.uniform(-0.5, 0.5, 3), rng.uniform(-0.3, 0.3, 3)) for k in range(5)]
    sys = simulate_gravity(initial, gamma=1.0, h=1e-3, interval=(0.0, 1.0))
    ind = individuation_report(sys)
    qrep = validate_q(sys, AXIOM_TOL)
    ok_b = ind.all_singletons and len(ind.times) == len(sys.grid()) and qrep.passed

    # (c) head-on collapse from rest
    t_c = free_fall_time(1.0, 1.0, 1.0)
    try:
        simulate_gravity([(1.0, [0.5, 0, 0], [0, 0, 0]), (1.0, [-0.5, 0, 0], [0, 0, 0])], h=1e-3, interval=(0.0, 1.0))
        raised_at = None
    except SingularityError as err:
        raised_at = err.time
    ok_c = raised_at is not None and raised_at < t_c
    ok = ok_a and ok_b and ok_c
    record(
        8,
        ok,
        f"(a) {congruent}/20 congruent with zero twin forces; (b) 5 singleton classes at {len(ind.times)} times, QP10 {qrep['QP10'].max_residual:.1e}; "
        f"(c) SingularityError at t={raised_at} < {t_c:.6f}",
    )
    assert ok


def test_criterion_09_eprb():
    z = [0.0, 0.0, 1.0]
    same = eprb_statistics(z, z, 100_000, 1, keep_outcomes=True)
    per_trial = bool(np.all(same.outcomes[:, 0] == -same.outcomes[:, 1]))
    lines, ok = [], per_trial and same.correlation == -1.0
    for theta in (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2):
        start = time.perf_counter()
        stats = eprb_statistics(z, direction(theta), 100_000, 17)
        elapsed = time.perf_counter() - start
        expected = -math.cos(theta)
        se = math.sqrt(max(1 - expected**2, 0.0) / stats.trials)
        good = abs(stats.correlation - expected) <= 3 * se + 1e-15 and elapsed < 10.0
        ok &= good
        lines.append(f"{theta:.4f}:{stats.correlation:+.4f}/{expected:+.4f}")

    # Born frequencies of single measurements
    u = StateVector([0.6, 0.8j])
    obs = spin_observable(direction(0.9, 0.3))
    n = 100_000
    hits_x = hits_u = 0
    in_range = True
    for i in range(n):
        r1 = measure(SIGMA_Z, X_UP, HashStream(seed_split(31, i)))
        r2 = measure(obs, u, HashStream(seed_split(37, i)))
        hits_x += r1.outcome > 0
        hits_u += r2.outcome > 0
        in_range &= 0.0 <= pr(X_UP, r1.post_state) <= 1.0 and 0.0 <= pr(u, r2.post_state) <= 1.0
    p_u = pr(u, obs.eigenstate(0))
    born_ok = abs(hits_x / n - 0.5) <= 3 * math.sqrt(0.25 / n) and abs(hits_u / n - p_u) <= 3 * math.sqrt(p_u * (1 - p_u) / n)
    ok &= born_ok and in_range
    record(9, ok, f"same-axis per-trial anticorrelation={per_trial}; corr {' '.join(lines)}; Born {hits_x / n:.4f}/0.5 and {hits_u / n:.4f}/{p_u:.4f}; Pr in [0,1]={in_range}")
    assert ok


def test_criterion_10_occupancy():
    mismatches = []
    for n in range(7):
        for k in range(1, 7):
            assignments = list(itertools.product(range(k), repeat=n))
            occupancy = {tuple(a.count(s) for s in range(k)) for a in assignments}
            if count_configurations(n, k, Mode.INDIVIDUALS) != len(assignments):
                mismatches.append((n, k, "individuals"))
            if count_configurations(n, k, Mode.NON_INDIVIDUALS) != len(occupancy):
                mismatches.append((n, k, "non-individuals"))
    spots = [(count_configurations(n, k, Mode.INDIVIDUALS), count_configurations(n, k, Mode.NON_INDIVIDUALS)) for n, k in ((2, 2), (3, 2))]
    ok = not mismatches and spots == [(4, 3), (8, 4)]
    record(10, ok, f"49 (n,k) pairs vs enumeration, mismatches={mismatches}; (2,2)->{spots[0][0]}/{spots[0][1]} (3,2)->{spots[1][0]}/{spots[1][1]}")
    assert ok


def _snapshot(directory: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_criterion_11_determinism(tmp_path):
    configs = sorted(CONFIGS.glob("*.toml"))
    identical = []
    for cfg in configs:
        snaps = []
        for run in ("first", "second"):
            out = tmp_path / cfg.stem / run
            assert main(["run", str(cfg), "--out", str(out)]) == 0
            snaps.append(_snapshot(out))
        identical.append(snaps[0] == snaps[1])
    # the same EPRB experiment, serial against four workers
    text = (CONFIGS / "eprb_sixty.toml").read_text().replace("workers = 2", "workers = 1")
    serial_cfg = tmp_path / "serial.toml"
    serial_cfg.write_text(text)
    parallel_cfg = tmp_path / "parallel.toml"
    parallel_cfg.write_text(text.replace("workers = 1", "workers = 4"))
    main(["run", str(serial_cfg), "--out", str(tmp_path / "serial")])
    main(["run", str(parallel_cfg), "--out", str(tmp_path / "parallel")])
    parallel_same = _snapshot(tmp_path / "serial") == _snapshot(tmp_path / "parallel")
    ok = all(identical) and parallel_same
    record(11, ok, f"{sum(identical)}/{len(configs)} configs byte-identical on rerun; serial vs 4 workers identical={parallel_same}")
    assert ok
