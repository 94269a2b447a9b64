"""Finite-dimensional quantum systems, Born-rule measurement and EPRB trials.

States are normalized complex vectors. An observable carries its matrix and
a declared orthonormal eigenbasis; measurement samples that basis with Born
probabilities using an explicit uniform stream (anything with ``random()``).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional

import numpy as np

from .errors import DimensionMismatch, NonUnitDirection
from .qset import MacroAtom, QSet, Species, qset
from .seeding import HashStream, trial_draws

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
BASIS_TOL = 1e-10
# Born weights below this are rounding noise from the eigenbasis, not physics
PROB_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(a))
        if a.size == 0 or not np.isfinite(norm) or norm == 0.0:
            raise ValueError("a state needs a nonzero finite amplitude vector")
        a = a / norm
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __getitem__(self, i):
        return self.amplitudes[i]

    def __repr__(self):
        return f"StateVector({np.array2string(self.amplitudes, precision=6)})"


def basis_state(dim: int, k: int) -> StateVector:
    a = np.zeros(dim, dtype=complex)
    a[k] = 1.0
    return StateVector(a)


def tensor(u: StateVector, v: StateVector) -> StateVector:
    return StateVector(np.kron(u.amplitudes, v.amplitudes))


Z_UP = StateVector([1, 0])
Z_DOWN = StateVector([0, 1])
X_UP = StateVector([1, 1])
X_DOWN = StateVector([1, -1])


def _same_dim(u: StateVector, v: StateVector):
    if u.dim != v.dim:
        raise DimensionMismatch(f"dimensions {u.dim} and {v.dim} differ")


def pr(u: StateVector, v: StateVector) -> float:
    """Born value ``|<u|v>|**2``."""
    _same_dim(u, v)
    return min(1.0, float(abs(np.vdot(u.amplitudes, v.amplitudes)) ** 2))


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix with a declared eigenbasis (columns of ``eigvecs``)."""

    matrix: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    name: str = "O"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        vals = np.array(self.eigvals, dtype=float)
        vecs = np.array(self.eigvecs, dtype=complex)
        d = m.shape[0]
        if m.shape != (d, d) or vecs.shape != (d, d) or vals.shape != (d,):
            raise DimensionMismatch("matrix, eigenvalues and eigenbasis must agree in dimension")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("observable matrix is not Hermitian")
        if np.max(np.abs(vecs.conj().T @ vecs - np.eye(d))) > BASIS_TOL:
            raise ValueError("declared eigenbasis is not orthonormal")
        if np.max(np.abs(m @ vecs - vecs * vals)) > BASIS_TOL:
            raise ValueError("declared basis does not diagonalize the matrix")
        for arr in (m, vals, vecs):
            arr.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "eigvals", vals)
        object.__setattr__(self, "eigvecs", vecs)

    @classmethod
    def from_matrix(cls, matrix, name: str = "O") -> "Observable":
        vals, vecs = np.linalg.eigh(np.asarray(matrix, dtype=complex))
        return cls(matrix, vals, vecs, name)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenstate(self, k: int) -> StateVector:
        return StateVector(self.eigvecs[:, k])

    def born(self, u: StateVector) -> np.ndarray:
        if u.dim != self.dim:
            raise DimensionMismatch(f"state of dimension {u.dim} for observable of dimension {self.dim}")
        p = np.abs(self.eigvecs.conj().T @ u.amplitudes) ** 2
        p[p < PROB_FLOOR] = 0.0
        return p / p.sum()


PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def unit_direction(n) -> np.ndarray:
    v = np.asarray(n, dtype=float).reshape(3)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise NonUnitDirection(f"|n| = {np.linalg.norm(v):.12g}")
    return v / np.linalg.norm(v)


def direction(theta: float, phi: float = 0.0) -> np.ndarray:
    """Unit vector from polar angle ``theta`` and azimuth ``phi``."""
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def _spin_basis(n: np.ndarray) -> np.ndarray:
    # closed-form eigenvectors of n.sigma, columns ordered (+1, -1)
    x, y, z = n
    theta = math.atan2(math.hypot(x, y), z)
    phi = math.atan2(y, x) if abs(x) + abs(y) > 0 else 0.0
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, -s], [s * e, c * e]], dtype=complex)


def spin_observable(n) -> Observable:
    """``n . sigma`` with eigenvalues (+1, -1)."""
    v = unit_direction(n)
    matrix = sum(c * p for c, p in zip(v, PAULI))
    return Observable(matrix, np.array([1.0, -1.0]), _spin_basis(v), name=f"spin{tuple(np.round(v, 12))}")


SIGMA_X = spin_observable([1, 0, 0])
SIGMA_Y = spin_observable([0, 1, 0])
SIGMA_Z = spin_observable([0, 0, 1])


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    observable: str
    outcome: float
    post_state: StateVector
    probability: float
    macro: Optional[MacroAtom] = None


def _draw(rng) -> float:
    if isinstance(rng, (int, np.integer)):
        rng = HashStream(int(rng))
    return float(rng.random())


def _cumulative(p: np.ndarray) -> np.ndarray:
    cum = np.cumsum(p)
    return cum / cum[-1]


def _sample(p: np.ndarray, draw: float) -> int:
    # first index whose cumulative weight exceeds the draw; zero weights are never hit
    return min(int(np.searchsorted(_cumulative(p), draw, side="right")), len(p) - 1)


def measure(obs: Observable, u: StateVector, rng) -> MeasurementRecord:
    """Sample the declared eigenbasis with Born weights.

    ``rng`` is a stream with ``random()`` or an integer seed for a
    :class:`~quasiphys.seeding.HashStream`.
    """
    p = obs.born(u)
    k = _sample(p, _draw(rng))
    return MeasurementRecord(obs.name, float(obs.eigvals[k]), obs.eigenstate(k), float(p[k]))


def evolve(ham: Observable, u: StateVector, dt: float) -> StateVector:
    """``exp(-i H dt) u`` with hbar = 1, through the declared eigendecomposition."""
    if u.dim != ham.dim:
        raise DimensionMismatch(f"state of dimension {u.dim} for Hamiltonian of dimension {ham.dim}")
    if dt == 0:
        return u
    v = ham.eigvecs
    coeffs = np.exp(-1j * ham.eigvals * dt) * (v.conj().T @ u.amplitudes)
    return StateVector(v @ coeffs)


# two spins ------------------------------------------------------------------


def singlet() -> StateVector:
    """``(|+-> - |-+>)/sqrt(2)`` in the basis ``|++>, |+->, |-+>, |-->``."""
    r = 1 / math.sqrt(2)
    return StateVector([0, r, -r, 0])


def lift_pair(a: Observable, b: Observable) -> tuple[Observable, Observable]:
    """``a (x) I`` and ``I (x) b`` on the product space, both declared on the basis
    ``{a_i (x) b_j}`` so that collapsing one factor leaves the other in an eigenstate."""
    basis = np.kron(a.eigvecs, b.eigvecs)
    ones_a, ones_b = np.ones(a.dim), np.ones(b.dim)
    left = Observable(np.kron(a.matrix, np.eye(b.dim)), np.kron(a.eigvals, ones_b), basis, f"{a.name}(x)I")
    right = Observable(np.kron(np.eye(a.dim), b.matrix), np.kron(ones_a, b.eigvals), basis, f"I(x){b.name}")
    return left, right


@lru_cache(maxsize=64)
def _lifted(a: tuple, b: tuple) -> tuple[Observable, Observable]:
    return lift_pair(spin_observable(a), spin_observable(b))


def _key(n) -> tuple:
    return tuple(float(x) for x in unit_direction(n))


def joint_spin_measure(psi: StateVector, a, b, rng) -> tuple[int, int]:
    """Measure spin along ``a`` on the first factor, then along ``b`` on the second."""
    if psi.dim != 4:
        raise DimensionMismatch("joint spin measurement needs a two-spin state")
    stream = HashStream(int(rng)) if isinstance(rng, (int, np.integer)) else rng
    left, right = _lifted(_key(a), _key(b))
    first = measure(left, psi, stream)
    second = measure(right, first.post_state, stream)
    return int(first.outcome), int(second.outcome)


@dataclass
class EPRBStats:
    trials: int
    counts: dict  # (outcome_a, outcome_b) -> count
    correlation: float
    std_error: float
    outcomes: Optional[np.ndarray] = field(default=None, repr=False)

    def prob(self, pair) -> float:
        return self.counts.get(pair, 0) / self.trials


PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _joint_tables(psi: StateVector, a, b):
    """Outcome tables of the two sequential measurements in :func:`joint_spin_measure`."""
    left, right = _lifted(_key(a), _key(b))
    p1 = left.born(psi)
    cum1 = _cumulative(p1)
    cum2 = np.empty((4, 4))
    for k in range(4):
        cum2[k] = _cumulative(right.born(left.eigenstate(k)))
    return left.eigvals.astype(int), right.eigvals.astype(int), cum1, cum2


def _eprb_chunk(args) -> np.ndarray:
    amplitudes, a, b, seed, start, stop = args
    psi = StateVector(amplitudes)
    va, vb, cum1, cum2 = _joint_tables(psi, a, b)
    draws = trial_draws(seed, start, stop, 2)
    k1 = np.minimum(np.sum(cum1[None, :] <= draws[:, 0:1], axis=1), 3)
    k2 = np.minimum(np.sum(cum2[k1] <= draws[:, 1:2], axis=1), 3)
    return np.stack([va[k1], vb[k2]], axis=1).astype(np.int8)


def eprb_statistics(
    a,
    b,
    trials: int,
    seed: int,
    psi: Optional[StateVector] = None,
    workers: int = 1,
    chunk: int = 25_000,
    keep_outcomes: bool = False,
) -> EPRBStats:
    """Monte Carlo estimate of the spin correlation ``E[A B]``.

    Trial ``i`` uses the stream ``HashStream(seed_split(seed, i))`` exactly as
    ``joint_spin_measure(psi, a, b, stream)`` would, so results do not depend
    on ``workers`` or ``chunk``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    psi = singlet() if psi is None else psi
    a, b = _key(a), _key(b)
    jobs = [(psi.amplitudes, a, b, seed, s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_eprb_chunk, jobs))
    else:
        parts = [_eprb_chunk(j) for j in jobs]
    outcomes = np.concatenate(parts)
    counts = {pair: int(np.sum((outcomes[:, 0] == pair[0]) & (outcomes[:, 1] == pair[1]))) for pair in PAIRS}
    products = outcomes[:, 0].astype(float) * outcomes[:, 1]
    corr = float(products.mean())
    se = float(math.sqrt(max(1.0 - corr * corr, 0.0) / trials))
    return EPRBStats(trials, counts, corr, se, outcomes if keep_outcomes else None)


# systems ----------------------------------------------------------------------


@dataclass(frozen=True)
class IntrinsicProps:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def arity(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class QuantumSystem:
    """Labelled particles with piecewise-constant (props, state) assignments.

    ``assignment[p]`` is a list of ``(t_start, props, state)`` sorted by time.
    """

    particles: tuple
    interval: tuple
    dim: int
    observables: Mapping
    assignment: Mapping

    def __post_init__(self):
        if not self.particles:
            raise ValueError("a quantum system needs at least one particle")
        if set(self.assignment) != set(self.particles):
            raise ValueError("assignment must cover exactly the particles")
        arities = {props.arity for segs in self.assignment.values() for _, props, _ in segs}
        if len(arities) > 1:
            raise ValueError("intrinsic properties must have a fixed arity")
        for segs in self.assignment.values():
            for _, _, u in segs:
                if u.dim != self.dim:
                    raise DimensionMismatch("assigned state has the wrong dimension")
        for obs in self.observables.values():
            if obs.dim != self.dim:
                raise DimensionMismatch("observable has the wrong dimension")

    def at(self, p, t: float) -> tuple[IntrinsicProps, StateVector]:
        segs = self.assignment[p]
        current = segs[0]
        for seg in segs:
            if seg[0] <= t:
                current = seg
        return current[1], current[2]


def _state_label(u: StateVector) -> str:
    parts = [f"{z.real:.12g}{z.imag:+.12g}j" for z in np.round(u.amplitudes, 12) + 0.0]
    return ",".join(parts)


def member_species(species: Species, props: IntrinsicProps, u: StateVector) -> Species:
    """The indistinguishability class of the triple (m-atom, props, state)."""
    return Species(f"{species.label}<{','.join(f'{v:.12g}' for v in props.values)};{_state_label(u)}>")


@dataclass(frozen=True, eq=False)
class QuasiQuantumSystem:
    ensemble: QSet
    species: Species
    props: IntrinsicProps
    state: StateVector
    members: QSet

    @property
    def n(self) -> int:
        return self.members.count_of(member_species(self.species, self.props, self.state))


def ensemble(species, props: IntrinsicProps, u: StateVector, n: int) -> QuasiQuantumSystem:
    """``n`` particles sharing species, intrinsic properties and state."""
    if n < 1:
        raise ValueError("an ensemble needs n >= 1")
    sp = species if isinstance(species, Species) else Species(species)
    props = props if isinstance(props, IntrinsicProps) else IntrinsicProps(props)
    members = qset({member_species(sp, props, u): n})
    return QuasiQuantumSystem(qset({sp: n}), sp, props, u, members)


def collapse_ensemble(x: QuasiQuantumSystem, obs: Observable, rng) -> list[MeasurementRecord]:
    """Measure every member independently; each record gets a freshly minted macro-atom."""
    if obs.dim != x.state.dim:
        raise DimensionMismatch("observable does not act on the member state")
    stream = HashStream(int(rng)) if isinstance(rng, (int, np.integer)) else rng
    records = []
    for k in range(x.n):
        r = measure(obs, x.state, stream)
        records.append(MeasurementRecord(r.observable, r.outcome, r.post_state, r.probability, MacroAtom(f"{x.species.label}#{k}")))
    return records
