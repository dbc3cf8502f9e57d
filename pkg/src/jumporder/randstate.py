"""Random states, bases and events for property checks."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .hilbert import BipartiteSpace, DensityOperator, Factor, Ket
from .measurement import MeasurementBasis
from .spacetime import Boost, Event


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.eye(1, dtype=complex)


def random_ket(dim: int, rng: np.random.Generator) -> Ket:
    return Ket.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_density(space: BipartiteSpace, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Ginibre-distributed state of the given rank (full rank by default)."""
    n = space.dim
    k = n if rank is None else rank
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(space, m / np.trace(m).real)


def random_basis(factor, dim: int, rng: np.random.Generator, prefix: str | None = None) -> MeasurementBasis:
    factor = Factor(factor)
    prefix = factor.value if prefix is None else prefix
    return MeasurementBasis.from_columns(
        factor, random_unitary(dim, rng), [f"{prefix}{i}" for i in range(dim)]
    )


def random_schmidt_state(rng: np.random.Generator):
    """Two-qubit pure state with its Schmidt bases.

    Returns ``(ket, l_basis, r_basis)``; the state is in the symmetric case
    with respect to these bases.
    """
    u_l, u_r = random_unitary(2, rng), random_unitary(2, rng)
    theta = rng.uniform(0.05, np.pi / 2 - 0.05)
    psi = np.cos(theta) * np.kron(u_l[:, 0], u_r[:, 0]) + np.sin(theta) * np.kron(u_l[:, 1], u_r[:, 1])
    l_basis = MeasurementBasis.from_columns(Factor.L, u_l, ["L+", "L-"])
    r_basis = MeasurementBasis.from_columns(Factor.R, u_r, ["R+", "R-"])
    return Ket.normalized(psi), l_basis, r_basis


def random_boost(rng: np.random.Generator, max_speed: float = 0.99) -> Boost:
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    return Boost(rng.uniform(0, max_speed) * direction, rng.normal(size=4))


def random_event(rng: np.random.Generator, scale: float = 1.0) -> Event:
    return Event.from_array(rng.normal(scale=scale, size=4))


def random_pair(rng: np.random.Generator, kind: str) -> tuple[Event, Event]:
    """Event pair with ``kind`` in {"spacelike", "timelike", "lightlike"} separation."""
    p = random_event(rng)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    dist = rng.uniform(0.1, 3.0)
    if kind == "spacelike":
        dt = rng.uniform(-0.95, 0.95) * dist
    elif kind == "timelike":
        dt = rng.choice([-1, 1]) * rng.uniform(1.05, 3.0) * dist
    elif kind == "lightlike":
        dt = rng.choice([-1, 1]) * dist
    else:
        raise ValueError(f"unknown separation kind {kind!r}")
    q = Event.from_array(p.as_array() + np.concatenate([[dt], dist * direction]))
    return p, q
