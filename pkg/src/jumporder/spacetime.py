"""Minkowski events, causal separation and pure Lorentz boosts.

Units have c = 1 and the metric signature is (+, -, -, -).

Which jump hypersurface comes first is carried by :class:`OrderTag`. Nothing
in this module computes an ``OrderTag`` from events: the causelike order of
jumps triggered at causally separated events is not fixed by their
coordinates, so it always enters as a caller-supplied hypothesis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import NotSpacelike

logger = logging.getLogger(__name__)

MAX_SPEED = 1.0 - 1e-12
OVERSHOOT = 0.5
# relative tolerance that keeps rounded lightlike pairs on the causal side
LIGHTCONE_RTOL = 1e-12


class OrderTag(str, Enum):
    L_FIRST = "l-first"
    R_FIRST = "r-first"

    @property
    def other(self) -> "OrderTag":
        return OrderTag.R_FIRST if self is OrderTag.L_FIRST else OrderTag.L_FIRST


@dataclass(frozen=True)
class Event:
    t: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("t", "x", "y", "z"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"event coordinate {name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, a) -> "Event":
        t, x, y, z = (float(v) for v in a)
        return cls(t, x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z])

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True, eq=False)
class Boost:
    """Pure boost with velocity ``velocity`` followed by a translation ``offset``."""

    velocity: np.ndarray
    offset: np.ndarray = None

    def __post_init__(self):
        v = np.asarray(self.velocity, dtype=float).reshape(3)
        a = np.zeros(4) if self.offset is None else np.asarray(self.offset, dtype=float).reshape(4)
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(a))):
            raise ValueError("boost parameters must be finite")
        if np.linalg.norm(v) >= MAX_SPEED:
            raise ValueError(f"boost speed {np.linalg.norm(v)!r} is not below 1")
        v.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "velocity", v)
        object.__setattr__(self, "offset", a)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.speed**2)

    def matrix(self) -> np.ndarray:
        v = self.velocity
        v2 = float(v @ v)
        lam = np.eye(4)
        if v2 == 0.0:
            return lam
        g = self.gamma
        lam[0, 0] = g
        lam[0, 1:] = -g * v
        lam[1:, 0] = -g * v
        lam[1:, 1:] += (g - 1.0) * np.outer(v, v) / v2
        return lam

    def __repr__(self):
        return f"Boost(velocity={self.velocity.tolist()}, offset={self.offset.tolist()})"


def interval(p: Event, q: Event) -> float:
    """Squared interval ``dt^2 - |dx|^2``; positive for timelike pairs."""
    d = p.as_array() - q.as_array()
    return float(d[0] ** 2 - d[1:] @ d[1:])


def causally_separated(p: Event, q: Event) -> bool:
    """True for strictly spacelike pairs; the light cone counts as causal."""
    d = p.as_array() - q.as_array()
    scale = d @ d
    return interval(p, q) < -LIGHTCONE_RTOL * scale


def apply_boost(b: Boost, p: Event) -> Event:
    return Event.from_array(b.matrix() @ p.as_array() + b.offset)


def find_order_reversing_boost(p: Event, q: Event) -> Boost:
    """Boost along the spatial separation that flips the sign of ``t_p - t_q``.

    The speed overshoots ``|dt|/|dx|`` by the factor ``1 + OVERSHOOT`` and is
    kept at most halfway between that ratio and 1. Simultaneous events get
    speed 0.5, which makes them non-simultaneous.

    Raises
    ------
    NotSpacelike
        For timelike or lightlike pairs, whose time order no boost can change.
    """
    if not causally_separated(p, q):
        raise NotSpacelike(f"interval {interval(p, q)!r} is not spacelike")
    dt = p.t - q.t
    dx = p.position - q.position
    dist = float(np.linalg.norm(dx))
    direction = dx / dist
    if dt == 0.0:
        logger.info("events are simultaneous; any boost along the separation orders them")
        return Boost(0.5 * direction)
    ratio = abs(dt) / dist
    speed = min((1.0 + OVERSHOOT) * ratio, 0.5 * (1.0 + ratio), MAX_SPEED * (1 - 1e-12))
    return Boost(np.sign(dt) * speed * direction)
