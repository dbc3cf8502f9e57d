"""Dense linear algebra on finite bipartite Hilbert spaces.

Composite indices are L-major: ``k = i_L * d_R + i_R``, so the composite
space is ``np.kron(L, R)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import DimensionMismatch, InvalidState

EPS_NORM = 1e-10
EPS_HERM = 1e-10
EPS_NUM = 1e-10
EPS_PSD = 1e-9

MAX_COMPOSITE_DIM = 64


class Factor(str, Enum):
    L = "L"
    R = "R"

    @property
    def other(self) -> "Factor":
        return Factor.R if self is Factor.L else Factor.L


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ket:
    """Normalized state vector.

    Construction checks the norm; use :meth:`normalized` to rescale raw
    amplitudes first.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise InvalidState(f"ket amplitudes must be a non-empty vector, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise InvalidState("ket amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > EPS_NORM:
            raise InvalidState(f"ket has squared norm {norm2!r}, expected 1")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @classmethod
    def normalized(cls, amplitudes) -> "Ket":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0 or not np.isfinite(norm):
            raise InvalidState("cannot normalize a null vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "Ket":
        e = np.zeros(dim, dtype=complex)
        e[index] = 1.0
        return cls(e)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def bra(self) -> np.ndarray:
        return self.amplitudes.conj()

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def overlap(self, other: "Ket") -> complex:
        """``<self|other>``."""
        if other.dim != self.dim:
            raise DimensionMismatch(f"overlap of kets of dims {self.dim} and {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def same_ray(self, other: "Ket", tol: float = EPS_NUM) -> bool:
        """Equality up to a global phase."""
        return other.dim == self.dim and abs(abs(self.overlap(other)) - 1.0) <= tol

    def __repr__(self):
        return f"Ket({np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix on a single space."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", _readonly(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def expectation(self, ket: Ket) -> float:
        """Real part of ``<ket|A|ket>``."""
        if ket.dim != self.dim:
            raise DimensionMismatch(f"ket dim {ket.dim} vs operator dim {self.dim}")
        return float(np.vdot(ket.amplitudes, self.entries @ ket.amplitudes).real)

    def is_hermitian(self, tol: float = EPS_HERM) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) <= tol)

    def is_psd(self, tol: float = EPS_PSD) -> bool:
        return self.is_hermitian() and bool(np.min(np.linalg.eigvalsh(self.entries)) >= -tol)

    def __repr__(self):
        return f"Operator(dim={self.dim})"


@dataclass(frozen=True)
class BipartiteSpace:
    d_L: int
    d_R: int

    def __post_init__(self):
        for name in ("d_L", "d_R"):
            d = getattr(self, name)
            if not isinstance(d, (int, np.integer)) or d < 1:
                raise DimensionMismatch(f"{name} must be a positive integer, got {d!r}")
        if self.d_L * self.d_R > MAX_COMPOSITE_DIM:
            raise DimensionMismatch(
                f"composite dimension {self.d_L * self.d_R} exceeds {MAX_COMPOSITE_DIM}"
            )

    @property
    def dim(self) -> int:
        return self.d_L * self.d_R

    def factor_dim(self, factor: Factor) -> int:
        return self.d_L if Factor(factor) is Factor.L else self.d_R

    def embed(self, op, factor: Factor) -> np.ndarray:
        """Lift a single-factor matrix to the composite space (identity on the other factor)."""
        op = np.asarray(op, dtype=complex)
        factor = Factor(factor)
        if op.shape != (self.factor_dim(factor),) * 2:
            raise DimensionMismatch(
                f"operator of shape {op.shape} does not act on factor {factor.value} "
                f"of dim {self.factor_dim(factor)}"
            )
        if factor is Factor.L:
            return np.kron(op, np.eye(self.d_R))
        return np.kron(np.eye(self.d_L), op)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Statistical operator of the composite system.

    Hermiticity, unit trace and positivity are validated on construction.
    """

    space: BipartiteSpace
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        n = self.space.dim
        if m.shape != (n, n):
            raise DimensionMismatch(f"expected a {n}x{n} matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidState("density operator entries must be finite")
        herm_err = np.max(np.abs(m - m.conj().T))
        if herm_err > EPS_HERM:
            raise InvalidState(f"density operator is not Hermitian (error {herm_err:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > EPS_NORM:
            raise InvalidState(f"density operator has trace {tr!r}, expected 1")
        lam_min = np.min(np.linalg.eigvalsh(m))
        if lam_min < -EPS_PSD:
            raise InvalidState(f"density operator has negative eigenvalue {lam_min:.3g}")
        object.__setattr__(self, "entries", _readonly(m))

    @classmethod
    def from_ket(cls, ket: Ket, space: BipartiteSpace) -> "DensityOperator":
        if ket.dim != space.dim:
            raise DimensionMismatch(f"ket dim {ket.dim} does not match space dim {space.dim}")
        return cls(space, ket.projector())

    @classmethod
    def product(cls, rho_L, rho_R) -> "DensityOperator":
        rho_L = np.asarray(getattr(rho_L, "entries", rho_L), dtype=complex)
        rho_R = np.asarray(getattr(rho_R, "entries", rho_R), dtype=complex)
        return cls(BipartiteSpace(rho_L.shape[0], rho_R.shape[0]), np.kron(rho_L, rho_R))

    @classmethod
    def maximally_mixed(cls, space: BipartiteSpace) -> "DensityOperator":
        return cls(space, np.eye(space.dim) / space.dim)

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.entries, self.entries).real)

    def is_pure(self, tol: float = EPS_NUM) -> bool:
        return self.purity() > 1.0 - tol

    def dominant_ket(self) -> Ket:
        """Eigenvector of the largest eigenvalue; the state itself when pure."""
        _, vecs = np.linalg.eigh(self.entries)
        return Ket.normalized(vecs[:, -1])

    def marginal(self, factor: Factor) -> Operator:
        """Reduced state on ``factor``."""
        return partial_trace_R(self) if Factor(factor) is Factor.L else partial_trace_L(self)

    def as_operator(self) -> Operator:
        return Operator(self.entries)


def tensor(a: Ket, b: Ket, space: BipartiteSpace | None = None) -> Ket:
    """Product ket ``|a>|b>`` with ``a`` on L and ``b`` on R."""
    if space is not None and (a.dim, b.dim) != (space.d_L, space.d_R):
        raise DimensionMismatch(
            f"factor dims ({a.dim}, {b.dim}) do not match space ({space.d_L}, {space.d_R})"
        )
    return Ket(np.kron(a.amplitudes, b.amplitudes))


def _blocks(rho: DensityOperator) -> np.ndarray:
    sp = rho.space
    return rho.entries.reshape(sp.d_L, sp.d_R, sp.d_L, sp.d_R)


def partial_trace_L(rho: DensityOperator) -> Operator:
    """Trace out the L factor, leaving the reduced state of R."""
    return Operator(np.einsum("iaib->ab", _blocks(rho)))


def partial_trace_R(rho: DensityOperator) -> Operator:
    """Trace out the R factor, leaving the reduced state of L."""
    return Operator(np.einsum("iaja->ij", _blocks(rho)))


def sandwich(rho: DensityOperator, ket: Ket, factor: Factor = Factor.L) -> Operator:
    """Partial matrix element ``<k|rho|k>`` with ``ket`` on ``factor``.

    The result is an unnormalized operator on the other factor whose trace
    is the Born probability of the rank-1 outcome ``ket``.
    """
    factor = Factor(factor)
    if ket.dim != rho.space.factor_dim(factor):
        raise DimensionMismatch(
            f"ket dim {ket.dim} does not match factor {factor.value} "
            f"of dim {rho.space.factor_dim(factor)}"
        )
    blocks = _blocks(rho)
    k = ket.amplitudes
    if factor is Factor.L:
        return Operator(np.einsum("i,iajb,j->ab", k.conj(), blocks, k))
    return Operator(np.einsum("a,iajb,b->ij", k.conj(), blocks, k))


def contract(ket0: Ket, space: BipartiteSpace, ket: Ket, factor: Factor = Factor.L) -> np.ndarray:
    """Partial inner product ``<k|0>``: an unnormalized vector on the other factor."""
    factor = Factor(factor)
    if ket0.dim != space.dim:
        raise DimensionMismatch(f"ket dim {ket0.dim} does not match space dim {space.dim}")
    if ket.dim != space.factor_dim(factor):
        raise DimensionMismatch(
            f"ket dim {ket.dim} does not match factor {factor.value} of dim {space.factor_dim(factor)}"
        )
    psi = ket0.amplitudes.reshape(space.d_L, space.d_R)
    if factor is Factor.L:
        return ket.amplitudes.conj() @ psi
    return psi @ ket.amplitudes.conj()
