"""Projective measurements on one factor of a bipartite system.

Observables are nondegenerate and represented by their eigenbasis, so every
outcome has a rank-1 projector ``|l><l|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DimensionMismatch, ImpossibleOutcome, InvalidBasis
from .hilbert import (
    EPS_NUM,
    BipartiteSpace,
    DensityOperator,
    Factor,
    Ket,
    contract,
    partial_trace_L,
    partial_trace_R,
)

EPS_PROB = 1e-12


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Labeled orthonormal basis on one factor.

    ``vectors[i]`` is the eigenvector belonging to outcome ``labels[i]``.
    Label order is also the sampling order used by the Monte Carlo code.
    """

    factor: Factor
    vectors: tuple
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "factor", Factor(self.factor))
        vecs = tuple(v if isinstance(v, Ket) else Ket(v) for v in self.vectors)
        labels = tuple(str(lab) for lab in self.labels)
        if len(vecs) == 0:
            raise InvalidBasis("basis needs at least one vector")
        dim = vecs[0].dim
        if any(v.dim != dim for v in vecs) or len(vecs) != dim:
            raise InvalidBasis(f"need exactly {dim} vectors of dimension {dim}")
        if len(labels) != dim:
            raise InvalidBasis(f"got {len(labels)} labels for {dim} vectors")
        if len(set(labels)) != len(labels):
            raise InvalidBasis(f"labels must be unique, got {labels}")
        m = np.column_stack([v.amplitudes for v in vecs])
        gram_err = np.max(np.abs(m.conj().T @ m - np.eye(dim)))
        if gram_err > EPS_NUM:
            raise InvalidBasis(f"vectors are not orthonormal (Gram error {gram_err:.3g})")
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_columns(cls, factor, matrix, labels: Sequence[str]) -> "MeasurementBasis":
        matrix = np.asarray(matrix, dtype=complex)
        return cls(factor, tuple(Ket(matrix[:, i]) for i in range(matrix.shape[1])), tuple(labels))

    @classmethod
    def computational(cls, factor, dim: int, labels: Sequence[str] | None = None) -> "MeasurementBasis":
        if labels is None:
            labels = [str(i) for i in range(dim)]
        return cls.from_columns(factor, np.eye(dim), labels)

    @classmethod
    def rotated(cls, factor, angle: float, labels: Sequence[str] = ("+", "-")) -> "MeasurementBasis":
        """Qubit basis ``(cos a, sin a), (-sin a, cos a)``."""
        c, s = np.cos(angle), np.sin(angle)
        return cls.from_columns(factor, [[c, -s], [s, c]], labels)

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"label {label!r} not in basis {self.labels}") from None

    def vector(self, label: str) -> Ket:
        return self.vectors[self.index(label)]

    def projector(self, label: str) -> np.ndarray:
        return self.vector(label).projector()

    def matrix(self) -> np.ndarray:
        return np.column_stack([v.amplitudes for v in self.vectors])

    def commutes_with(self, other: "MeasurementBasis", tol: float = EPS_NUM) -> bool:
        """True when every pair of projectors from the two families commutes."""
        for a in self.vectors:
            pa = a.projector()
            for b in other.vectors:
                pb = b.projector()
                if np.linalg.norm(pa @ pb - pb @ pa) > tol:
                    return False
        return True

    def __repr__(self):
        return f"MeasurementBasis({self.factor.value}, labels={list(self.labels)})"


@dataclass(frozen=True)
class Outcome:
    basis: MeasurementBasis
    label: str
    probability: float


def _check(rho0: DensityOperator, basis: MeasurementBasis):
    d = rho0.space.factor_dim(basis.factor)
    if basis.dim != d:
        raise DimensionMismatch(
            f"basis of dim {basis.dim} does not fit factor {basis.factor.value} of dim {d}"
        )


def _marginal(rho0: DensityOperator, factor: Factor) -> np.ndarray:
    op = partial_trace_R(rho0) if factor is Factor.L else partial_trace_L(rho0)
    return op.entries


def _project(rho0: DensityOperator, basis: MeasurementBasis, label: str) -> np.ndarray:
    p = rho0.space.embed(basis.projector(label), basis.factor)
    return p @ rho0.entries @ p


def nonselective_update(rho0: DensityOperator, basis: MeasurementBasis) -> DensityOperator:
    """Unread measurement: the mixture of all projected branches."""
    _check(rho0, basis)
    out = sum(_project(rho0, basis, lab) for lab in basis.labels)
    return DensityOperator(rho0.space, out)


def outcome_probability(rho0: DensityOperator, basis: MeasurementBasis, label: str) -> float:
    _check(rho0, basis)
    v = basis.vector(label)
    m = _marginal(rho0, basis.factor)
    return float(np.vdot(v.amplitudes, m @ v.amplitudes).real)


def outcome_distribution(rho0: DensityOperator, basis: MeasurementBasis) -> list[Outcome]:
    """Born weights of every outcome, in label order."""
    _check(rho0, basis)
    m = _marginal(rho0, basis.factor)
    out = []
    for v, lab in zip(basis.vectors, basis.labels):
        p = float(np.vdot(v.amplitudes, m @ v.amplitudes).real)
        out.append(Outcome(basis, lab, min(max(p, 0.0), 1.0)))
    return out


def selective_update(rho0: DensityOperator, basis: MeasurementBasis, label: str) -> DensityOperator:
    """Registered outcome ``label``: project and renormalize.

    Raises
    ------
    ImpossibleOutcome
        If the outcome probability is at most ``EPS_PROB``.
    """
    p = outcome_probability(rho0, basis, label)
    if p <= EPS_PROB:
        raise ImpossibleOutcome(label, p)
    return DensityOperator(rho0.space, _project(rho0, basis, label) / p)


def pure_selective(ket0: Ket, space: BipartiteSpace, basis: MeasurementBasis, label: str):
    """Selective measurement on a pure state.

    Returns the post-measurement composite ket ``|l>|R(l)>`` and the
    normalized partner ``|R(l)>`` on the complementary factor.
    """
    if basis.dim != space.factor_dim(basis.factor):
        raise DimensionMismatch(
            f"basis of dim {basis.dim} does not fit factor {basis.factor.value}"
        )
    v = basis.vector(label)
    partial = contract(ket0, space, v, basis.factor)
    norm2 = float(np.vdot(partial, partial).real)
    if norm2 <= EPS_PROB:
        raise ImpossibleOutcome(label, norm2)
    partner = Ket(partial / np.sqrt(norm2))
    if basis.factor is Factor.L:
        composite = np.kron(v.amplitudes, partner.amplitudes)
    else:
        composite = np.kron(partner.amplitudes, v.amplitudes)
    return Ket(composite), partner


@dataclass(frozen=True)
class SymmetryReport:
    """Per-outcome answer to whether the back-contraction returns ``|l>``.

    ``partners`` maps each outcome to the label of the ``r_basis`` vector
    that equals ``|R(l)>`` up to phase, or ``None`` when there is none.
    """

    per_outcome: dict
    partners: dict

    @property
    def all(self) -> bool:
        return all(self.per_outcome.values())


def is_symmetric_case(
    ket0: Ket,
    space: BipartiteSpace,
    l_basis: MeasurementBasis,
    r_basis: MeasurementBasis | None = None,
    labels=None,
    tol: float = EPS_NUM,
) -> SymmetryReport:
    """Check the symmetric-case condition for every outcome of ``l_basis``.

    For outcome ``l`` the induced partner is ``|R(l)> ~ <l|0>``; the case is
    symmetric when ``<R(l)|0>`` normalized is ``|l>`` again (up to phase).
    Both per-outcome flags and their conjunction are reported, since the
    condition is stated per outcome. ``labels`` restricts the check to some
    outcomes.
    """
    per_outcome, partners = {}, {}
    for lab in l_basis.labels if labels is None else labels:
        v = l_basis.vector(lab)
        _, partner = pure_selective(ket0, space, l_basis, lab)
        back = contract(ket0, space, partner, l_basis.factor.other)
        norm2 = float(np.vdot(back, back).real)
        if norm2 <= EPS_PROB:
            raise ImpossibleOutcome(lab, norm2)
        per_outcome[lab] = Ket(back / np.sqrt(norm2)).same_ray(v, tol)
        partners[lab] = None
        if r_basis is not None:
            for r_lab, r_vec in zip(r_basis.labels, r_basis.vectors):
                if r_vec.same_ray(partner, tol):
                    partners[lab] = r_lab
    return SymmetryReport(per_outcome, partners)


@dataclass(frozen=True)
class ReciprocityEntry:
    """One instance of ``(|L> => |R>)  =>  (|perp R> => |perp L>)``.

    Residuals are relative: ``premise_residual`` is the part of ``<L|0>``
    orthogonal to ``|R>``, ``conclusion_residual`` the part of
    ``<perp R|0>`` orthogonal to ``|perp L>``, each divided by the vector's
    norm. ``cross_term`` is ``|<L|<perp R|0>|``.
    """

    l_label: str
    r_label: str | None
    premise_residual: float
    conclusion_residual: float
    cross_term: float
    degenerate: bool

    def holds(self, tol: float = EPS_NUM) -> bool:
        if self.degenerate or self.premise_residual > tol:
            return True
        return self.conclusion_residual <= tol


@dataclass(frozen=True)
class ReciprocityReport:
    entries: tuple

    @property
    def max_residual(self) -> float:
        vals = [
            max(e.premise_residual, e.conclusion_residual)
            for e in self.entries
            if not e.degenerate
        ]
        return max(vals, default=0.0)

    @property
    def degenerate(self) -> bool:
        return any(e.degenerate for e in self.entries)

    def holds(self, tol: float = EPS_NUM) -> bool:
        return all(e.holds(tol) for e in self.entries)


def _perp(basis: MeasurementBasis, label: str) -> tuple[str, Ket]:
    i = basis.index(label)
    return basis.labels[1 - i], basis.vectors[1 - i]


def _perp_vector(k: Ket) -> Ket:
    a, b = k.amplitudes
    return Ket(np.array([-b.conjugate(), a.conjugate()]))


def _residual(vec: np.ndarray, direction: Ket) -> float:
    norm = np.linalg.norm(vec)
    coeff = np.vdot(direction.amplitudes, vec)
    return float(np.linalg.norm(vec - coeff * direction.amplitudes) / norm)


def check_reciprocity(
    ket0: Ket,
    space: BipartiteSpace,
    l_basis: MeasurementBasis,
    r_basis: MeasurementBasis | None = None,
) -> ReciprocityReport:
    """Trace the reciprocity implication chain for every outcome of ``l_basis``.

    For each ``|L>`` the premise partner ``|R>`` is taken as the ``r_basis``
    vector closest to ``<L|0>``, or ``<L|0>`` itself when ``r_basis`` is
    None. ``|perp R>`` and ``|perp L>`` are the orthogonal qubit vectors.
    Null contractions are flagged as degenerate rather than raised.
    """
    if l_basis.dim != 2 or (r_basis is not None and r_basis.dim != 2):
        raise DimensionMismatch("reciprocity needs two-dimensional bases on both sides")
    if space.d_L != 2 or space.d_R != 2:
        raise DimensionMismatch("reciprocity needs a two-qubit space")
    if r_basis is not None and l_basis.factor is r_basis.factor:
        raise DimensionMismatch("l_basis and r_basis must act on different factors")
    other = l_basis.factor.other
    entries = []
    for lab, vec_l in zip(l_basis.labels, l_basis.vectors):
        induced = contract(ket0, space, vec_l, l_basis.factor)
        if np.linalg.norm(induced) ** 2 <= EPS_PROB:
            entries.append(ReciprocityEntry(lab, None, float("nan"), float("nan"), 0.0, True))
            continue
        if r_basis is None:
            r_lab, vec_r = None, Ket.normalized(induced)
            perp_r = _perp_vector(vec_r)
        else:
            overlaps = [abs(np.vdot(r.amplitudes, induced)) for r in r_basis.vectors]
            r_lab = r_basis.labels[int(np.argmax(overlaps))]
            vec_r = r_basis.vector(r_lab)
            _, perp_r = _perp(r_basis, r_lab)
        premise = _residual(induced, vec_r)
        _, perp_l = _perp(l_basis, lab)
        back = contract(ket0, space, perp_r, other)
        cross = float(abs(np.vdot(vec_l.amplitudes, back)))
        if np.linalg.norm(back) ** 2 <= EPS_PROB:
            entries.append(ReciprocityEntry(lab, r_lab, premise, float("nan"), cross, True))
            continue
        entries.append(
            ReciprocityEntry(lab, r_lab, premise, _residual(back, perp_l), cross, False)
        )
    return ReciprocityReport(tuple(entries))
