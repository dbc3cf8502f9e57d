"""Conditional and counterfactual probabilities under both jump orderings.

Setting: a measurement of ``l_basis`` on L and a selective measurement of
``r_basis`` on R with registered outcome ``r``. The counterfactual question
is the probability of outcome ``r'`` had a non-commuting ``r_prime_basis``
been measured on R instead. The answer depends on which jump is taken to
come first:

* ``R_FIRST``: the L measurement has not yet acted, so R is in its initial
  reduced state ``Tr_L rho0``.
* ``L_FIRST``: the unread L measurement already split the state into
  branches ``l``; conditioning on ``r`` weights those branches by
  ``P(l|r)``.

Conditional probabilities of actual outcomes are the same for both
orderings; counterfactual ones are not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ClosedFormMismatch, DimensionMismatch, ImpossibleCondition, InvalidBasis
from .hilbert import (
    EPS_NUM,
    BipartiteSpace,
    DensityOperator,
    Factor,
    Ket,
    Operator,
    contract,
    partial_trace_L,
    sandwich,
)
from .measurement import (
    EPS_PROB,
    MeasurementBasis,
    outcome_probability,
    selective_update,
)
from .spacetime import OrderTag


def _check_pair(rho0: DensityOperator, l_basis: MeasurementBasis, r_basis: MeasurementBasis):
    if l_basis.factor is not Factor.L or r_basis.factor is not Factor.R:
        raise DimensionMismatch("l_basis must act on L and r_basis on R")
    if l_basis.dim != rho0.space.d_L or r_basis.dim != rho0.space.d_R:
        raise DimensionMismatch(
            f"bases of dims ({l_basis.dim}, {r_basis.dim}) do not fit "
            f"space ({rho0.space.d_L}, {rho0.space.d_R})"
        )


@dataclass(frozen=True, eq=False)
class Scenario:
    """Initial state, the three observables and an ordering hypothesis."""

    rho0: DensityOperator
    l_basis: MeasurementBasis
    r_basis: MeasurementBasis
    r_prime_basis: MeasurementBasis
    order: OrderTag

    def __post_init__(self):
        object.__setattr__(self, "order", OrderTag(self.order))
        _check_pair(self.rho0, self.l_basis, self.r_basis)
        if self.r_prime_basis.factor is not Factor.R or self.r_prime_basis.dim != self.rho0.space.d_R:
            raise DimensionMismatch("r_prime_basis must act on R")
        if self.r_basis.commutes_with(self.r_prime_basis):
            raise InvalidBasis("r_basis and r_prime_basis must not commute")

    def with_order(self, order: OrderTag) -> "Scenario":
        return Scenario(self.rho0, self.l_basis, self.r_basis, self.r_prime_basis, order)


def joint_prob(
    rho0: DensityOperator,
    l_basis: MeasurementBasis,
    r_basis: MeasurementBasis,
    l_label: str,
    r_label: str,
) -> float:
    """``<l|<r|rho0|r>|l>``, the probability of the outcome pair."""
    _check_pair(rho0, l_basis, r_basis)
    lr = np.kron(l_basis.vector(l_label).amplitudes, r_basis.vector(r_label).amplitudes)
    return float(np.vdot(lr, rho0.entries @ lr).real)


def _r_probability(rho0, r_basis, r_label) -> float:
    p_r = outcome_probability(rho0, r_basis, r_label)
    if p_r <= EPS_PROB:
        raise ImpossibleCondition(r_label, p_r)
    return p_r


def _conditional_r_first(rho0, l_basis, r_basis, l_label, r_label) -> float:
    _r_probability(rho0, r_basis, r_label)
    after_r = selective_update(rho0, r_basis, r_label)
    return outcome_probability(after_r, l_basis, l_label)


def _branch_joint(rho0, l_basis, r_basis, r_label) -> dict:
    """``P(l) * P(r | l)`` per L outcome, from the L-first sequence."""
    out = {}
    for lab in l_basis.labels:
        p_l = outcome_probability(rho0, l_basis, lab)
        if p_l <= EPS_PROB:
            out[lab] = 0.0
            continue
        after_l = selective_update(rho0, l_basis, lab)
        out[lab] = p_l * outcome_probability(after_l, r_basis, r_label)
    return out


def _conditional_l_first(rho0, l_basis, r_basis, l_label, r_label) -> float:
    counts = _branch_joint(rho0, l_basis, r_basis, r_label)
    total = sum(counts.values())
    if total <= EPS_PROB:
        raise ImpossibleCondition(r_label, total)
    return counts[l_basis.labels[l_basis.index(l_label)]] / total


def conditional_prob(
    rho0: DensityOperator,
    l_basis: MeasurementBasis,
    r_basis: MeasurementBasis,
    l_label: str,
    r_label: str,
    order: OrderTag,
) -> float:
    """``P(l|r)`` under the given ordering hypothesis.

    ``R_FIRST`` updates on ``r`` and reads the Born weight of ``l``.
    ``L_FIRST`` runs every ``l`` branch first and forms the ratio
    ``N_lr / sum_l N_lr`` of expected counts.
    """
    _check_pair(rho0, l_basis, r_basis)
    if OrderTag(order) is OrderTag.R_FIRST:
        return _conditional_r_first(rho0, l_basis, r_basis, l_label, r_label)
    return _conditional_l_first(rho0, l_basis, r_basis, l_label, r_label)


def counterfactual_state(
    rho0: DensityOperator,
    l_basis: MeasurementBasis,
    r_basis: MeasurementBasis,
    r_label: str,
    order: OrderTag,
) -> DensityOperator:
    """State of R in which the counterfactual measurement would be made.

    Returned as a one-factor :class:`DensityOperator` (``d_L = 1``).
    L outcomes with Born weight at most ``EPS_PROB`` are left out of the
    ``L_FIRST`` mixture.
    """
    _check_pair(rho0, l_basis, r_basis)
    space_R = BipartiteSpace(1, rho0.space.d_R)
    if OrderTag(order) is OrderTag.R_FIRST:
        return DensityOperator(space_R, partial_trace_L(rho0).entries)
    _r_probability(rho0, r_basis, r_label)
    mixture = np.zeros((rho0.space.d_R,) * 2, dtype=complex)
    for lab, vec in zip(l_basis.labels, l_basis.vectors):
        p_l = outcome_probability(rho0, l_basis, lab)
        if p_l <= EPS_PROB:
            continue
        weight = conditional_prob(rho0, l_basis, r_basis, lab, r_label, OrderTag.L_FIRST)
        mixture += weight * sandwich(rho0, vec, Factor.L).entries / p_l
    return DensityOperator(space_R, mixture)


def closed_form_pure_r_first(ket0: Ket, space: BipartiteSpace, r_prime: Ket) -> float:
    """``Tr_L <r'|0><0|r'>`` for a pure initial state."""
    v = contract(ket0, space, r_prime, Factor.R)
    return float(np.vdot(v, v).real)


def closed_form_pure_l_first(
    ket0: Ket, space: BipartiteSpace, l_basis: MeasurementBasis, r: Ket, r_prime: Ket
) -> float:
    """L-first counterfactual probability for a pure state, by amplitude contraction."""
    psi = ket0.amplitudes.reshape(space.d_L, space.d_R)
    v_r = contract(ket0, space, r, Factor.R)
    p_r = float(np.vdot(v_r, v_r).real)
    if p_r <= EPS_PROB:
        raise ImpossibleCondition("r", p_r)
    total = 0.0
    for vec in l_basis.vectors:
        u = vec.amplitudes.conj() @ psi
        p_l = float(np.vdot(u, u).real)
        if p_l <= EPS_PROB:
            continue
        a = np.vdot(r.amplitudes, u)
        b = np.vdot(r_prime.amplitudes, u)
        total += abs(a * b) ** 2 / (p_r * p_l)
    return total


def _pipeline(scenario: Scenario, r_label: str, r_prime_label: str) -> float:
    state = counterfactual_state(
        scenario.rho0, scenario.l_basis, scenario.r_basis, r_label, scenario.order
    )
    r_prime = scenario.r_prime_basis.vector(r_prime_label)
    return Operator(state.entries).expectation(r_prime)


def counterfactual_prob(scenario: Scenario, r_label: str, r_prime_label: str) -> float:
    """Probability of ``r'`` had ``r_prime_basis`` been measured instead of ``r_basis``.

    For a pure initial state the value is cross-checked against the
    amplitude-contraction closed form of the same ordering.

    Raises
    ------
    ImpossibleCondition
        ``L_FIRST`` with a registered outcome ``r`` of (near) zero probability.
    ClosedFormMismatch
        If the two computation paths disagree by more than ``EPS_NUM``.
    """
    value = _pipeline(scenario, r_label, r_prime_label)
    rho0 = scenario.rho0
    if rho0.is_pure():
        ket0 = rho0.dominant_ket()
        r_prime = scenario.r_prime_basis.vector(r_prime_label)
        if scenario.order is OrderTag.R_FIRST:
            check = closed_form_pure_r_first(ket0, rho0.space, r_prime)
        else:
            check = closed_form_pure_l_first(
                ket0, rho0.space, scenario.l_basis, scenario.r_basis.vector(r_label), r_prime
            )
        if abs(check - value) > EPS_NUM:
            raise ClosedFormMismatch(
                f"pipeline {value!r} vs closed form {check!r} ({scenario.order.value})"
            )
    return value


def counterfactual_prob_qubits(scenario: Scenario, r_label: str, r_prime_label: str) -> float:
    """Two-outcome expansion of the L-first value: ``f(l) + f(l_bar)``.

    Only for ``d_L = 2``; the generic sum in :func:`counterfactual_prob`
    must agree with it.
    """
    rho0, lb, rb = scenario.rho0, scenario.l_basis, scenario.r_basis
    if rho0.space.d_L != 2:
        raise DimensionMismatch("two-outcome expansion needs d_L = 2")
    r = rb.vector(r_label).amplitudes
    rp = scenario.r_prime_basis.vector(r_prime_label).amplitudes
    blocks = rho0.entries.reshape(2, rho0.space.d_R, 2, rho0.space.d_R)
    rho_R = np.einsum("iaib->ab", blocks)
    rho_L = np.einsum("iaja->ij", blocks)
    p_r = float(np.vdot(r, rho_R @ r).real)
    if p_r <= EPS_PROB:
        raise ImpossibleCondition(r_label, p_r)

    def f(vec):
        lv = vec.amplitudes
        p_l = float(np.vdot(lv, rho_L @ lv).real)
        if p_l <= EPS_PROB:
            return 0.0
        side = np.einsum("i,iajb,j->ab", lv.conj(), blocks, lv)
        return float((np.vdot(r, side @ r) * np.vdot(rp, side @ rp)).real) / (p_r * p_l)

    l, l_bar = lb.vectors
    if scenario.order is OrderTag.R_FIRST:
        return float(np.vdot(rp, rho_R @ rp).real)
    return f(l) + f(l_bar)


def ordering_gap(
    rho0: DensityOperator,
    l_basis: MeasurementBasis,
    r_basis: MeasurementBasis,
    r_prime_basis: MeasurementBasis,
    r_label: str,
    r_prime_label: str,
) -> float:
    """``P^cf(L_FIRST) - P^cf(R_FIRST)``."""
    sc = Scenario(rho0, l_basis, r_basis, r_prime_basis, OrderTag.L_FIRST)
    l_first = counterfactual_prob(sc, r_label, r_prime_label)
    r_first = counterfactual_prob(sc.with_order(OrderTag.R_FIRST), r_label, r_prime_label)
    return l_first - r_first
