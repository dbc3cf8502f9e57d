"""Hardy-type two-qubit state and its two counterfactual values.

Basis realization: ``L2`` and ``R2`` are computational bases; ``L1`` and
``R1`` are rotated by ``alpha`` and ``beta``, so that
``|<L2+|L1+>|^2 = cos^2 alpha`` and ``|<R2+|R1->|^2 = cos^2 beta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counterfactual import Scenario
from .exceptions import DegenerateParams
from .hilbert import BipartiteSpace, DensityOperator, Factor, Ket
from .measurement import MeasurementBasis
from .spacetime import OrderTag

L_LABEL = "L2+"
L_BAR_LABEL = "L2-"
L_PRIME_LABEL = "L1+"
R_LABEL = "R2+"
R_PRIME_LABEL = "R1-"

SPACE = BipartiteSpace(2, 2)


@dataclass(frozen=True)
class HardyParams:
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = float(getattr(self, name))
            if not (0.0 < v < np.pi / 2):
                raise DegenerateParams(f"{name}={v!r} must lie strictly inside (0, pi/2)")
            object.__setattr__(self, name, v)

    @property
    def l_overlap2(self) -> float:
        """``|<l|l'>|^2``."""
        return np.cos(self.alpha) ** 2

    @property
    def l_bar_overlap2(self) -> float:
        """``|<l_bar|l'>|^2``."""
        return np.sin(self.alpha) ** 2

    @property
    def r_overlap2(self) -> float:
        """``|<r|r'>|^2``."""
        return np.cos(self.beta) ** 2


@dataclass(frozen=True, eq=False)
class HardySetup:
    params: HardyParams
    ket: Ket
    bases: dict

    space = SPACE

    @property
    def rho0(self) -> DensityOperator:
        return DensityOperator.from_ket(self.ket, SPACE)

    def scenario(self, order: OrderTag) -> Scenario:
        """Measure ``L2`` on L and ``R2`` on R; counterfactual observable ``R1``."""
        b = self.bases
        return Scenario(self.rho0, b["L2"], b["R2"], b["R1"], order)


def hardy_bases(params: HardyParams) -> dict:
    ca, sa = np.cos(params.alpha), np.sin(params.alpha)
    cb, sb = np.cos(params.beta), np.sin(params.beta)
    return {
        "L2": MeasurementBasis.computational(Factor.L, 2, ["L2+", "L2-"]),
        "L1": MeasurementBasis.from_columns(Factor.L, [[ca, -sa], [sa, ca]], ["L1+", "L1-"]),
        "R2": MeasurementBasis.computational(Factor.R, 2, ["R2+", "R2-"]),
        "R1": MeasurementBasis.from_columns(Factor.R, [[-sb, cb], [cb, sb]], ["R1+", "R1-"]),
    }


def build_hardy(params: HardyParams) -> HardySetup:
    """``|Psi> = |l'>|r'> - <l_bar|l'><r|r'> |l_bar>|r>``, normalized."""
    bases = hardy_bases(params)
    l_bar = bases["L2"].vector(L_BAR_LABEL)
    l_prime = bases["L1"].vector(L_PRIME_LABEL)
    r = bases["R2"].vector(R_LABEL)
    r_prime = bases["R1"].vector(R_PRIME_LABEL)
    coeff = l_bar.overlap(l_prime) * r.overlap(r_prime)
    psi = np.kron(l_prime.amplitudes, r_prime.amplitudes) - coeff * np.kron(
        l_bar.amplitudes, r.amplitudes
    )
    return HardySetup(params, Ket.normalized(psi), bases)


def closed_form_rL(params: HardyParams) -> float:
    """Counterfactual ``P(r')`` when the R jump precedes the L jump."""
    a, b, c = params.l_overlap2, params.l_bar_overlap2, params.r_overlap2
    return (a + b * (1.0 - c) ** 2) / (a + b * (1.0 - c))


def closed_form_Lr(params: HardyParams) -> float:
    """Counterfactual ``P(r')`` when the L jump precedes the R jump: always 1."""
    HardyParams(params.alpha, params.beta)
    return 1.0
