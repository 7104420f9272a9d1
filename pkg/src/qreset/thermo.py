"""Entropy-production accounting for a reset run and the checks built on it.

Everything is in k_B = 1 units with a single thermal bath; heat is in k_BT
when T = 1.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .qmath import coherence_decomposition, relative_entropy, trace_distance, von_neumann_entropy

SECOND_LAW_TOL = 1e-6


@dataclass(frozen=True)
class ThermoReport:
    Q: float
    W: float
    S0: float
    Stau: float
    EF: float
    EP: float
    D0: float
    Dtau: float
    kl: float
    coherence: float
    eps_final: float

    def as_dict(self) -> dict:
        return asdict(self)


def entropy_flow_single_bath(Q: float, T: float = 1.0) -> float:
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    return Q / T


def entropy_production(EF, S0, Stau):
    return EF + Stau - S0


def landauer_bound(S0, Stau, T: float = 1.0):
    """Q_Landauer = k_B T [S(rho0) - S(rho_tau)]."""
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    return T * (S0 - Stau)


def mismatch_residual(EP_rho, EP_alpha, D0, Dtau):
    """(EP[rho0] - EP[alpha0]) - (D[rho0||alpha0] - D[rho_tau||alpha_tau]); zero in theory."""
    return (EP_rho - EP_alpha) - (D0 - Dtau)


def second_law_check(EP, tol: float = SECOND_LAW_TOL) -> bool:
    return bool(np.all(np.asarray(EP) >= -tol))


def report(rho0, rho_tau, heat, alpha0, alpha_tau, target, work: float = 0.0, T: float = 1.0) -> ThermoReport:
    """Per-state thermodynamic record of one reset run.

    ``alpha0``/``alpha_tau`` are the minimally dissipative input of the same
    protocol and its image; ``target`` is the desired output state.
    """
    S0 = von_neumann_entropy(rho0)
    Stau = von_neumann_entropy(rho_tau)
    EF = entropy_flow_single_bath(float(heat), T)
    kl, coh = coherence_decomposition(rho0, alpha0)
    return ThermoReport(
        Q=float(heat),
        W=float(work),
        S0=S0,
        Stau=Stau,
        EF=EF,
        EP=entropy_production(EF, S0, Stau),
        D0=relative_entropy(rho0, alpha0),
        Dtau=relative_entropy(rho_tau, alpha_tau),
        kl=kl,
        coherence=coh,
        eps_final=trace_distance(rho_tau, target),
    )
