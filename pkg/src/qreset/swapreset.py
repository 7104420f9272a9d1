"""Reset by swapping the system with one qubit of a Gibbs bath.

The swap replaces rho0 by the bath state gamma, so every thermodynamic
quantity has a closed form. Energies are in units of k_BT.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .efvector import EntropyFlowVector
from .qmath import PAULI_Z, von_neumann_entropy


@dataclass(frozen=True)
class GibbsBathQubit:
    """gamma = exp(-beta H_b)/Z_b with H_b = -Eb sigma_z."""

    Eb: float
    beta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def hamiltonian(self) -> np.ndarray:
        return -self.Eb * PAULI_Z

    @property
    def log_populations(self) -> np.ndarray:
        """(ln g0, ln g1) for the |0>, |1> populations, computed without overflow."""
        x = self.beta * self.Eb
        log_z = np.logaddexp(x, -x)
        return np.array([x - log_z, -x - log_z])

    @property
    def bloch(self) -> np.ndarray:
        return np.array([0.0, 0.0, np.tanh(self.beta * self.Eb)])

    @property
    def gamma(self) -> np.ndarray:
        return np.diag(np.exp(self.log_populations)).astype(complex)

    @property
    def log_gamma(self) -> np.ndarray:
        return np.diag(self.log_populations).astype(complex)


def gibbs_qubit(Eb: float, beta: float = 1.0) -> GibbsBathQubit:
    return GibbsBathQubit(Eb, beta)


def _tr(a, b) -> float:
    return float(np.trace(np.asarray(a) @ np.asarray(b)).real)


def swap_heat(rho0, bath: GibbsBathQubit) -> float:
    """Heat into the bath in units of k_BT: tr(gamma ln gamma) - tr(rho0 ln gamma)."""
    ln_g = bath.log_gamma
    return _tr(bath.gamma, ln_g) - _tr(rho0, ln_g)


def swap_entropy_change(rho0, bath: GibbsBathQubit) -> float:
    """System entropy change S(gamma) - S(rho0)."""
    return von_neumann_entropy(bath.gamma) - von_neumann_entropy(rho0)


def swap_entropy_production(rho0, bath: GibbsBathQubit) -> float:
    """Q/T + dS_sys, which equals D[rho0 || gamma]."""
    return swap_heat(rho0, bath) + swap_entropy_change(rho0, bath)


def swap_entropy_flow_vector(bath: GibbsBathQubit) -> EntropyFlowVector:
    # ln gamma = c0 I + beta*Eb sigma_z, so EF(a) = tr(g ln g) - c0 - beta*Eb a_z.
    ln_g0, ln_g1 = bath.log_populations
    g = np.exp(bath.log_populations)
    ef_mixed = float(g @ bath.log_populations - 0.5 * (ln_g0 + ln_g1))
    return EntropyFlowVector(ef_mixed, np.array([0.0, 0.0, -2.0 * bath.beta * bath.Eb]))
