"""Driven qubit coupled weakly to a thermal bath: time-dependent Lindblad evolution
with heat, work and entropy bookkeeping.

Units: k_B = hbar = 1 and beta = 1 by default, so energies are in k_BT and
times in beta*hbar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .qmath import (
    IDENTITY,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    bloch_to_density,
    density_to_bloch,
    trace_distance,
    validate_state,
    von_neumann_entropy,
)

ROTATING_GAP = "rotating-gap"
FIXED_ANGLE_GAP = "fixed-angle-gap"
RELAXATION = "relaxation"
CUSTOM = "custom"

POSITIVITY_ATOL = 1e-8


class IntegrationError(RuntimeError):
    """The integrator left the set of density matrices."""


@dataclass(frozen=True)
class ControlParams:
    E: float
    theta: float

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError(f"energy gap must be positive, got {self.E}")


@dataclass(frozen=True)
class ProtocolSchedule:
    """Control protocol t -> (E_t, theta_t) on [0, tau].

    Built-in variants are closed forms that extend smoothly past both ends,
    which the centered derivative of H relies on. A custom ``func`` maps a
    time to ``ControlParams`` (or an ``(E, theta)`` pair) and is likewise
    evaluated slightly outside ``[0, tau]``.
    """

    variant: str
    tau: float = 50.0
    E0: float = 0.2
    Etau: float = 10.0
    func: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in (ROTATING_GAP, FIXED_ANGLE_GAP, RELAXATION, CUSTOM):
            raise ValueError(f"unknown schedule variant {self.variant!r}")
        if self.variant == CUSTOM and self.func is None:
            raise ValueError("custom schedule needs a control function")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @classmethod
    def rotating_gap(cls, E0=0.2, Etau=10.0, tau=50.0):
        return cls(ROTATING_GAP, tau=tau, E0=E0, Etau=Etau)

    @classmethod
    def fixed_angle_gap(cls, E0=0.2, Etau=10.0, tau=50.0):
        return cls(FIXED_ANGLE_GAP, tau=tau, E0=E0, Etau=Etau)

    @classmethod
    def relaxation(cls, E=10.0, tau=50.0):
        return cls(RELAXATION, tau=tau, E0=E, Etau=E)

    @classmethod
    def custom(cls, func, tau):
        return cls(CUSTOM, tau=tau, func=func)

    def controls(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized (E_t, theta_t)."""
        t = np.asarray(t, dtype=float)
        if self.variant == CUSTOM:
            pairs = [self.func(float(s)) for s in t.ravel()]
            pairs = [(p.E, p.theta) if isinstance(p, ControlParams) else p for p in pairs]
            arr = np.array(pairs, dtype=float).reshape(t.shape + (2,))
            return arr[..., 0], arr[..., 1]
        if self.variant == RELAXATION:
            # The quench to (E, pi) happens just after t = 0 and is not part of the work.
            return np.full(t.shape, self.Etau), np.full(t.shape, np.pi)
        gap = self.E0 + (self.Etau - self.E0) * np.sin(np.pi * t / (2 * self.tau)) ** 2
        if self.variant == ROTATING_GAP:
            return gap, np.pi * t / self.tau
        return gap, np.full(t.shape, np.pi)

    def __call__(self, t: float) -> ControlParams:
        E, theta = self.controls(t)
        return ControlParams(float(E), float(theta))


@dataclass(frozen=True)
class LindbladConfig:
    c: float = 0.2
    tau: float = 50.0
    dt: float = 1 / 500
    beta: float = 1.0
    store_every: int = 50

    def __post_init__(self):
        if not (self.c > 0 and self.tau > 0 and self.dt > 0 and self.beta > 0):
            raise ValueError("c, tau, dt and beta must all be positive")
        ratio = self.tau / self.dt
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError(f"tau/dt = {ratio} is not a positive integer")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.tau / self.dt))


@dataclass
class Trajectory:
    """Sampled evolution of one state or a batch of states.

    ``states`` has shape ``(n_times, *batch, 2, 2)``; the scalar series
    ``heat``, ``work``, ``entropy`` and ``energy`` have shape ``(n_times, *batch)``.
    Heat is energy delivered to the bath.
    """

    times: np.ndarray
    states: np.ndarray
    heat: np.ndarray
    work: np.ndarray
    entropy: np.ndarray
    energy: np.ndarray
    beta: float = 1.0

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def bloch(self) -> np.ndarray:
        return density_to_bloch(self.states)

    @property
    def entropy_flow(self):
        return self.beta * self.heat[-1]

    @property
    def entropy_production(self) -> np.ndarray:
        """Time series of beta*Q(t) + S(t) - S(0)."""
        return self.beta * self.heat + self.entropy - self.entropy[0]

    @property
    def first_law_residual(self):
        return (self.energy[-1] - self.energy[0]) - (self.work[-1] - self.heat[-1])

    def select(self, index) -> "Trajectory":
        """The trajectory of one batch member."""
        pick = (slice(None), index)
        return Trajectory(
            self.times,
            self.states[pick],
            self.heat[pick],
            self.work[pick],
            self.entropy[pick],
            self.energy[pick],
            self.beta,
        )


def hamiltonian(p: ControlParams) -> np.ndarray:
    return _hamiltonians(np.asarray(p.E), np.asarray(p.theta))


def _hamiltonians(E, theta) -> np.ndarray:
    E = np.asarray(E, dtype=float)[..., None, None]
    theta = np.asarray(theta, dtype=float)[..., None, None]
    return 0.5 * E * (np.cos(theta) * PAULI_Z + np.sin(theta) * PAULI_X)


def lowering_operator(theta) -> np.ndarray:
    """L = [cos(theta) sigma_x - i sigma_y - sin(theta) sigma_z] / 2, so that [L, H] = E L."""
    theta = np.asarray(theta, dtype=float)[..., None, None]
    return 0.5 * (np.cos(theta) * PAULI_X - 1j * PAULI_Y - np.sin(theta) * PAULI_Z)


def thermal_occupation(E, beta: float = 1.0):
    E = np.asarray(E, dtype=float)
    if np.any(E <= 0):
        raise ValueError("thermal occupation needs a positive energy gap")
    return 1.0 / np.expm1(beta * E)


def dissipator(L, rho) -> np.ndarray:
    """D[L](rho) = L rho L^dag - {L^dag L, rho} / 2."""
    L = np.asarray(L, dtype=complex)
    Ld = np.swapaxes(L, -1, -2).conj()
    LdL = Ld @ L
    return L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)


def dissipative_part(rho, p: ControlParams, c: float, beta: float = 1.0) -> np.ndarray:
    """Bath-induced part of the Lindbladian: emission at rate cE(N+1), absorption at cEN."""
    n = thermal_occupation(p.E, beta)
    L = lowering_operator(p.theta)
    Ld = L.conj().T
    return c * p.E * ((n + 1) * dissipator(L, rho) + n * dissipator(Ld, rho))


def lindblad_rhs(rho, p: ControlParams, c: float, beta: float = 1.0) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    H = hamiltonian(p)
    return 1j * (rho @ H - H @ rho) + dissipative_part(rho, p, c, beta)


def gibbs_state(p: ControlParams, beta: float = 1.0) -> np.ndarray:
    """exp(-beta H)/Z; for H = (E/2) n.sigma this is the Bloch vector -tanh(beta E/2) n."""
    n = np.array([np.sin(p.theta), 0.0, np.cos(p.theta)])
    return bloch_to_density(-np.tanh(0.5 * beta * p.E) * n)


@dataclass
class _Generator:
    """Lindbladian on the half-step time grid, as row-major superoperators.

    With v = rho.reshape(4): d v/dt = v @ S[k].T, heat rate = -(v @ m_heat[k]).real
    and work rate = (v @ m_work[k]).real, where tr(rho X) = v . vec(X^T).
    """

    H: np.ndarray
    S: np.ndarray
    m_heat: np.ndarray
    m_work: np.ndarray


def _kron_sandwich(X, Y):
    # Row-major vec(X rho Y) = (X kron Y^T) vec(rho), batched over the leading axis.
    return np.einsum("kab,kdc->kacbd", X, Y).reshape(X.shape[0], 4, 4)


def _build_generator(schedule: ProtocolSchedule, cfg: LindbladConfig) -> _Generator:
    half = 0.5 * cfg.dt
    t = half * np.arange(2 * cfg.n_steps + 1)
    E, theta = schedule.controls(t)
    if np.any(E <= 0):
        raise ValueError("schedule produced a non-positive energy gap")
    h = cfg.dt / 10
    H = _hamiltonians(E, theta)
    H_dot = (_hamiltonians(*schedule.controls(t + h)) - _hamiltonians(*schedule.controls(t - h))) / (2 * h)

    n = thermal_occupation(E, cfg.beta)
    rate_down = (cfg.c * E * (n + 1))[:, None, None]
    rate_up = (cfg.c * E * n)[:, None, None]
    L = lowering_operator(theta)
    Ld = np.swapaxes(L, -1, -2).conj()
    # Anticommutator terms of both dissipators folded into K.
    K = -0.5 * (rate_down * (Ld @ L) + rate_up * (L @ Ld))
    G = -1j * H + K
    Gd = np.swapaxes(G, -1, -2).conj()
    A = np.sqrt(rate_down) * L
    B = np.sqrt(rate_up) * Ld
    Ad = np.swapaxes(A, -1, -2).conj()
    Bd = np.swapaxes(B, -1, -2).conj()
    eye = np.broadcast_to(IDENTITY, G.shape)
    S = _kron_sandwich(G, eye) + _kron_sandwich(eye, Gd) + _kron_sandwich(A, Ad) + _kron_sandwich(B, Bd)
    # tr(H D(rho)) = tr(rho M_heat) with D the dissipative part.
    M_heat = H @ K + K @ H + Ad @ H @ A + Bd @ H @ B
    k = len(t)
    return _Generator(
        H=H,
        S=S,
        m_heat=np.swapaxes(M_heat, -1, -2).reshape(k, 4),
        m_work=np.swapaxes(H_dot, -1, -2).reshape(k, 4),
    )


def evolve(rho0, schedule: ProtocolSchedule, cfg: LindbladConfig | None = None) -> Trajectory:
    """Integrate the Lindblad equation with fixed-step classical RK4.

    ``rho0`` may be one density matrix or a batch ``(n, 2, 2)``; the batch is
    integrated in lockstep and each member is independent of the others.
    Heat and work are integrated alongside the state with the same RK4 weights.
    """
    cfg = cfg or LindbladConfig(tau=schedule.tau)
    rho = validate_state(rho0)
    batch = rho.shape[:-2]
    v = rho.reshape(-1, 4).astype(complex, copy=True)
    gen = _build_generator(schedule, cfg)
    dt = cfg.dt
    n_steps = cfg.n_steps

    stored = list(range(0, n_steps + 1, cfg.store_every))
    if stored[-1] != n_steps:
        stored.append(n_steps)
    n_store = len(stored)
    times = np.array(stored, dtype=float) * dt
    states = np.empty((n_store, v.shape[0], 4), dtype=complex)
    heat = np.zeros((n_store, v.shape[0]))
    work = np.zeros((n_store, v.shape[0]))
    energy = np.empty((n_store, v.shape[0]))

    # Heat and work rates share one product per stage.
    rates = np.stack([-gen.m_heat, gen.m_work], axis=-1)
    energy_vec = np.swapaxes(gen.H, -1, -2).reshape(-1, 4)
    acc = np.zeros((v.shape[0], 2))
    states[0] = v
    energy[0] = (v @ energy_vec[0]).real
    slot = 1
    ST = np.swapaxes(gen.S, -1, -2).copy()
    for step in range(n_steps):
        i0, i1, i2 = 2 * step, 2 * step + 1, 2 * step + 2
        k1 = v @ ST[i0]
        v2 = v + 0.5 * dt * k1
        k2 = v2 @ ST[i1]
        v3 = v + 0.5 * dt * k2
        k3 = v3 @ ST[i1]
        v4 = v + dt * k3
        k4 = v4 @ ST[i2]
        acc += dt / 6 * ((v @ rates[i0]) + (2 * (v2 + v3)) @ rates[i1] + v4 @ rates[i2]).real
        v = v + dt / 6 * (k1 + 2 * (k2 + k3) + k4)
        # Hermitize: diagonal real, off-diagonals conjugate.
        off = 0.5 * (v[:, 1] + v[:, 2].conj())
        v[:, 1] = off
        v[:, 2] = off.conj()
        v[:, 0] = v[:, 0].real
        v[:, 3] = v[:, 3].real

        half_tr = 0.5 * (v[:, 0].real + v[:, 3].real)
        lam_min = half_tr - np.hypot(0.5 * (v[:, 0].real - v[:, 3].real), np.abs(off))
        if not np.all(lam_min >= -POSITIVITY_ATOL):
            bad = float(np.nanmin(lam_min))
            raise IntegrationError(
                f"state lost positivity at t = {(step + 1) * dt:.6g} (min eigenvalue {bad:.3g}); "
                f"reduce dt (currently {dt:g})"
            )
        if slot < n_store and step + 1 == stored[slot]:
            states[slot] = v
            heat[slot] = acc[:, 0]
            work[slot] = acc[:, 1]
            energy[slot] = (v @ energy_vec[i2]).real
            slot += 1

    states = states.reshape((n_store,) + batch + (2, 2))
    shape = (n_store,) + batch
    entropy = np.asarray(von_neumann_entropy(states))
    return Trajectory(
        times, states, heat.reshape(shape), work.reshape(shape), entropy, energy.reshape(shape), cfg.beta
    )


PROBE_BLOCH = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


@dataclass
class ResetChannel:
    """Exact affine response of one protocol, assembled from four probe runs.

    The RK4 update, the Hermitization and the heat/work quadratures are all
    linear in the initial density matrix, so the run from any
    rho(a) = (1 - a_x - a_y - a_z) I/2 + sum_i a_i (I + sigma_i)/2 is the same
    affine combination of the probe runs (I/2, +x, +y, +z).
    """

    final_states: np.ndarray
    heat: np.ndarray
    work: np.ndarray
    beta: float = 1.0
    probes: Trajectory | None = None

    @classmethod
    def from_protocol(cls, schedule: ProtocolSchedule, cfg: LindbladConfig | None = None) -> "ResetChannel":
        traj = evolve(bloch_to_density(PROBE_BLOCH), schedule, cfg)
        return cls.from_probe_trajectory(traj)

    @classmethod
    def from_probe_trajectory(cls, traj: Trajectory) -> "ResetChannel":
        return cls(traj.final_state, traj.heat[-1], traj.work[-1], traj.beta, traj)

    def _weights(self, a):
        a = np.asarray(a, dtype=float)
        return np.concatenate([1.0 - a.sum(axis=-1, keepdims=True), a], axis=-1)

    def final_state(self, a) -> np.ndarray:
        return np.einsum("...k,kij->...ij", self._weights(a), self.final_states)

    def final_heat(self, a):
        return self._weights(a) @ self.heat

    def final_work(self, a):
        return self._weights(a) @ self.work

    def entropy_flow(self, a):
        return self.beta * self.final_heat(a)

    def entropy_production(self, a):
        """beta*Q + S(rho_tau) - S(rho_0) for initial Bloch vector(s) ``a``."""
        rho0 = bloch_to_density(a)
        return self.entropy_flow(a) + von_neumann_entropy(self.final_state(a)) - von_neumann_entropy(rho0)


def canonical_probes() -> np.ndarray:
    """The six Bloch-axis pure states and the completely mixed state."""
    axes = np.vstack([np.eye(3), -np.eye(3), np.zeros((1, 3))])
    return axes


def reliability(
    schedule: ProtocolSchedule,
    cfg: LindbladConfig | None,
    target,
    samples: int = 0,
    seed: int = 0,
    sampling: str = "ball",
) -> float:
    """Largest trace distance between final and target state over a probe set.

    The probe set is the seven canonical states plus ``samples`` seeded draws.
    """
    from .sampling import sample_bloch_batch

    if samples < 0:
        raise ValueError("samples must be non-negative")
    blochs = canonical_probes()
    if samples:
        blochs = np.vstack([blochs, sample_bloch_batch(seed, samples, sampling)])
    traj = evolve(bloch_to_density(blochs), schedule, cfg)
    return float(np.max(trace_distance(traj.final_state, np.asarray(target, dtype=complex))))
