"""Entropy-flow vector of a qubit reset protocol and its minimally dissipative input.

The entropy flow of any qubit protocol is affine in the initial Bloch vector,
EF(a) = EF[I/2] + a.phi/2. Four runs fix (EF[I/2], phi); for a reliable reset
the entropy production is then minimized by a* = -tanh(|phi|/2) phi/|phi|.
``minimize_ep`` finds the minimizer of any EP surface numerically, without
using that formula, and serves as the cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .qmath import binary_entropy

MAX_CONDITION = 1e8
BALL_MARGIN = 1e-12


class LinearDependenceError(ValueError):
    """Probe states do not span the affine hull of the Bloch ball."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = tuple(offending)


class MinimizationError(RuntimeError):
    def __init__(self, message, best=None, value=None):
        super().__init__(message)
        self.best = best
        self.value = value


@dataclass(frozen=True)
class EntropyFlowVector:
    ef_mixed: float
    phi: np.ndarray = field(compare=False)

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float).reshape(3)
        if not (np.all(np.isfinite(phi)) and np.isfinite(self.ef_mixed)):
            raise ValueError("entropy-flow vector must be finite")
        object.__setattr__(self, "phi", phi)

    @property
    def phi_norm(self) -> float:
        return float(np.linalg.norm(self.phi))

    def as_dict(self) -> dict:
        return {"ef_mixed": self.ef_mixed, "phi": self.phi.tolist(), "phi_norm": self.phi_norm}


@dataclass(frozen=True)
class ProbeSet:
    """Four initial Bloch vectors and the entropy flow measured from each."""

    bloch: np.ndarray
    ef: np.ndarray

    def __post_init__(self):
        bloch = np.asarray(self.bloch, dtype=float)
        ef = np.asarray(self.ef, dtype=float)
        if bloch.shape != (4, 3) or ef.shape != (4,):
            raise ValueError(f"need four probes, got Bloch shape {bloch.shape} and EF shape {ef.shape}")
        object.__setattr__(self, "bloch", bloch)
        object.__setattr__(self, "ef", ef)

    @property
    def matrix(self) -> np.ndarray:
        """Rows (2, a_x, a_y, a_z)."""
        return np.column_stack([np.full(4, 2.0), self.bloch])

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))


def default_probe_bloch() -> np.ndarray:
    """I/2 and the +x, +y, +z pure states."""
    return np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def _offending_probes(A: np.ndarray) -> list[int]:
    # Rows taking part in the (near) linear dependence: support of the left null vector.
    u, s, _ = np.linalg.svd(A)
    null = u[:, -1]
    return [int(i) for i in np.flatnonzero(np.abs(null) > 1e-6)]


def infer_ef_vector(probes: ProbeSet) -> EntropyFlowVector:
    """Solve A [EF[I/2], phi] = 2 EF for the four probes."""
    A = probes.matrix
    cond = probes.condition_number
    if not np.isfinite(cond) or cond >= MAX_CONDITION:
        bad = _offending_probes(A)
        raise LinearDependenceError(
            f"probe states are linearly dependent (condition number {cond:.3g}); offending probes {bad}",
            bad,
        )
    x = np.linalg.solve(A, 2.0 * probes.ef)
    return EntropyFlowVector(float(x[0]), x[1:])


def predict_ef(v: EntropyFlowVector, a):
    a = np.asarray(a, dtype=float)
    return v.ef_mixed + 0.5 * a @ v.phi


def ep_analytic(v: EntropyFlowVector, a, s_target: float = 0.0):
    """EF(a) + S_target - S(a): entropy production of a reliable reset."""
    a = np.asarray(a, dtype=float)
    return predict_ef(v, a) + s_target - binary_entropy(np.linalg.norm(a, axis=-1))


def ep_gradient_analytic(v: EntropyFlowVector, a) -> np.ndarray:
    """Gradient of ``ep_analytic`` in the Bloch vector (interior points, a != 0)."""
    a = np.asarray(a, dtype=float)
    r = np.linalg.norm(a)
    return 0.5 * a / r * np.log((1 + r) / (1 - r)) + 0.5 * v.phi


def minimally_dissipative_state(v: EntropyFlowVector) -> np.ndarray:
    """a* = -tanh(|phi|/2) phi_hat; the origin when phi = 0."""
    norm = v.phi_norm
    if norm == 0.0:
        return np.zeros(3)
    return -np.tanh(0.5 * norm) * v.phi / norm


# --- numerical minimizer ------------------------------------------------------

_R_MAX = 2.0 * np.arctanh(1.0 - BALL_MARGIN)


def _to_bloch(u) -> np.ndarray:
    """Map R^3 onto the open ball |a| <= 1 - BALL_MARGIN via a = tanh(|u|/2) u_hat."""
    u = np.asarray(u, dtype=float)
    r = np.linalg.norm(u)
    if r == 0.0:
        return np.zeros(3)
    return np.tanh(0.5 * min(r, _R_MAX)) * u / r


def _from_bloch(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    r = np.linalg.norm(a)
    if r == 0.0:
        return np.zeros(3)
    return 2.0 * np.arctanh(min(r, 1.0 - BALL_MARGIN)) * a / r


def symmetric_starts(radius: float = 0.5) -> np.ndarray:
    """The eight cube corners at Bloch length ``radius``."""
    corners = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
    return radius * corners / np.sqrt(3.0)


@dataclass
class MinimizeResult:
    bloch: np.ndarray
    value: float
    diameter: float
    evaluations: int


def _bloch_diameter(simplex_u) -> float:
    pts = np.array([_to_bloch(u) for u in simplex_u])
    diffs = pts[:, None, :] - pts[None, :, :]
    return float(np.max(np.linalg.norm(diffs, axis=-1)))


def minimize_ep(
    objective: Callable[[np.ndarray], float],
    tol: float = 1e-5,
    max_iter: int = 5000,
    starts=None,
    polish_rounds: int = 6,
) -> MinimizeResult:
    """Derivative-free minimization of an EP surface over the open Bloch ball.

    Nelder-Mead runs from each start (default: eight symmetric interior
    points) in coordinates that map R^3 onto the ball. The best run is
    restarted with a fresh, shrinking simplex until it stops improving.
    Converged when the final simplex spans less than ``tol`` in Bloch space.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    starts = symmetric_starts() if starts is None else np.atleast_2d(starts)
    evals = 0

    def f(u):
        return float(objective(_to_bloch(u)))

    def run(u0, step):
        simplex = np.vstack([u0, u0 + step * np.eye(3)])
        return minimize(
            f,
            u0,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": tol, "fatol": 1e-15, "maxiter": max_iter,
                     "maxfev": 2 * max_iter},
        )

    best = None
    for a0 in starts:
        res = run(_from_bloch(a0), 0.5)
        evals += res.nfev
        if best is None or res.fun < best.fun:
            best = res

    step = 0.05
    for _ in range(polish_rounds):
        res = run(best.x, step)
        evals += res.nfev
        improved = res.fun < best.fun
        if res.fun <= best.fun:
            best = res
        if not improved:
            break
        step *= 0.1

    diameter = _bloch_diameter(best.final_simplex[0])
    a_best = _to_bloch(best.x)
    if diameter >= tol:
        raise MinimizationError(
            f"simplex did not contract below {tol:g} (diameter {diameter:.3g}) within {max_iter} iterations",
            best=a_best,
            value=float(best.fun),
        )
    return MinimizeResult(a_best, float(best.fun), diameter, evals)


def minimize_ep_numeric(schedule, cfg=None, tol: float = 1e-5, channel=None) -> np.ndarray:
    """Bloch vector minimizing the simulated entropy production of a protocol.

    The objective is beta*Q + S(rho_tau) - S(rho_0) taken from the integrator;
    pass a prebuilt ``ResetChannel`` to reuse its probe runs.
    """
    from .dynamics import ResetChannel

    if channel is None:
        channel = ResetChannel.from_protocol(schedule, cfg)
    return minimize_ep(channel.entropy_production, tol=tol).bloch
