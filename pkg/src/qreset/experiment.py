"""Experiment pipelines behind the command-line driver.

Each function takes an ``ExperimentConfig`` and returns plain Python data
(records, dicts, trajectories); file output lives in ``qreset.cli``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .dynamics import LindbladConfig, ProtocolSchedule, ResetChannel, Trajectory, canonical_probes, evolve
from .efvector import (
    EntropyFlowVector,
    ProbeSet,
    default_probe_bloch,
    infer_ef_vector,
    minimally_dissipative_state,
    minimize_ep,
)
from .qmath import bloch_to_density, relative_entropy, trace_distance
from .sampling import MODES, sample_bloch_batch
from .swapreset import gibbs_qubit, swap_entropy_change, swap_heat
from .thermo import mismatch_residual, report

PROTOCOLS = ("fig1-rotating", "fig2-fixed-angle", "fig3-relaxation", "swap", "custom")
LINDBLAD_PROTOCOLS = ("fig1-rotating", "fig2-fixed-angle", "fig3-relaxation", "custom")

VERIFY_COLUMNS = (
    "index", "ax", "ay", "az", "EP", "dEP", "D0", "kl", "coherence", "Dtau", "residual", "eps_final",
    "Q", "S0", "Stau",
)
TRAJECTORY_COLUMNS = ("t", "ax", "ay", "az", "Q", "W", "S", "EP")
SWAP_COLUMNS = ("beta_Eb", "state", "ax", "ay", "az", "Q", "dS", "EP", "D")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    protocol: str = "fig1-rotating"
    c: float = 0.2
    tau: float = 50.0
    dt: float = 0.002
    E0: float = 0.2
    Etau: float = 10.0
    Eb: float = 1.0
    samples: int = 10
    seed: int = 0
    sampling: str = "ball"
    target: list = field(default_factory=lambda: [0.0, 0.0, 1.0])
    tolerance: float = 1e-5
    minimizer_tol: float = 1e-5
    alpha0_from_phi: bool = False
    initial: list | None = None
    out: str = "out"
    store_every: int = 50
    swap_grid: list = field(default_factory=lambda: [0.5 * k for k in range(17)])
    custom_schedule: dict | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError("protocol", f"must be one of {PROTOCOLS}, got {self.protocol!r}")
        for name in ("c", "tau", "dt", "E0", "Etau", "tolerance", "minimizer_tol"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(name, f"must be a positive number, got {value!r}")
        if not isinstance(self.Eb, (int, float)) or self.Eb < 0:
            raise ConfigError("Eb", f"must be non-negative, got {self.Eb!r}")
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ConfigError("samples", f"must be an integer >= 1, got {self.samples!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if self.sampling not in MODES:
            raise ConfigError("sampling", f"must be one of {MODES}, got {self.sampling!r}")
        for name in ("target", "initial"):
            vec = getattr(self, name)
            if vec is None:
                continue
            if len(vec) != 3 or np.linalg.norm(vec) > 1 + 1e-9:
                raise ConfigError(name, f"must be a Bloch vector of length <= 1, got {vec!r}")
        if self.protocol in LINDBLAD_PROTOCOLS:
            try:
                self.lindblad_config()
            except ValueError as exc:
                raise ConfigError("dt", str(exc)) from exc
        if self.protocol == "custom":
            sched = self.custom_schedule or {}
            if not all(k in sched for k in ("t", "E", "theta")):
                raise ConfigError("custom_schedule", "needs lists 't', 'E' and 'theta'")
            if len({len(sched["t"]), len(sched["E"]), len(sched["theta"])}) != 1 or len(sched["t"]) < 2:
                raise ConfigError("custom_schedule", "'t', 'E', 'theta' must have equal length >= 2")
            if min(sched["E"]) <= 0:
                raise ConfigError("custom_schedule", "energy gaps must be positive")

    def schedule(self) -> ProtocolSchedule:
        if self.protocol == "fig1-rotating":
            return ProtocolSchedule.rotating_gap(self.E0, self.Etau, self.tau)
        if self.protocol == "fig2-fixed-angle":
            return ProtocolSchedule.fixed_angle_gap(self.E0, self.Etau, self.tau)
        if self.protocol == "fig3-relaxation":
            return ProtocolSchedule.relaxation(self.Etau, self.tau)
        if self.protocol == "custom":
            return _spline_schedule(self.custom_schedule, self.tau)
        raise ConfigError("protocol", "swap has no time-dependent schedule")

    def lindblad_config(self) -> LindbladConfig:
        return LindbladConfig(c=self.c, tau=self.tau, dt=self.dt, store_every=self.store_every)

    @property
    def target_state(self) -> np.ndarray:
        return bloch_to_density(self.target)

    def initial_bloch(self) -> np.ndarray:
        if self.initial is not None:
            return np.array([self.initial], dtype=float)
        return sample_bloch_batch(self.seed, self.samples, self.sampling)


def _spline_schedule(table: dict, tau: float) -> ProtocolSchedule:
    from scipy.interpolate import CubicSpline

    t = np.asarray(table["t"], dtype=float)
    gap = CubicSpline(t, np.asarray(table["E"], dtype=float))
    angle = CubicSpline(t, np.asarray(table["theta"], dtype=float))
    return ProtocolSchedule.custom(lambda s: (float(gap(s)), float(angle(s))), tau)


# --- phi inference -----------------------------------------------------------------


@dataclass
class PhiResult:
    vector: EntropyFlowVector
    alpha0: np.ndarray
    condition_number: float
    channel: ResetChannel | None = None

    def as_dict(self) -> dict:
        out = self.vector.as_dict()
        out["alpha0_bloch"] = self.alpha0.tolist()
        out["condition_number"] = self.condition_number
        return out


def infer_phi(cfg: ExperimentConfig, channel: ResetChannel | None = None) -> PhiResult:
    """Entropy-flow vector from the four default probes, and a* from it."""
    probe_bloch = default_probe_bloch()
    if cfg.protocol == "swap":
        bath = gibbs_qubit(cfg.Eb)
        ef = np.array([swap_heat(bloch_to_density(a), bath) for a in probe_bloch])
    else:
        channel = channel or ResetChannel.from_protocol(cfg.schedule(), cfg.lindblad_config())
        ef = channel.entropy_flow(probe_bloch)
    probes = ProbeSet(probe_bloch, ef)
    vector = infer_ef_vector(probes)
    return PhiResult(vector, minimally_dissipative_state(vector), probes.condition_number, channel)


# --- verification ------------------------------------------------------------------


@dataclass
class VerifyResult:
    records: list[dict]
    alpha0: np.ndarray
    alpha0_method: str
    ep_alpha: float
    epsilon: float
    phi: PhiResult
    tolerance: float
    trajectory: Trajectory | None = None

    @property
    def max_abs_residual(self) -> float:
        return float(max(abs(r["residual"]) for r in self.records))

    @property
    def passed(self) -> bool:
        return self.max_abs_residual <= self.tolerance

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)

    def summary(self) -> dict:
        d0 = self.column("D0")
        kl = self.column("kl")
        return {
            "alpha0_bloch": self.alpha0.tolist(),
            "alpha0_method": self.alpha0_method,
            "EP_alpha0": self.ep_alpha,
            "epsilon": self.epsilon,
            "phi": self.phi.as_dict(),
            "max_abs_residual": self.max_abs_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "mean_kl_over_mean_D0": float(kl.mean() / d0.mean()) if d0.mean() > 0 else None,
            "max_coherence": float(self.column("coherence").max()),
            "samples": len(self.records),
        }


def _record(index, a, rep, ep_alpha) -> dict:
    residual = mismatch_residual(rep.EP, ep_alpha, rep.D0, rep.Dtau)
    return {
        "index": index,
        "ax": float(a[0]),
        "ay": float(a[1]),
        "az": float(a[2]),
        "EP": rep.EP,
        "dEP": rep.EP - ep_alpha,
        "D0": rep.D0,
        "kl": rep.kl,
        "coherence": rep.coherence,
        "Dtau": rep.Dtau,
        "residual": residual,
        "eps_final": rep.eps_final,
        "Q": rep.Q,
        "S0": rep.S0,
        "Stau": rep.Stau,
    }


def verify(cfg: ExperimentConfig) -> VerifyResult:
    """Check EP[rho0] - EP[alpha0] = D[rho0||alpha0] - D[rho_tau||alpha_tau] per sample."""
    blochs = cfg.initial_bloch()
    target = cfg.target_state
    if cfg.protocol == "swap":
        return _verify_swap(cfg, blochs, target)

    schedule, lcfg = cfg.schedule(), cfg.lindblad_config()
    phi = infer_phi(cfg)
    if cfg.alpha0_from_phi:
        alpha0, method = phi.alpha0, "entropy-flow-vector"
    else:
        alpha0 = minimize_ep(phi.channel.entropy_production, tol=cfg.minimizer_tol).bloch
        method = "numeric-minimizer"

    # One lockstep run: samples, the seven canonical probes, then alpha0.
    batch = np.vstack([blochs, canonical_probes(), alpha0[None, :]])
    traj = evolve(bloch_to_density(batch), schedule, lcfg)
    n = len(blochs)
    final = traj.final_state
    alpha_traj = traj.select(-1)
    ep_alpha = float(alpha_traj.entropy_production[-1])
    alpha_rho, alpha_tau = bloch_to_density(alpha0), alpha_traj.final_state
    epsilon = float(np.max(trace_distance(final[:-1], target)))

    records = []
    for i in range(n):
        rep = report(
            traj.initial_state[i], final[i], traj.heat[-1, i], alpha_rho, alpha_tau, target,
            work=traj.work[-1, i],
        )
        records.append(_record(i, blochs[i], rep, ep_alpha))
    return VerifyResult(records, alpha0, method, ep_alpha, epsilon, phi, cfg.tolerance, traj)


def _verify_swap(cfg, blochs, target) -> VerifyResult:
    bath = gibbs_qubit(cfg.Eb)
    gamma = bath.gamma
    phi = infer_phi(cfg)

    def ep(a):
        rho = bloch_to_density(a)
        return swap_heat(rho, bath) + swap_entropy_change(rho, bath)

    if cfg.alpha0_from_phi:
        alpha0, method = phi.alpha0, "entropy-flow-vector"
    else:
        # EP = D[rho0 || gamma] is minimized exactly by gamma itself.
        alpha0, method = bath.bloch, "closed-form"
    alpha_rho = bloch_to_density(alpha0)
    ep_alpha = ep(alpha0)
    # The swap outputs gamma whatever the input.
    records = []
    for i, a in enumerate(blochs):
        rho0 = bloch_to_density(a)
        rep = report(rho0, gamma, swap_heat(rho0, bath), alpha_rho, gamma, target)
        records.append(_record(i, a, rep, ep_alpha))
    epsilon = float(trace_distance(gamma, target))
    return VerifyResult(records, alpha0, method, ep_alpha, epsilon, phi, cfg.tolerance)


# --- simulation --------------------------------------------------------------------


@dataclass
class SimulateResult:
    trajectory: Trajectory
    initial_bloch: np.ndarray
    epsilon: float
    endpoints: list[dict]

    def rows(self, index) -> list[tuple]:
        tr = self.trajectory.select(index)
        bloch = tr.bloch
        ep = tr.entropy_production
        return [
            (float(t), *map(float, bloch[k]), float(tr.heat[k]), float(tr.work[k]), float(tr.entropy[k]), float(ep[k]))
            for k, t in enumerate(tr.times)
        ]


def simulate(cfg: ExperimentConfig) -> SimulateResult:
    if cfg.protocol not in LINDBLAD_PROTOCOLS:
        raise ConfigError("protocol", "simulate needs a Lindblad protocol")
    blochs = cfg.initial_bloch()
    target = cfg.target_state
    batch = np.vstack([blochs, canonical_probes()])
    traj = evolve(bloch_to_density(batch), cfg.schedule(), cfg.lindblad_config())
    n = len(blochs)
    final = traj.final_state
    dist = trace_distance(final, target)
    endpoints = []
    for i in range(n):
        endpoints.append({
            "index": i,
            "initial_bloch": blochs[i].tolist(),
            "final_bloch": traj.bloch[-1, i].tolist(),
            "Q": float(traj.heat[-1, i]),
            "W": float(traj.work[-1, i]),
            "EP": float(traj.entropy_production[-1, i]),
            "eps_final": float(dist[i]),
            "first_law_residual": float(traj.first_law_residual[i]),
        })
    sub = Trajectory(traj.times, traj.states[:, :n], traj.heat[:, :n], traj.work[:, :n],
                     traj.entropy[:, :n], traj.energy[:, :n], traj.beta)
    return SimulateResult(sub, blochs, float(np.max(dist)), endpoints)


# --- swap demo ---------------------------------------------------------------------


def swap_family(beta_eb: float) -> list[tuple[str, np.ndarray]]:
    bath = gibbs_qubit(beta_eb)
    return [
        ("gamma", bath.bloch),
        ("mixed", np.zeros(3)),
        ("ground", np.array([0.0, 0.0, 1.0])),
        ("excited", np.array([0.0, 0.0, -1.0])),
        ("plus_x", np.array([1.0, 0.0, 0.0])),
    ]


def swap_demo(cfg: ExperimentConfig) -> list[tuple]:
    rows = []
    for beta_eb in cfg.swap_grid:
        bath = gibbs_qubit(float(beta_eb))
        for name, a in swap_family(float(beta_eb)):
            rho0 = bloch_to_density(a)
            q = swap_heat(rho0, bath)
            ds = swap_entropy_change(rho0, bath)
            rows.append((float(beta_eb), name, *map(float, a), q, ds, q + ds, relative_entropy(rho0, bath.gamma)))
    return rows

