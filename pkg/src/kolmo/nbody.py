"""Newtonian point-mass gravity with symplectic and Runge-Kutta
integrators, conservation diagnostics, and a twin-trajectory
sensitivity probe.

Accelerations follow the standard pairwise form

    a_i = sum_{j != i} G m_j (q_j - q_i) / |q_j - q_i|^3

optionally Plummer-softened by replacing |q|^2 with |q|^2 + eps^2.
The leapfrog integrator is kick-drift-kick: second order, symplectic,
time-reversible; classical RK4 is provided for contrast (higher order
per step, no long-run energy guarantee).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_COLLISION_THRESHOLD = 1e-6


@dataclass
class PhaseState:
    """Masses, positions, velocities; G and current time ride along."""

    masses: np.ndarray  # (n,)
    q: np.ndarray  # (n, 3)
    v: np.ndarray  # (n, 3)
    G: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        n = len(self.masses)
        if self.q.shape != (n, 3) or self.v.shape != (n, 3):
            raise ValueError(
                f"need q and v of shape ({n}, 3), got {self.q.shape} and {self.v.shape}"
            )
        if n < 1:
            raise ValueError("need at least one body")
        if np.any(self.masses <= 0):
            raise ValueError("masses must be positive")

    def copy(self) -> "PhaseState":
        return PhaseState(self.masses.copy(), self.q.copy(), self.v.copy(), self.G, self.t)


def _pairwise(q: np.ndarray, softening: float):
    d = q[None, :, :] - q[:, None, :]  # d[i, j] = q_j - q_i
    r2 = np.sum(d * d, axis=2) + softening * softening
    np.fill_diagonal(r2, 1.0)  # i = j excluded below
    return d, r2


def accelerations(state: PhaseState, softening: float = 0.0) -> np.ndarray:
    """Pairwise gravitational accelerations, shape (n, 3).

    With zero softening, coincident bodies have no finite field and
    raise an explicit error.
    """
    d, r2 = _pairwise(state.q, softening)
    n = len(state.masses)
    if softening == 0.0 and n > 1:
        off = ~np.eye(n, dtype=bool)
        if np.any(r2[off] == 0.0):
            raise ValueError("coincident bodies with zero softening")
    inv_r3 = r2 ** (-1.5)
    np.fill_diagonal(inv_r3, 0.0)
    # a_i = G sum_j m_j d[i, j] / r^3
    return state.G * np.einsum("ij,j,ijk->ik", inv_r3, state.masses, d)


def min_separation(state: PhaseState) -> float:
    if len(state.masses) < 2:
        return math.inf
    d, r2 = _pairwise(state.q, 0.0)
    n = len(state.masses)
    off = ~np.eye(n, dtype=bool)
    return float(np.sqrt(np.min(r2[off])))


def energy(state: PhaseState, softening: float = 0.0) -> float:
    """Kinetic plus pairwise potential energy."""
    kin = 0.5 * float(np.sum(state.masses * np.sum(state.v**2, axis=1)))
    d, r2 = _pairwise(state.q, softening)
    n = len(state.masses)
    pot = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            pot -= state.G * state.masses[i] * state.masses[j] / math.sqrt(r2[i, j])
    return kin + pot


def momentum(state: PhaseState) -> np.ndarray:
    return np.sum(state.masses[:, None] * state.v, axis=0)


def angular_momentum(state: PhaseState) -> np.ndarray:
    return np.sum(state.masses[:, None] * np.cross(state.q, state.v), axis=0)


@dataclass
class Trajectory:
    """Sampled states plus per-sample conservation diagnostics."""

    times: np.ndarray  # (k,)
    q: np.ndarray  # (k, n, 3)
    v: np.ndarray  # (k, n, 3)
    E: np.ndarray  # (k,)
    P: np.ndarray  # (k, 3)
    L: np.ndarray  # (k, 3)
    method: str
    dt: float
    aborted: bool = False
    abort_reason: str = ""

    def final_state(self, template: PhaseState) -> PhaseState:
        s = template.copy()
        s.q = self.q[-1].copy()
        s.v = self.v[-1].copy()
        s.t = float(self.times[-1])
        return s

    def energy_drift(self) -> float:
        """Max relative deviation of energy from its initial value."""
        e0 = self.E[0]
        return float(np.max(np.abs(self.E - e0) / abs(e0)))

    def momentum_drift(self) -> float:
        scale = max(1.0, float(np.max(np.abs(self.P[0]))))
        return float(np.max(np.abs(self.P - self.P[0]))) / scale

    def to_csv(self) -> str:
        n = self.q.shape[1]
        cols = ["t"]
        for i in range(n):
            cols += [f"q{i}{c}" for c in "xyz"] + [f"v{i}{c}" for c in "xyz"]
        cols += ["E", "Px", "Py", "Pz", "Lx", "Ly", "Lz"]
        lines = [",".join(cols)]
        for k in range(len(self.times)):
            row = [repr(float(self.times[k]))]
            for i in range(n):
                row += [repr(float(x)) for x in self.q[k, i]]
                row += [repr(float(x)) for x in self.v[k, i]]
            row.append(repr(float(self.E[k])))
            row += [repr(float(x)) for x in self.P[k]]
            row += [repr(float(x)) for x in self.L[k]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def integrate(
    state: PhaseState,
    dt: float,
    n_steps: int,
    method: str = "leapfrog",
    stride: int = 1,
    softening: float = 0.0,
    collision_threshold: float = DEFAULT_COLLISION_THRESHOLD,
) -> Trajectory:
    """Advance the system n_steps of size dt, sampling every stride steps.

    A pairwise separation below collision_threshold (with softening
    off) aborts the run; the partial trajectory comes back flagged.
    """
    if method not in ("leapfrog", "rk4"):
        raise ValueError(f"unknown method {method!r}")
    if dt == 0.0:
        raise ValueError("dt must be nonzero")
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    if stride < 1:
        raise ValueError("stride must be positive")
    s = state.copy()
    times, qs, vs, Es, Ps, Ls = [], [], [], [], [], []
    aborted = False
    reason = ""

    def sample():
        times.append(s.t)
        qs.append(s.q.copy())
        vs.append(s.v.copy())
        Es.append(energy(s, softening))
        Ps.append(momentum(s))
        Ls.append(angular_momentum(s))

    sample()
    a = accelerations(s, softening)
    for step in range(1, n_steps + 1):
        if method == "leapfrog":
            # kick-drift-kick; the closing kick's force is reused
            vh = s.v + 0.5 * dt * a
            s.q = s.q + dt * vh
            a = accelerations(s, softening)
            s.v = vh + 0.5 * dt * a
        else:
            a = _rk4_step(s, dt, softening)
        s.t = state.t + step * dt
        if softening == 0.0 and min_separation(s) < collision_threshold:
            aborted = True
            reason = (
                f"near collision: separation below {collision_threshold} at t={s.t}"
            )
            sample()
            break
        if step % stride == 0 or step == n_steps:
            sample()
    return Trajectory(
        np.array(times),
        np.array(qs),
        np.array(vs),
        np.array(Es),
        np.array(Ps),
        np.array(Ls),
        method,
        dt,
        aborted,
        reason,
    )


def _rk4_step(s: PhaseState, dt: float, softening: float) -> np.ndarray:
    def deriv(q, v):
        tmp = PhaseState(s.masses, q, v, s.G, s.t)
        return v, accelerations(tmp, softening)

    k1q, k1v = deriv(s.q, s.v)
    k2q, k2v = deriv(s.q + 0.5 * dt * k1q, s.v + 0.5 * dt * k1v)
    k3q, k3v = deriv(s.q + 0.5 * dt * k2q, s.v + 0.5 * dt * k2v)
    k4q, k4v = deriv(s.q + dt * k3q, s.v + dt * k3v)
    s.q = s.q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
    s.v = s.v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return accelerations(s, softening)


@dataclass
class DivergenceReport:
    """Twin-trajectory separation for a tiny initial perturbation."""

    delta: float
    times: np.ndarray
    distances: np.ndarray  # phase-space distance sqrt(|dq|^2 + |dv|^2)
    log_slope: float  # d ln(distance) / dt, least squares
    aborted: bool

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.distances) / self.delta)

    def doubling_time(self) -> float | None:
        if self.log_slope <= 0:
            return None
        return math.log(2.0) / self.log_slope

    def first_time_ratio(self, ratio: float) -> float | None:
        """Earliest sample time where distance/delta reaches the ratio."""
        idx = np.nonzero(self.distances >= ratio * self.delta)[0]
        if len(idx) == 0:
            return None
        return float(self.times[idx[0]])

    def to_json(self) -> dict:
        return {
            "schema": "kolmo.divergence/1",
            "delta": self.delta,
            "max_ratio": self.max_ratio,
            "log_slope": self.log_slope,
            "doubling_time": self.doubling_time(),
            "aborted": self.aborted,
            "samples": [
                {"t": float(t), "distance": float(d)}
                for t, d in zip(self.times, self.distances)
            ],
        }


def divergence_probe(
    state: PhaseState,
    delta: float,
    dt: float,
    n_steps: int,
    method: str = "leapfrog",
    stride: int = 10,
    softening: float = 0.0,
    perturb_body: int = 0,
    perturb_coord: int = 0,
) -> DivergenceReport:
    """Integrate the state and a delta-perturbed twin in lockstep.

    The perturbation is added to one position coordinate.  Distances
    are measured in phase space at each shared sample time; the log
    slope is the least-squares growth rate of ln(distance).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    twin = state.copy()
    twin.q[perturb_body, perturb_coord] += delta
    ta = integrate(state, dt, n_steps, method, stride, softening)
    tb = integrate(twin, dt, n_steps, method, stride, softening)
    k = min(len(ta.times), len(tb.times))
    dq = ta.q[:k] - tb.q[:k]
    dv = ta.v[:k] - tb.v[:k]
    dist = np.sqrt(np.sum(dq**2, axis=(1, 2)) + np.sum(dv**2, axis=(1, 2)))
    times = ta.times[:k]
    good = dist > 0
    if np.sum(good) >= 2:
        slope = float(np.polyfit(times[good], np.log(dist[good]), 1)[0])
    else:
        slope = 0.0
    return DivergenceReport(delta, times, dist, slope, ta.aborted or tb.aborted)


# --------------------------------------------------------------------------
# Stock configurations and config file IO


def circular_pair(G: float = 1.0, m: float = 1.0, separation: float = 1.0) -> PhaseState:
    """Two equal masses on a circular orbit about their barycenter.

    Circularity: centripetal = gravitational, v = sqrt(G m / (2 d)).
    """
    d = separation
    speed = math.sqrt(G * m / (2.0 * d))
    q = [[-d / 2, 0.0, 0.0], [d / 2, 0.0, 0.0]]
    v = [[0.0, -speed, 0.0], [0.0, speed, 0.0]]
    return PhaseState(np.array([m, m]), np.array(q), np.array(v), G)


def pythagorean_state(G: float = 1.0) -> PhaseState:
    """Masses 3, 4, 5 at rest on the 3-4-5 right triangle's vertices."""
    masses = np.array([3.0, 4.0, 5.0])
    q = np.array([[1.0, 3.0, 0.0], [-2.0, -1.0, 0.0], [1.0, -1.0, 0.0]])
    v = np.zeros((3, 3))
    return PhaseState(masses, q, v, G)


def load_config(path: str) -> PhaseState:
    """Read a {"G":, "bodies": [{"mass","q","v"}]} JSON file."""
    with open(path) as fh:
        cfg = json.load(fh)
    bodies = cfg["bodies"]
    masses = [b["mass"] for b in bodies]
    q = [b["q"] for b in bodies]
    v = [b["v"] for b in bodies]
    return PhaseState(np.array(masses, dtype=float), np.array(q, dtype=float),
                      np.array(v, dtype=float), float(cfg.get("G", 1.0)))


def state_to_config(state: PhaseState) -> dict:
    return {
        "schema": "kolmo.nbody.config/1",
        "G": state.G,
        "bodies": [
            {"mass": float(m), "q": [float(x) for x in q], "v": [float(x) for x in v]}
            for m, q, v in zip(state.masses, state.q, state.v)
        ],
    }
