"""Closed-loop trajectory simulation and empirical contraction measurement.

Discrete-time systems are iterated exactly as written; continuous-time
systems use classical fixed-step fourth-order integration.  Contraction is
measured on trajectory pairs through the weighted distance ||.||_P.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import linalg
from .model import ClosedLoop, CONTINUOUS, DISCRETE, Gains, LureSystem, NonlinearFn, close_loop

# Ratio denominators below this multiple of the initial distance are
# treated as degenerate and excluded.
DEGENERACY_FACTOR = 1e-12


class DivergenceError(RuntimeError):
    """A simulated state became non-finite."""

    def __init__(self, step):
        super().__init__(f"trajectory diverged at step {step}")
        self.step = step


@dataclass(frozen=True)
class Trajectory:
    """A simulated state sequence on a uniform grid.

    ``times`` holds step indices (discrete) or uniform times (continuous).
    """

    times: np.ndarray
    states: np.ndarray
    domain: str
    psi_name: str = ""
    psi_evaluations: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.states, dtype=float)
        if t.shape[0] != x.shape[0]:
            raise linalg.DimensionError("times and states lengths differ")
        if not np.all(np.isfinite(x)):
            raise linalg.NumericError("trajectory contains non-finite states")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", x)


def simulate_dt(cl: ClosedLoop, psi: NonlinearFn, x0, steps: int) -> Trajectory:
    """Iterate x(k+1) = A_cl x(k) + B_cl psi(C x(k)) for ``steps`` steps."""
    if cl.domain != DISCRETE:
        raise ValueError("simulate_dt requires a discrete-time loop")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    if x.shape != (cl.n_x,):
        raise linalg.DimensionError(f"x0 has shape {x.shape}, expected ({cl.n_x},)")
    states = np.empty((steps + 1, cl.n_x))
    states[0] = x
    evals = 0
    for k in range(steps):
        x = cl.A_cl @ x + cl.B_cl @ psi(cl.C @ x)
        evals += 1
        if not np.all(np.isfinite(x)):
            raise DivergenceError(k + 1)
        states[k + 1] = x
    return Trajectory(times=np.arange(steps + 1, dtype=float), states=states,
                      domain=DISCRETE, psi_name=psi.name, psi_evaluations=evals)


def simulate_ct(cl: ClosedLoop, psi: NonlinearFn, x0, t_end: float,
                dt: float) -> Trajectory:
    """Integrate xdot = A_cl x + B_cl psi(C x) with fixed-step RK4."""
    if cl.domain != CONTINUOUS:
        raise ValueError("simulate_ct requires a continuous-time loop")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    if x.shape != (cl.n_x,):
        raise linalg.DimensionError(f"x0 has shape {x.shape}, expected ({cl.n_x},)")
    n_steps = int(round(t_end / dt))
    evals = 0

    def f(state):
        nonlocal evals
        evals += 1
        return cl.A_cl @ state + cl.B_cl @ psi(cl.C @ state)

    states = np.empty((n_steps + 1, cl.n_x))
    states[0] = x
    for k in range(n_steps):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(k + 1)
        states[k + 1] = x
    return Trajectory(times=dt * np.arange(n_steps + 1), states=states,
                      domain=CONTINUOUS, psi_name=psi.name, psi_evaluations=evals)


@dataclass(frozen=True)
class RateReport:
    """Per-step weighted distances and contraction measurements.

    ``ratios`` are the plain per-step distance ratios d(k+1)/d(k);
    ``energy_ratios`` are their squares (ratios of squared weighted
    distances), which is how the reference example's observed figure is
    computed.  Continuous-time reports also carry ``rates`` =
    -log(ratio)/dt.
    """

    distances: np.ndarray
    ratios: np.ndarray
    energy_ratios: np.ndarray
    max_ratio: float
    max_energy_ratio: float
    rates: Optional[np.ndarray] = None
    min_rate: Optional[float] = None
    eta: Optional[float] = None


def weighted_distance(x1, x2, p) -> float:
    d = np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float)
    q = float(d @ p @ d)
    # clip tiny negative roundoff from the quadratic form
    return float(np.sqrt(max(q, 0.0)))


def rate_estimate(traj1: Trajectory, traj2: Trajectory, p, domain: str = None,
                  dt: float = None, eta: float = None) -> RateReport:
    """Measure per-step contraction of the pair (traj1, traj2) under ||.||_P."""
    p = linalg.as_sym(p, "P")
    ok, _ = linalg.is_pd(p)
    if not ok:
        raise ValueError("P must be positive definite")
    if traj1.states.shape != traj2.states.shape or not np.array_equal(
            traj1.times, traj2.times):
        raise linalg.DimensionError("trajectories must share an identical grid")
    domain = domain or traj1.domain
    diffs = traj1.states - traj2.states
    dists = np.sqrt(np.maximum(np.einsum("ki,ij,kj->k", diffs, p, diffs), 0.0))
    if dists[0] == 0.0:
        raise ValueError("initial states coincide; contraction ratio undefined")
    thresh = DEGENERACY_FACTOR * dists[0]
    valid = dists[:-1] > thresh
    if not np.any(valid):
        raise ValueError("all steps are degenerate; no ratios defined")
    ratios = dists[1:][valid] / dists[:-1][valid]
    energy = ratios ** 2
    rates = None
    min_rate = None
    if domain == CONTINUOUS:
        if dt is None:
            dt = float(traj1.times[1] - traj1.times[0])
        rates = -np.log(np.maximum(ratios, 1e-300)) / dt
        min_rate = float(rates.min())
    return RateReport(
        distances=dists, ratios=ratios, energy_ratios=energy,
        max_ratio=float(ratios.max()), max_energy_ratio=float(energy.max()),
        rates=rates, min_rate=min_rate, eta=eta,
    )


@dataclass(frozen=True)
class CertifyReport:
    passed: bool
    worst_ratio: float
    threshold: float
    details: list = field(default_factory=list)


def certify_empirically(sys: LureSystem, gains: Gains, psis: Iterable[NonlinearFn],
                        p, eta: float, initial_pairs=None, steps: int = 10,
                        t_end: float = 10.0, dt: float = 1e-3,
                        seed: int = 0, n_pairs: int = 5,
                        tol: float = 1e-6) -> CertifyReport:
    """Simulate trajectory pairs and compare observed contraction to (P, eta).

    Fails iff any sampled pair's maximum per-step ratio exceeds eta
    (discrete) or exp(-eta dt) (continuous) beyond relative tolerance.
    Callers are expected to have validated the nonlinearities against their
    declared class beforehand.
    """
    cl = close_loop(sys, gains)
    p = linalg.as_sym(p, "P")
    if initial_pairs is None:
        rng = np.random.default_rng(seed)
        initial_pairs = [
            (rng.uniform(-1.0, 1.0, sys.n_x), rng.uniform(-1.0, 1.0, sys.n_x))
            for _ in range(n_pairs)
        ]
    if cl.domain == DISCRETE:
        threshold = float(eta)
    else:
        threshold = float(np.exp(-eta * dt))
    worst = -np.inf
    details = []
    for psi in psis:
        for x0a, x0b in initial_pairs:
            if np.allclose(x0a, x0b):
                continue
            if cl.domain == DISCRETE:
                t1 = simulate_dt(cl, psi, x0a, steps)
                t2 = simulate_dt(cl, psi, x0b, steps)
            else:
                t1 = simulate_ct(cl, psi, x0a, t_end, dt)
                t2 = simulate_ct(cl, psi, x0b, t_end, dt)
            rep = rate_estimate(t1, t2, p, eta=eta)
            worst = max(worst, rep.max_ratio)
            details.append((psi.name, rep.max_ratio))
    passed = worst <= threshold * (1.0 + tol)
    return CertifyReport(passed=passed, worst_ratio=float(worst),
                         threshold=threshold, details=details)


def write_trajectory_csv(traj: Trajectory, path):
    """Write one trajectory as CSV: header k,x1..xn (DT) or t,x1..xn (CT),
    full double precision."""
    n = traj.states.shape[1]
    label = "k" if traj.domain == DISCRETE else "t"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([label] + [f"x{i + 1}" for i in range(n)])
        for t, row in zip(traj.times, traj.states):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        domain = DISCRETE if header[0] == "k" else CONTINUOUS
        rows = [[float(v) for v in row] for row in r]
    data = np.array(rows)
    return Trajectory(times=data[:, 0], states=data[:, 1:], domain=domain)
