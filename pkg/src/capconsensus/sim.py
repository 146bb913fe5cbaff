"""Monte-Carlo and Lyapunov checks of steady-state population variance.

Each dimension ``l`` runs ``dx = -L_l x dt + dW`` independently. The
Euler-Maruyama estimate is biased by roughly ``dt * lambda / 2`` per mode
(relative), so tight comparisons against H* need ``dt * lambda_max << 1``;
:func:`discrete_lyapunov_variance` gives the exact value the discretised
chain converges to.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov, solve_discrete_lyapunov

from .errors import InvalidConfig, InvalidInput
from .graph import CapacitatedGraph, Spectrum, hstar
from .kernels import em_accumulate
from .solution import DesignSolution

CHUNK_STEPS = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    t_total: float = 2000.0
    burn_in: float = 200.0
    trials: int = 8
    seed: int = 0
    noise: bool = True
    initial_std: float = 0.0

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise InvalidConfig("dt must be positive")
        if not 0 <= self.burn_in < self.t_total:
            raise InvalidConfig("need 0 <= burn_in < t_total")
        if self.trials < 1:
            raise InvalidConfig("trials must be at least 1")
        if self.initial_std < 0:
            raise InvalidConfig("initial_std must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfig("seed must fit in 64 unsigned bits")

    @property
    def steps(self) -> int:
        return int(round(self.t_total / self.dt))

    @property
    def record_from(self) -> int:
        return int(round(self.burn_in / self.dt))


@dataclass(frozen=True)
class VarianceEstimate:
    per_dim: tuple[float, ...]
    per_dim_se: tuple[float, ...]
    final_variance: tuple[float, ...]
    config: SimConfig
    per_trial: tuple[tuple[float, ...], ...] = ()

    @property
    def total(self) -> float:
        return math.fsum(self.per_dim)

    @property
    def total_se(self) -> float:
        return math.sqrt(math.fsum(s * s for s in self.per_dim_se))

    def to_json(self) -> dict:
        return {
            "per_dim": list(self.per_dim),
            "per_dim_se": list(self.per_dim_se),
            "total": self.total,
            "total_se": self.total_se,
            "final_variance": list(self.final_variance),
            "per_trial": [list(t) for t in self.per_trial],
            "config": asdict(self.config),
        }


def _laplacian(n: int, edges) -> np.ndarray:
    L = np.zeros((n, n))
    for u, v in edges:
        L[u, v] = L[v, u] = -1.0
        L[u, u] += 1.0
        L[v, v] += 1.0
    return L


def _trial_rng(seed: int, dim: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), dim, trial]))


def simulate(solution: DesignSolution, cfg: SimConfig) -> VarianceEstimate:
    """Time-averaged population variance per dimension after burn-in.

    Trial ``t`` of dimension ``l`` draws from its own stream seeded by
    ``(seed, l, t)``, so results do not depend on how trials are scheduled.
    """
    n = solution.n
    if n < 2:
        raise InvalidInput("simulation needs at least two nodes")
    laps = []
    for ell, sub in enumerate(solution.subgraphs):
        L = _laplacian(n, sub)
        spec = Spectrum(np.linalg.eigvalsh(L))
        if spec.zero_count > 1:
            raise InvalidInput(f"subgraph {ell} is disconnected")
        if cfg.dt >= 2.0 / spec.eigenvalues[-1]:
            raise InvalidConfig(f"dt = {cfg.dt} is unstable for subgraph {ell} (lambda_max = {spec.eigenvalues[-1]:.6g})")
        laps.append(L)
    steps, start = cfg.steps, cfg.record_from
    recorded = steps - start
    means, ses, finals, trials = [], [], [], []
    for ell, L in enumerate(laps):
        rngs = [_trial_rng(cfg.seed, ell, t) for t in range(cfg.trials)]
        x = np.stack([r.standard_normal(n) * cfg.initial_std for r in rngs])
        acc = np.zeros(cfg.trials)
        done = 0
        while done < steps:
            block = min(CHUNK_STEPS, steps - done)
            if cfg.noise:
                noise = np.stack([r.standard_normal((block, n)) for r in rngs], axis=1)
            else:
                noise = np.zeros((block, cfg.trials, n))
            em_accumulate(L, x, noise, cfg.dt, start - done, acc)
            done += block
        per_trial = acc / recorded
        means.append(float(per_trial.mean()))
        ses.append(float(per_trial.std(ddof=1) / math.sqrt(cfg.trials)) if cfg.trials > 1 else math.nan)
        finals.append(float(x.var(axis=1).mean()))
        trials.append(tuple(float(v) for v in per_trial))
    return VarianceEstimate(tuple(means), tuple(ses), tuple(finals), cfg, tuple(trials))


def analytic_variance(solution: DesignSolution) -> float:
    """Sum of per-subgraph H* (``math.inf`` if any subgraph is disconnected)."""
    return math.fsum(hstar(CapacitatedGraph(solution.n, sub, (1,) * len(sub))) for sub in solution.subgraphs)


def _projected_trace(P: np.ndarray) -> float:
    n = P.shape[0]
    proj = np.eye(n) - 1.0 / n
    return float(np.trace(proj @ P @ proj)) / n


def lyapunov_variance(n: int, edges) -> float:
    """Steady population variance from ``A P + P A^T + I = 0``.

    The consensus direction is marginal, so ``A = -(L + J/n)`` shifts it to a
    stable mode and the projection onto the disagreement subspace drops it.
    """
    A = -(_laplacian(n, edges) + 1.0 / n)
    return _projected_trace(solve_continuous_lyapunov(A, -np.eye(n)))


def discrete_lyapunov_variance(n: int, edges, dt: float) -> float:
    """Stationary population variance of the Euler-Maruyama chain with step ``dt``."""
    M = np.eye(n) - dt * (_laplacian(n, edges) + 1.0 / n)
    return _projected_trace(solve_discrete_lyapunov(M, dt * np.eye(n)))


def lyapunov_total(solution: DesignSolution, dt: float | None = None) -> float:
    if dt is None:
        return math.fsum(lyapunov_variance(solution.n, sub) for sub in solution.subgraphs)
    return math.fsum(discrete_lyapunov_variance(solution.n, sub, dt) for sub in solution.subgraphs)
