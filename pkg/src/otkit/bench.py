"""Phase-transition benchmark harness: seeded Gaussian ensembles, success-rate
grids over (sampling rate, sparsity ratio), 50% transition estimation, and
deterministic CSV output.

Reproducibility contract: every trial derives its own 64-bit seed from
(base seed, algorithm, grid indices, trial index) through BLAKE2b, and all
randomness flows through a named generator (PCG64), so a grid is a pure
function of its arguments.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .algorithms import AlgorithmConfig, run
from .core import ProblemInstance
from .errors import EnumerationGuardError

GENERATOR_NAME = "pcg64"
SUCCESS_REL_TOL = 1e-3  # a trial succeeds iff ||x - truth|| / ||truth|| <= this


@dataclass(frozen=True)
class EnsembleSpec:
    """One cell of the random ensemble: dimension n, sampling rate kappa = m/n,
    sparsity ratio rho = k/m, noise level, and the trial seed."""

    n: int
    kappa: float
    rho: float
    noise_eps: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 < self.kappa <= 1:
            raise ValueError("kappa must be in (0, 1]")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must be in (0, 1]")
        if self.noise_eps < 0:
            raise ValueError("noise_eps must be nonnegative")

    @property
    def m(self):
        return math.ceil(self.kappa * self.n)

    @property
    def k(self):
        return max(1, int(math.floor(self.rho * self.m + 0.5)))


def generate_instance(spec):
    """Draw the instance the spec describes, fully determined by spec.seed.

    A is m x n i.i.d. standard normal with every column scaled to unit norm;
    the truth is k-sparse with a uniform random support and standard normal
    nonzeros; the noise is noise_eps times a unit-norm Gaussian direction.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    m, n, k = spec.m, spec.n, spec.k
    A = rng.standard_normal((m, n))
    A /= np.linalg.norm(A, axis=0)
    supp = np.sort(rng.choice(n, size=k, replace=False))
    truth = np.zeros(n)
    truth[supp] = rng.standard_normal(k)
    if spec.noise_eps > 0:
        h = rng.standard_normal(m)
        h /= np.linalg.norm(h)
        noise = spec.noise_eps * h
        y = A @ truth + noise
    else:
        noise = None
        y = A @ truth
    return ProblemInstance(A=A, y=y, k=k, truth=truth, noise=noise)


def equiangular_frame(n, rng=None):
    """(n-1) x n matrix with unit columns and pairwise inner products -1/(n-1).

    Every t columns then have order-t isometry constant exactly (t-1)/(n-1),
    which makes this family handy for exercising the bound machinery against
    closed-form constants.  An optional rng applies a random row rotation
    (the column Gram, hence every constant, is unchanged).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    M = np.eye(n) - np.ones((n, n)) / n
    vals, vecs = np.linalg.eigh(M)
    B = (vecs[:, 1:] * np.sqrt(vals[1:])).T  # (n-1) x n with Gram = M
    A = B / np.linalg.norm(B, axis=0)
    if rng is not None:
        Q, R = np.linalg.qr(rng.standard_normal((n - 1, n - 1)))
        Q *= np.sign(np.diag(R))  # fix signs so the rotation is Haar
        A = Q @ A
    return A


def trial_seed(base_seed, algorithm, kappa_index, rho_index, trial_index):
    """Stable 64-bit per-trial seed; BLAKE2b keeps it identical across platforms."""
    key = f"{base_seed}:{algorithm}:{kappa_index}:{rho_index}:{trial_index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


@dataclass
class TrialRecord:
    """One benchmark run and its outcome."""

    spec: EnsembleSpec
    algorithm: str
    config: AlgorithmConfig
    success: bool
    iterations: int
    wall_time: float
    rel_error: float
    kappa_index: int = 0
    rho_index: int = 0
    trial_index: int = 0
    error: str | None = None


def default_config(algorithm):
    """The operating point used throughout the benchmarks."""
    return AlgorithmConfig(variant=algorithm, alpha=5.0, beta=0.2, omega=1,
                           max_iter=50, residual_tol=1e-10)


def run_trial(spec, algorithm, config=None):
    """Generate the instance, run the algorithm, score the recovery.

    Guard refusals (e.g. exact selection beyond its enumeration limit) are
    recorded as failed trials with an error tag rather than raised.  Under
    noise the residual tolerance is raised to the noise level, since no
    iterate can be expected to fit y closer than ||noise||.
    """
    if config is None:
        config = default_config(algorithm)
    cfg = config if config.variant == algorithm else replace(config, variant=algorithm)
    if spec.noise_eps > 0 and cfg.residual_tol < spec.noise_eps:
        cfg = replace(cfg, residual_tol=spec.noise_eps)
    start = time.perf_counter()
    try:
        problem = generate_instance(spec)
        result = run(problem, cfg)
        truth_norm = float(np.linalg.norm(problem.truth))
        rel = float(np.linalg.norm(result.x_final - problem.truth)) / truth_norm
        record = TrialRecord(spec=spec, algorithm=algorithm, config=cfg,
                             success=rel <= SUCCESS_REL_TOL,
                             iterations=result.iterations,
                             wall_time=time.perf_counter() - start,
                             rel_error=rel)
    except (EnumerationGuardError, ValueError) as exc:
        record = TrialRecord(spec=spec, algorithm=algorithm, config=cfg,
                             success=False, iterations=0,
                             wall_time=time.perf_counter() - start,
                             rel_error=math.inf, error=type(exc).__name__)
    return record


@dataclass
class GridResult:
    """All trial records of a success-rate grid plus the grid geometry."""

    n: int
    base_seed: int
    noise_eps: float
    kappa_list: list
    rho_list: list
    algorithms: list
    trials_per_cell: int
    records: list

    def rate(self, algorithm, kappa_index, rho_index):
        cell = [r for r in self.records
                if r.algorithm == algorithm
                and r.kappa_index == kappa_index and r.rho_index == rho_index]
        return sum(r.success for r in cell) / len(cell)

    def rates(self, algorithm):
        """Success-rate matrix indexed [kappa_index][rho_index]."""
        return [[self.rate(algorithm, ki, ri) for ri in range(len(self.rho_list))]
                for ki in range(len(self.kappa_list))]


def _grid_task(args):
    spec, algorithm, config, ki, ri, ti = args
    record = run_trial(spec, algorithm, config)
    record.kappa_index, record.rho_index, record.trial_index = ki, ri, ti
    return record


def success_grid(n, kappa_list, rho_list, trials_per_cell, algorithms,
                 configs=None, base_seed=0, noise_eps=0.0, workers=1):
    """Success rates per (algorithm, kappa, rho) cell.

    configs maps algorithm name -> AlgorithmConfig (defaults supplied where
    missing).  Trials are independent, so workers > 1 distributes them over a
    process pool; records are keyed and sorted, making the result identical
    whatever the execution order.
    """
    kappa_list = list(kappa_list)
    rho_list = list(rho_list)
    algorithms = list(algorithms)
    if not kappa_list or not rho_list or not algorithms:
        raise ValueError("kappa_list, rho_list, and algorithms must be nonempty")
    if trials_per_cell < 1:
        raise ValueError("trials_per_cell must be positive")
    configs = dict(configs or {})

    tasks = []
    for algorithm in algorithms:
        config = configs.get(algorithm) or default_config(algorithm)
        for ki, kappa in enumerate(kappa_list):
            for ri, rho in enumerate(rho_list):
                for ti in range(trials_per_cell):
                    spec = EnsembleSpec(n=n, kappa=kappa, rho=rho, noise_eps=noise_eps,
                                        seed=trial_seed(base_seed, algorithm, ki, ri, ti))
                    tasks.append((spec, algorithm, config, ki, ri, ti))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_grid_task, tasks, chunksize=4))
    else:
        records = [_grid_task(t) for t in tasks]
    records.sort(key=lambda r: (r.algorithm, r.kappa_index, r.rho_index, r.trial_index))
    return GridResult(n=n, base_seed=base_seed, noise_eps=noise_eps,
                      kappa_list=kappa_list, rho_list=rho_list,
                      algorithms=algorithms, trials_per_cell=trials_per_cell,
                      records=records)


def transition_point(points):
    """rho at which a success curve first crosses 50% from above.

    points is a sequence of (rho, rate) sorted by rho; piecewise-linear
    interpolation locates the crossing.  Without a crossing the nearest
    boundary is returned with extrapolated=True.

    Returns (rho_50, extrapolated).
    """
    pts = [(float(r), float(s)) for r, s in points]
    if len(pts) < 2:
        raise ValueError("need at least two (rho, rate) points")
    if any(pts[i][0] >= pts[i + 1][0] for i in range(len(pts) - 1)):
        raise ValueError("points must be strictly increasing in rho")
    for (r0, s0), (r1, s1) in zip(pts, pts[1:]):
        if s0 >= 0.5 > s1:
            return r0 + (r1 - r0) * (s0 - 0.5) / (s0 - s1), False
    if all(s < 0.5 for _, s in pts):
        return pts[0][0], True
    return pts[-1][0], True


def transition_curve(grid, algorithm):
    """Per-kappa transition estimates: list of (kappa, rho_50, extrapolated)."""
    out = []
    for ki, kappa in enumerate(grid.kappa_list):
        points = list(zip(grid.rho_list, grid.rates(algorithm)[ki]))
        rho50, flag = transition_point(points)
        out.append((kappa, rho50, flag))
    return out


# --- CSV output ---------------------------------------------------------------
#
# Trials CSV: one meta line `# generator=<name>, base_seed=<u64>, n=<int>`,
# then rows algorithm,kappa,rho,m,k,trial,seed,success,iters,rel_error,wall_time_s.
# Transition CSV: rows algorithm,kappa,rho_50.


def write_trials_csv(fh, grid, include_timing=False):
    """Write the trial rows.  Timing is written as 0 unless include_timing is
    set, keeping the default output byte-reproducible run to run."""
    fh.write(f"# generator={GENERATOR_NAME}, base_seed={grid.base_seed}, n={grid.n}\n")
    for r in grid.records:
        wall = repr(r.wall_time) if include_timing else "0"
        fh.write(",".join([
            r.algorithm,
            repr(float(r.spec.kappa)),
            repr(float(r.spec.rho)),
            str(r.spec.m),
            str(r.spec.k),
            str(r.trial_index),
            str(r.spec.seed),
            "1" if r.success else "0",
            str(r.iterations),
            repr(float(r.rel_error)),
            wall,
        ]) + "\n")


def write_transition_csv(fh, grid):
    fh.write(f"# generator={GENERATOR_NAME}, base_seed={grid.base_seed}, n={grid.n}\n")
    for algorithm in grid.algorithms:
        for kappa, rho50, _ in transition_curve(grid, algorithm):
            fh.write(f"{algorithm},{repr(float(kappa))},{repr(float(rho50))}\n")
