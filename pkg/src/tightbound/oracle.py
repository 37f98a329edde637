"""Brute-force checks and the example-family experiment.

Nothing here calls the closed-form bound machinery except where a check
explicitly compares against it; the entropy oracle in particular searches
distributions directly.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .bounds import ConfusionMatrix, entropies, equivocation_bound, kovalevsky_bound, validate_confusion

MAP_TOL = 1e-12


class InfeasibleError(ValueError):
    pass


class ViolationFound(AssertionError):
    def __init__(self, report: "StressReport"):
        self.report = report
        seeds = ", ".join(str(v["seed"]) for v in report.violations[:5])
        super().__init__(f"{len(report.violations)} bound violation(s); offending seeds: {seeds}")


# ---------------------------------------------------------------------------
# minimum-entropy oracle


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def _partitions(units: int, parts: int, cap: int):
    """Nonincreasing tuples of ``parts`` nonnegative ints summing to ``units``, each ``<= cap``."""
    if parts == 0:
        if units == 0:
            yield ()
        return
    hi = min(cap, units)
    lo = -(-units // parts)  # ceil: first part must be at least the average
    for first in range(hi, lo - 1, -1):
        for rest in _partitions(units - first, parts - 1, first):
            yield (first,) + rest


def _pattern_search(q: np.ndarray, p_max: float, step: float) -> tuple[np.ndarray, float]:
    """Pairwise mass transfers of size ``<= step`` while entropy decreases."""
    best = _entropy(np.append(q, p_max))
    improved = True
    while improved:
        improved = False
        for i, j in combinations(range(len(q)), 2):
            for src, dst in ((i, j), (j, i)):
                amount = min(step, q[src], p_max - q[dst])
                if amount <= 0:
                    continue
                trial = q.copy()
                trial[src] -= amount
                trial[dst] += amount
                h = _entropy(np.append(trial, p_max))
                if h < best - 1e-15:
                    q, best, improved = trial, h, True
    return q, best


def single_min_entropy(p_max: float, n: int, coarse: float | None = None, fine: float = 1e-5) -> float:
    """Smallest entropy (bits) of one distribution on ``n`` points with largest mass ``p_max``.

    Enumerates a coarse grid over how the remaining ``1 - p_max`` is spread
    over the other ``n - 1`` points, then refines the incumbent by local
    pairwise transfers with steps shrinking down to ``fine``.
    """
    _check_feasible(p_max, n)
    rest = 1.0 - p_max
    if n == 1 or rest <= 1e-15:
        return 0.0
    if coarse is None:
        # keeps the enumeration to ~1e4 points for every n <= 6
        coarse = 1e-3 if n <= 4 else 1e-2

    units = int(math.floor(rest / coarse + 1e-9))
    cap = int(math.floor(p_max / coarse + 1e-9))
    slack = rest - units * coarse
    best_h, best_q = math.inf, None
    for parts in _partitions(units, n - 1, cap):
        q = np.array(parts, dtype=float) * coarse
        # the sub-grid remainder goes wherever it fits
        for k in range(n - 2, -1, -1):
            if q[k] + slack <= p_max + 1e-15:
                q[k] += slack
                break
        else:
            continue
        h = _entropy(np.append(q, p_max))
        if h < best_h:
            best_h, best_q = h, q
    if best_q is None:
        best_q = np.full(n - 1, rest / (n - 1))

    step = coarse
    while step >= fine * (1 - 1e-9):
        best_q, best_h = _pattern_search(best_q, p_max, step)
        step /= 10
    return best_h


def _check_feasible(p_max: float, n: int) -> None:
    if n < 1:
        raise InfeasibleError("support size must be positive")
    if not (0.0 < p_max <= 1.0) or p_max * n < 1.0 - 1e-12:
        raise InfeasibleError(f"no distribution on {n} points has maximum {p_max}")


def default_resolution(n: int, at_least: int = 100) -> int:
    """Lattice size: a multiple of lcm(1..n), so uniform distributions on up to n points are lattice points."""
    base = math.lcm(*range(1, n + 1))
    return base * max(1, -(-at_least // base))


@lru_cache(maxsize=None)
def lattice_min_entropy(n: int, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive minimum entropy per largest mass over the lattice ``{k / resolution}``.

    Returns ``(p_max_values, min_entropy)`` for every attainable largest
    mass, found by enumerating all sorted lattice distributions on ``n``
    points.
    """
    best = np.full(resolution + 1, np.inf)
    for parts in _partitions(resolution, n, resolution):
        p = np.array(parts, dtype=float) / resolution
        h = _entropy(p)
        k = parts[0]
        if h < best[k]:
            best[k] = h
    ks = np.flatnonzero(np.isfinite(best))
    return ks / resolution, best[ks]


def min_entropy_oracle(p_max: float, n: int, resolution: int | None = None) -> float:
    """Brute-force minimum of ``H(X|Y)`` over channels on ``n`` signals whose MAP decoder succeeds with probability ``p_max``.

    Each output contributes one posterior; averaging posteriors whose largest
    masses straddle ``p_max`` gives every attainable mixture, and two
    components suffice on a line. The search runs over all pairs of lattice
    points from :func:`lattice_min_entropy`.
    """
    _check_feasible(p_max, n)
    if resolution is None:
        resolution = default_resolution(n)
    q, h = lattice_min_entropy(n, resolution)
    exact = np.flatnonzero(np.abs(q - p_max) < 1e-12)
    best = float(h[exact].min()) if exact.size else math.inf
    below = np.flatnonzero(q < p_max)
    above = np.flatnonzero(q > p_max)
    for i in below if above.size else ():
        t = (q[above] - p_max) / (q[above] - q[i])  # weight on the lower point
        chord = t * h[i] + (1 - t) * h[above]
        best = min(best, float(chord.min()))
    return best


# ---------------------------------------------------------------------------
# random channels


@dataclass(frozen=True, eq=False)
class RandomChannel:
    """Joint ``p(x, y)`` with its RNG seed.

    ``decode`` optionally fixes the decoder per output; it must pick a
    maximum-posterior signal (used for channels with flat posteriors, where
    the lowest-index tie rule would relabel the decodes).
    """

    joint: np.ndarray
    seed: int | None = None
    decode: tuple[int, ...] | None = None

    @property
    def nx(self) -> int:
        return self.joint.shape[0]

    @property
    def ny(self) -> int:
        return self.joint.shape[1]


def trial_seed(master_seed: int, index: int) -> int:
    """Seed for trial ``index``, independent of execution order."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, dtype=np.uint32)[0])


def _sample_joint(rng: np.random.Generator, nx: int, ny: int) -> np.ndarray:
    # gamma shapes from near-sparse to near-uniform so both regimes get exercised
    shape = math.exp(rng.uniform(math.log(0.05), math.log(3.0)))
    joint = rng.gamma(shape, size=(nx, ny))
    if joint.sum() <= 0:
        joint[rng.integers(nx), rng.integers(ny)] = 1.0
    return joint / joint.sum()


def random_channel(nx: int, ny: int, seed: int) -> RandomChannel:
    if nx < 1 or ny < 1:
        raise ValueError("channel dimensions must be positive")
    joint = _sample_joint(np.random.default_rng(seed), nx, ny)
    return RandomChannel(joint, seed)


def conditional_entropy(joint: np.ndarray) -> float:
    """``H(X|Y)`` in bits for a joint with signals on rows."""
    joint = np.asarray(joint, dtype=float)
    h_joint = _entropy(joint.ravel())
    h_y = _entropy(joint.sum(axis=0))
    return max(h_joint - h_y, 0.0)


def map_decode(joint: np.ndarray) -> np.ndarray:
    """Per-output MAP decode, ties to the smallest signal index."""
    return np.argmax(joint, axis=0)


def channel_confusion(ch: RandomChannel) -> ConfusionMatrix:
    joint = np.asarray(ch.joint, dtype=float)
    if ch.decode is None:
        g = map_decode(joint)
    else:
        g = np.asarray(ch.decode, dtype=int)
        top = joint.max(axis=0)
        bad = np.flatnonzero(joint[g, np.arange(ch.ny)] < top - MAP_TOL)
        if bad.size:
            raise ValueError(f"declared decode is not MAP for output(s) {bad.tolist()}")
    conf = np.zeros((ch.nx, ch.nx))
    for y in range(ch.ny):
        conf[:, g[y]] += joint[:, y]
    return validate_confusion(conf)


def achieving_as_random(ach) -> RandomChannel:
    """Wrap an achieving channel so its own decodes are kept under ties."""
    return RandomChannel(ach.joint(), None, tuple(ach.decodes()))


# ---------------------------------------------------------------------------
# stress test


@dataclass
class StressReport:
    trials: int
    master_seed: int
    min_slack: float
    violations: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "min_slack": self.min_slack,
            "violations": self.violations,
            "master_seed": self.master_seed,
        }


def channel_slack(ch: RandomChannel) -> float:
    """``H(X|Y)`` minus the confusion-matrix bound of the channel's own MAP decoder."""
    return conditional_entropy(ch.joint) - equivocation_bound(channel_confusion(ch))


def _one_trial(args) -> tuple[int, float, int, int]:
    master_seed, index, nx_max, ny_max = args
    seed = trial_seed(master_seed, index)
    dims = np.random.default_rng([seed, 1])
    nx = int(dims.integers(1, nx_max + 1))
    ny = int(dims.integers(1, ny_max + 1))
    return seed, channel_slack(random_channel(nx, ny, seed)), nx, ny


def bound_stress_test(
    trials: int,
    nx_max: int = 5,
    ny_max: int = 40,
    seed: int = 0,
    tol: float = 1e-9,
    workers: int = 1,
    raise_on_violation: bool = True,
) -> StressReport:
    """Check ``H(X|Y) >= bound`` on ``trials`` seeded random channels."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = [(seed, i, nx_max, ny_max) for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_one_trial, jobs, chunksize=256))
    else:
        results = [_one_trial(j) for j in jobs]

    report = StressReport(trials=trials, master_seed=seed, min_slack=math.inf)
    for index, (s, slack, nx, ny) in enumerate(results):
        report.min_slack = min(report.min_slack, slack)
        if slack < -tol:
            report.violations.append({"trial": index, "seed": s, "nx": nx, "ny": ny, "slack": slack})
    if report.violations and raise_on_violation:
        raise ViolationFound(report)
    return report


# ---------------------------------------------------------------------------
# example family


def example_family(n: int) -> ConfusionMatrix:
    """Confusion matrix where only the last decode ever errs.

    Diagonal ``1/(2n)`` for the first ``n - 1`` decodes, the last column
    spreads ``1/(2n)`` over every other signal and ``1/n`` on itself.
    """
    if n < 2:
        raise ValueError("example family needs n >= 2")
    joint = np.zeros((n, n))
    for x in range(n - 1):
        joint[x, x] = 1.0 / (2 * n)
        joint[x, n - 1] = 1.0 / (2 * n)
    joint[n - 1, n - 1] = 1.0 / n
    return validate_confusion(joint)


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    h_post: float
    bound_ours: float
    bound_kov: float


def figure2b_table(n_values) -> list[ExperimentRow]:
    rows = []
    for n in n_values:
        cm = example_family(n)
        rows.append(
            ExperimentRow(
                n=n,
                h_post=entropies(cm)[1],
                bound_ours=equivocation_bound(cm),
                bound_kov=kovalevsky_bound(cm),
            )
        )
    return rows


def rows_to_csv(rows: list[ExperimentRow], digits: int = 12) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "h_post", "bound_ours", "bound_kov"])
    for r in rows:
        w.writerow([r.n] + [f"{v:.{digits}g}" for v in (r.h_post, r.bound_ours, r.bound_kov)])
    return buf.getvalue()
