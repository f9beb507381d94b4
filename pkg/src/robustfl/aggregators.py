"""Robust aggregation rules mapping a set of client vectors to one vector.

Every rule takes an (n, d) matrix with one client update per row and returns a
length-d vector. ``f`` is the number of faulty rows the rule is asked to
withstand; each rule raises ``ValueError`` naming the violated inequality when
(n, f) is infeasible. Ties are always broken toward lower row indices (or the
lexicographically smallest index subset) so results are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .numerics import as_vector_set, coord_order_stats, pairwise_sq_dists, top_eigenpair

AGGREGATOR_NAMES = (
    "Average",
    "Median",
    "TrMean",
    "GeometricMedian",
    "MultiKrum",
    "MeaMed",
    "MDA",
    "CenteredClipping",
    "MoNNA",
    "SMEA",
    "CAF",
)

# Exhaustive subset rules (MDA, SMEA) enumerate C(n, n - f) candidates and
# refuse inputs beyond this many rows.
SUBSET_ENUMERATION_LIMIT = 25

WEISZFELD_MAX_STEPS = 100
WEISZFELD_STEP_RTOL = 1e-8
WEISZFELD_EPS = 1e-12

SPECTRAL_FILTER_MAX_STEPS = 50
SPECTRAL_FILTER_EIGENVALUE_FLOOR = 1e-12

DEFAULT_CLIP_RADIUS = 100.0
DEFAULT_CLIP_STEPS = 1


def _check_f(name: str, n: int, f: int, minimum: int, inequality: str) -> None:
    if f < 0:
        raise ValueError(f"{name} requires f >= 0, got f={f}")
    if n < minimum:
        raise ValueError(f"{name} requires {inequality} (got n={n}, f={f})")


def average(xs) -> np.ndarray:
    """Coordinate-wise mean of all rows."""
    return as_vector_set(xs).mean(axis=0)


def median(xs) -> np.ndarray:
    """Coordinate-wise median (midpoint of the two central values for even n)."""
    return np.median(as_vector_set(xs), axis=0)


def trmean(xs, f: int) -> np.ndarray:
    """Trimmed mean: drop the f smallest and f largest values per coordinate."""
    xs = as_vector_set(xs)
    _check_f("TrMean", len(xs), f, 2 * f + 1, "n > 2f")
    return coord_order_stats(xs, f, f)


def geometric_median(
    xs,
    *,
    max_steps: int = WEISZFELD_MAX_STEPS,
    rtol: float = WEISZFELD_STEP_RTOL,
    eps: float = WEISZFELD_EPS,
) -> np.ndarray:
    """Smoothed Weiszfeld iteration for the point minimising summed distances.

    Starts from the coordinate-wise mean and reweights by inverse distance,
    flooring each distance at ``eps`` so the iteration survives landing
    exactly on an input row. Stops after ``max_steps`` or once the step is
    below ``rtol`` times the farthest input's distance, a scale that does not
    move under translation. Convergence is sublinear when the optimum sits on
    an input row, so the iterate is replaced by the best input row whenever
    one attains a strictly smaller summed distance.
    """
    xs = as_vector_set(xs)
    v = xs.mean(axis=0)
    for _ in range(max_steps):
        dists = np.linalg.norm(xs - v, axis=1)
        inv = 1.0 / np.maximum(dists, eps)
        v_new = (inv[:, None] * xs).sum(axis=0) / inv.sum()
        step = float(np.linalg.norm(v_new - v))
        v = v_new
        if step <= rtol * float(dists.max()):
            break

    def objective(point: np.ndarray) -> float:
        return float(np.linalg.norm(xs - point, axis=1).sum())

    best_row = min(range(len(xs)), key=lambda i: objective(xs[i]))
    if objective(xs[best_row]) < objective(v):
        return xs[best_row].copy()
    return v


def multi_krum(xs, f: int) -> np.ndarray:
    """Mean of the n - f rows with the smallest summed distances to their
    n - f - 1 nearest other rows."""
    xs = as_vector_set(xs)
    n = len(xs)
    _check_f("MultiKrum", n, f, f + 2, "n >= f + 2")
    d2 = pairwise_sq_dists(xs)
    keep_neighbors = n - f - 1
    scores = np.empty(n)
    for i in range(n):
        others = np.delete(d2[i], i)
        order = np.argsort(others, kind="stable")
        scores[i] = others[order[:keep_neighbors]].sum()
    chosen = np.argsort(scores, kind="stable")[: n - f]
    return xs[chosen].mean(axis=0)


def meamed(xs, f: int) -> np.ndarray:
    """Per coordinate, mean of the n - f values closest to that coordinate's
    median."""
    xs = as_vector_set(xs)
    n = len(xs)
    _check_f("MeaMed", n, f, f + 1, "n > f")
    deviations = np.abs(xs - np.median(xs, axis=0))
    order = np.argsort(deviations, axis=0, kind="stable")
    kept = np.take_along_axis(xs, order[: n - f], axis=0)
    return kept.mean(axis=0)


def mda(xs, f: int) -> np.ndarray:
    """Mean over the size-(n - f) subset of rows with minimum diameter.

    Enumerates all subsets, so n is capped at SUBSET_ENUMERATION_LIMIT.
    Diameter ties are refined by the whole sorted pairwise-distance profile
    (two subsets sharing their farthest pair often tie on diameter alone, and
    the profile depends only on the point set, keeping the rule independent of
    row order); identical profiles fall back to the smallest index set.
    """
    xs = as_vector_set(xs)
    n = len(xs)
    _check_f("MDA", n, f, f + 1, "n > f")
    if n > SUBSET_ENUMERATION_LIMIT:
        raise ValueError(f"MDA enumerates subsets and requires n <= {SUBSET_ENUMERATION_LIMIT}, got n={n}")
    d2 = pairwise_sq_dists(xs)
    rows = np.triu_indices(n - f, k=1)
    best_subset = None
    best_profile = None
    for subset in itertools.combinations(range(n), n - f):
        profile = tuple(np.sort(d2[np.ix_(subset, subset)][rows])[::-1]) if n - f > 1 else (0.0,)
        if best_profile is None or profile < best_profile:
            best_profile = profile
            best_subset = subset
    return xs[list(best_subset)].mean(axis=0)


@dataclass
class CenteredClipState:
    """Carry-over center for CenteredClipping; ``prev`` is the last output."""

    prev: np.ndarray | None = None

    def reset(self) -> None:
        self.prev = None


def centered_clipping(
    xs,
    state: CenteredClipState | None = None,
    tau: float = DEFAULT_CLIP_RADIUS,
    iters: int = DEFAULT_CLIP_STEPS,
) -> np.ndarray:
    """Iteratively re-center on the mean of updates clipped to radius tau.

    Each pass sets v <- v + mean_i clip(x_i - v, tau) where clip rescales to
    norm tau (vectors already inside the ball, and exact zeros, pass through
    unchanged). The starting center is ``state.prev`` when present, else the
    origin, and the final center is written back to ``state``.
    """
    xs = as_vector_set(xs)
    n, d = xs.shape
    if tau <= 0:
        raise ValueError(f"CenteredClipping requires tau > 0, got {tau}")
    if iters < 1:
        raise ValueError(f"CenteredClipping requires iters >= 1, got {iters}")
    if state is not None and state.prev is not None:
        v = np.asarray(state.prev, dtype=np.float64)
        if v.shape != (d,):
            raise ValueError(f"carried center has dimension {v.shape}, expected ({d},)")
    else:
        v = np.zeros(d)
    for _ in range(iters):
        deltas = xs - v
        norms = np.linalg.norm(deltas, axis=1)
        scale = np.where(norms > tau, tau / np.where(norms > 0, norms, 1.0), 1.0)
        v = v + (deltas * scale[:, None]).mean(axis=0)
    if state is not None:
        state.prev = v.copy()
    return v


def monna(xs, f: int, pivot_index: int = 0) -> np.ndarray:
    """Mean of the n - f rows nearest to the pivot row (itself included)."""
    xs = as_vector_set(xs)
    n = len(xs)
    _check_f("MoNNA", n, f, f + 1, "n > f")
    if not 0 <= pivot_index < n:
        raise ValueError(f"pivot_index must lie in [0, {n}), got {pivot_index}")
    d2 = np.einsum("ij,ij->i", xs - xs[pivot_index], xs - xs[pivot_index])
    order = np.argsort(d2, kind="stable")
    return xs[order[: n - f]].mean(axis=0)


def smea(xs, f: int) -> np.ndarray:
    """Mean over the size-(n - f) subset whose empirical covariance has the
    smallest top eigenvalue.

    Enumerates all subsets (n capped at SUBSET_ENUMERATION_LIMIT); eigenvalue
    ties resolve to the lexicographically smallest index set.
    """
    xs = as_vector_set(xs)
    n = len(xs)
    _check_f("SMEA", n, f, f + 1, "n > f")
    if n > SUBSET_ENUMERATION_LIMIT:
        raise ValueError(f"SMEA enumerates subsets and requires n <= {SUBSET_ENUMERATION_LIMIT}, got n={n}")
    best_subset = None
    best_lam = np.inf
    for subset in itertools.combinations(range(n), n - f):
        lam, _ = top_eigenpair(xs[list(subset)])
        if lam < best_lam:
            best_lam = lam
            best_subset = subset
    return xs[list(best_subset)].mean(axis=0)


def caf(xs, f: int) -> np.ndarray:
    """Covariance-agnostic filter: soft-downweight rows along the top
    principal direction until f units of weight mass are removed.

    Starting from unit weights, each pass computes the weighted mean, the top
    eigenpair of the weighted covariance, squared projections tau_i of the
    rows onto the eigenvector, and rescales w_i by (1 - tau_i / max_j tau_j).
    The row with maximal projection is zeroed exactly, so at most one pass per
    row is needed. Stops when the removed mass reaches f, when one weighted
    row remains, or when the residual spread is numerically zero.
    """
    xs = as_vector_set(xs)
    n = len(xs)
    _check_f("CAF", n, f, f + 1, "n > f")
    w = np.ones(n)
    mu = xs.mean(axis=0)
    for _ in range(SPECTRAL_FILTER_MAX_STEPS):
        total = w.sum()
        if total <= 0.0:
            return mu
        mu = (w @ xs) / total
        if n - total >= f or np.count_nonzero(w) <= 1:
            return mu
        lam, direction = top_eigenpair(xs, w)
        if lam <= SPECTRAL_FILTER_EIGENVALUE_FLOOR:
            return mu
        tau = np.square((xs - mu) @ direction)
        w = w * (1.0 - tau / tau.max())
    total = w.sum()
    return (w @ xs) / total if total > 0 else mu


# --------------------------------------------------------------------------- #
# Config-driven construction
# --------------------------------------------------------------------------- #

# Optional per-rule parameters accepted in AggregatorSpec.params.
_RULE_PARAMS: dict[str, frozenset[str]] = {name: frozenset() for name in AGGREGATOR_NAMES}
_RULE_PARAMS["CenteredClipping"] = frozenset({"tau", "iters"})
_RULE_PARAMS["MoNNA"] = frozenset({"pivot"})


@dataclass
class AggregatorSpec:
    """Declarative description of one aggregation rule."""

    name: str
    f: int = 0
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in AGGREGATOR_NAMES:
            raise ValueError(f"unknown aggregator {self.name!r}; valid rules: {', '.join(AGGREGATOR_NAMES)}")
        if self.f < 0:
            raise ValueError(f"f must be nonnegative, got {self.f}")
        unknown = set(self.params) - _RULE_PARAMS[self.name]
        if unknown:
            raise ValueError(f"{self.name} does not accept parameters {sorted(unknown)}")


class ConfiguredAggregator:
    """Callable aggregation rule bound to its parameters.

    CenteredClipping instances keep their carry-over center here; every other
    rule is stateless. ``reset`` clears the memory for a fresh run.
    """

    def __init__(self, spec: AggregatorSpec):
        self.spec = spec
        self.clip_state = CenteredClipState() if spec.name == "CenteredClipping" else None

    def __call__(self, xs) -> np.ndarray:
        name, f, p = self.spec.name, self.spec.f, self.spec.params
        if name == "Average":
            return average(xs)
        if name == "Median":
            return median(xs)
        if name == "TrMean":
            return trmean(xs, f)
        if name == "GeometricMedian":
            return geometric_median(xs)
        if name == "MultiKrum":
            return multi_krum(xs, f)
        if name == "MeaMed":
            return meamed(xs, f)
        if name == "MDA":
            return mda(xs, f)
        if name == "CenteredClipping":
            return centered_clipping(
                xs,
                self.clip_state,
                tau=float(p.get("tau", DEFAULT_CLIP_RADIUS)),
                iters=int(p.get("iters", DEFAULT_CLIP_STEPS)),
            )
        if name == "MoNNA":
            return monna(xs, f, pivot_index=int(p.get("pivot", 0)))
        if name == "SMEA":
            return smea(xs, f)
        return caf(xs, f)

    def reset(self) -> None:
        if self.clip_state is not None:
            self.clip_state.reset()


def make_aggregator(spec: AggregatorSpec) -> ConfiguredAggregator:
    """Instantiate the callable rule described by ``spec``."""
    return ConfiguredAggregator(spec)
