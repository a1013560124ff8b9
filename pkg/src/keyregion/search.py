"""Multistart search over test channels for the discrete bounds.

The union over test channels has no closed form, so both bounds are explored
numerically: each restart picks a scalarization direction ``w`` and runs a
compass search (per-coordinate steps with halving) on the row logits of
``P(U|Xt)`` and ``P(V|U)``, maximizing ``w . (r_s, -r_j, -r_l)``.  Every
evaluated point feeds the Pareto set and the per-direction support values,
whichever direction the restart was aiming at.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .discrete import (
    BoundPoint,
    ChannelEvaluator,
    DiscreteCompoundModel,
    Kind,
    TestChannelPair,
    inner_triple,
    outer_triple,
)
from .info import CondDist

DOMINANCE_TOL = 1e-9
CONVERGENCE_TOL = 1e-7
MIN_STEP = 1e-3
MAX_STEP = 8.0
LOGIT_CLIP = 30.0


def default_directions(resolution: int = 4) -> np.ndarray:
    """Weights (a, b, c) on the simplex with a > 0, for a r_s - b r_j - c r_l.

    Directions with a = 0 are left out: their support is 0, reached by a
    constant auxiliary.
    """
    out = []
    for i, j in itertools.product(range(1, resolution + 1), range(resolution + 1)):
        k = resolution - i - j
        if k >= 0:
            out.append((i, j, k))
    return np.array(out, dtype=float) / resolution


def _signed(t) -> np.ndarray:
    return np.array([t.r_s, -t.r_j, -t.r_l])


class ParetoSet:
    """Nondominated accumulator: maximize r_s, minimize r_j and r_l."""

    def __init__(self, tol: float = DOMINANCE_TOL):
        self.tol = tol
        self._obj = np.empty((0, 3))
        self._points: list[BoundPoint] = []

    def add(self, p: BoundPoint) -> bool:
        q = _signed(p.triple)
        if len(self._points) and np.any(np.all(self._obj >= q - self.tol, axis=1)):
            return False
        keep = ~np.all(q >= self._obj - self.tol, axis=1) if len(self._points) else np.ones(0, bool)
        self._points = [pt for pt, k in zip(self._points, keep) if k] + [p]
        self._obj = np.vstack([self._obj[keep], q])
        return True

    def merge(self, other: "ParetoSet") -> None:
        for p in other.points:
            self.add(p)

    @property
    def points(self) -> list[BoundPoint]:
        order = sorted(range(len(self._points)), key=lambda i: (-self._obj[i, 0], -self._obj[i, 1], -self._obj[i, 2]))
        return [self._points[i] for i in order]

    def __len__(self):
        return len(self._points)

    def support(self, directions: np.ndarray) -> np.ndarray:
        if not len(self._points):
            return np.full(len(directions), -np.inf)
        return (self._obj @ np.asarray(directions).T).max(axis=0)


def _softmax_rows(theta: np.ndarray) -> np.ndarray:
    z = theta - theta.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class _Budget:
    def __init__(self, total: int):
        self.left = total

    def take(self) -> bool:
        if self.left <= 0:
            return False
        self.left -= 1
        return True


def _initial_logits(rng: np.random.Generator, shape_q, shape_r, restart: int) -> np.ndarray:
    n = shape_q[0] * shape_q[1] + shape_r[0] * shape_r[1]
    if restart == 0:
        return np.zeros(n)  # uniform rows: U independent of everything
    if restart % 2:
        return rng.normal(0.0, 2.0, n)
    # near-deterministic maps: one dominant symbol per row
    theta = np.zeros(n)
    off = 0
    for rows, cols in (shape_q, shape_r):
        for i in range(rows):
            theta[off + i * cols + rng.integers(cols)] = 10.0
        off += rows * cols
    return theta


def _compass(objective: Callable[[np.ndarray], float | None], theta: np.ndarray, f0: float, limit: int) -> None:
    """Maximize ``objective`` from ``theta`` by per-coordinate steps.

    ``objective`` returns None once the evaluation budget is gone.
    """
    step = np.ones_like(theta)
    f = f0
    used = 0
    while used < limit:
        gain = 0.0
        for i in range(theta.size):
            improved = False
            for sign in (1.0, -1.0):
                trial = theta.copy()
                trial[i] = np.clip(trial[i] + sign * step[i], -LOGIT_CLIP, LOGIT_CLIP)
                v = objective(trial)
                used += 1
                if v is None:
                    return
                if v > f:
                    gain += v - f
                    theta, f = trial, v
                    step[i] = min(2 * step[i], MAX_STEP)
                    improved = True
                    break
            if not improved:
                step[i] *= 0.5
        if gain < CONVERGENCE_TOL and step.max() < MIN_STEP:
            return


def _run(
    shapes,
    evaluate: Callable[[np.ndarray, np.ndarray], BoundPoint],
    sinks: Sequence[Callable[[BoundPoint], None]],
    directions: np.ndarray,
    budget: int,
    seed: int,
    warm_start: Sequence[TestChannelPair] = (),
) -> None:
    (nxt, nu), (_, nv) = shapes
    rng = np.random.default_rng(seed)
    left = _Budget(budget)
    nq = nxt * nu

    def point(theta):
        q = _softmax_rows(theta[:nq].reshape(nxt, nu))
        r = _softmax_rows(theta[nq:].reshape(nu, nv))
        p = evaluate(q, r)
        for s in sinks:
            s(p)
        return p

    for t in warm_start:
        if not left.take():
            return
        p = evaluate(t.u_given_xt.rows, t.v_given_u.rows)
        for s in sinks:
            s(p)

    per_restart = max(50, budget // (4 * len(directions)))
    for restart in itertools.count():
        w = directions[restart % len(directions)]
        if not left.take():
            return
        theta = _initial_logits(rng, (nxt, nu), (nu, nv), restart)
        f0 = float(w @ _signed(point(theta).triple))

        def objective(th, w=w):
            if not left.take():
                return None
            return float(w @ _signed(point(th).triple))

        _compass(objective, theta, f0, per_restart)
        if left.left <= 0:
            return


def _channels(q, r) -> TestChannelPair:
    return TestChannelPair(CondDist(q), CondDist(r))


def _validate(budget, caps):
    n_u, n_v = caps
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if n_u < 1 or n_v < 1:
        raise ValueError(f"caps must be >= 1, got {caps}")


def search_inner_region(
    m: DiscreteCompoundModel,
    kind: Kind = "gs",
    budget: int = 10_000,
    caps: tuple[int, int] = (4, 3),
    seed: int = 0,
    directions: np.ndarray | None = None,
) -> list[BoundPoint]:
    """Nondominated inner-bound points found within ``budget`` evaluations."""
    _validate(budget, caps)
    directions = default_directions() if directions is None else np.asarray(directions, float)
    ev = ChannelEvaluator(m)
    front = ParetoSet()

    def evaluate(q, r):
        terms = ev.inner_terms(q, r)
        return BoundPoint(inner_triple(terms, kind), terms, _channels(q, r))

    _run(((m.n_xt, caps[0]), (caps[0], caps[1])), evaluate, [front.add], directions, budget, seed)
    return front.points


@dataclass(frozen=True)
class OuterTable:
    """Support values of the per-state outer regions.

    ``per_pair[k, l, d]`` is the best ``w_d . (r_s, -r_j, -r_l)`` found for
    state pair ``(k, l)``; ``support[d]`` is its minimum over all pairs.
    """

    directions: np.ndarray
    per_pair: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return self.per_pair.min(axis=(0, 1))

    def slack(self, t) -> np.ndarray:
        """Per-direction ``support - w . t``; negative entries mean ``t`` lies outside."""
        return self.support - self.directions @ _signed(t)

    def contains(self, t, tol: float = DOMINANCE_TOL) -> bool:
        return bool(np.all(self.slack(t) >= -tol))


def outer_intersection(
    m: DiscreteCompoundModel,
    kind: Kind = "gs",
    budget: int = 10_000,
    caps: tuple[int, int] = (4, 3),
    seed: int = 0,
    directions: np.ndarray | None = None,
    warm_start: Sequence[TestChannelPair] = (),
) -> OuterTable:
    """Scalarized supports of every per-state outer region.

    Each state pair gets its own ``budget`` evaluations.  Supports are search
    estimates (lower bounds on the true support); ``warm_start`` channels are
    evaluated first and can only raise them.
    """
    _validate(budget, caps)
    directions = default_directions() if directions is None else np.asarray(directions, float)
    ev = ChannelEvaluator(m)
    per_pair = np.full((m.K, m.L, len(directions)), -np.inf)
    seeds = np.random.SeedSequence(seed).spawn(m.K * m.L)
    for (k, l), ss in zip(itertools.product(range(m.K), range(m.L)), seeds):
        best = per_pair[k, l]

        def evaluate(q, r, k=k, l=l):
            terms = ev.outer_terms(q, r, k, l)
            return BoundPoint(outer_triple(terms, kind), terms)

        def track(p, best=best):
            np.maximum(best, directions @ _signed(p.triple), out=best)

        _run(((m.n_xt, caps[0]), (caps[0], caps[1])), evaluate, [track], directions, budget,
             int(ss.generate_state(1)[0]), warm_start)
    return OuterTable(directions, per_pair)


@dataclass(frozen=True)
class GapReport:
    directions: np.ndarray
    inner: np.ndarray
    outer: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return self.outer - self.inner

    @property
    def gap(self) -> float:
        return float(self.gaps.max())


def corollary1_gap(
    m: DiscreteCompoundModel,
    budget: int = 50_000,
    caps: tuple[int, int] = (4, 3),
    seed: int = 0,
    kind: Kind = "gs",
    directions: np.ndarray | None = None,
) -> GapReport:
    """Largest outer-minus-inner support difference for a single-state model.

    With one decoder and one eavesdropper state both bounds are the same
    region, so the gap only measures how far the two independent searches
    are from each other.
    """
    if m.K != 1 or m.L != 1:
        raise ValueError(f"gap check needs a single-state model, got K={m.K}, L={m.L}")
    directions = default_directions() if directions is None else np.asarray(directions, float)
    front = ParetoSet()
    for p in search_inner_region(m, kind, budget, caps, seed, directions):
        front.add(p)
    outer = outer_intersection(m, kind, budget, caps, seed + 1, directions)
    return GapReport(directions, front.support(directions), outer.support)
