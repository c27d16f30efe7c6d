"""Frontier solver: self-consistent encoder updates per beta, annealed
across a beta grid.

The update at a fixed beta alternates three assignments until the objective
F = I(M;W) - beta * I(W;U) stops moving:

    q(w)    <- sum_m p(m) q(w|m)
    m_hat_w <- Bayesian listener reconstruction
    q(w|m)  <- q(w) * exp(-beta * KL_nats[m || m_hat_w]),  rows renormalized

Each full pass is non-increasing in F, so the last iterate is the best one;
a snapshot guard covers float-level wobble. Words whose marginal mass falls
below the prune threshold are dropped mid-iteration (they never come back),
and after convergence words with near-identical reconstructions are merged
and the loop re-entered, so every recorded point is a fixed point of the
plain update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    IBNamingError,
    MeaningSpace,
    NamingSystem,
    ValidationError,
    _freeze,
)
from .measures import LOG_ZERO, _complexity_arrays

# Words count toward the effective category number when their marginal mass
# strictly exceeds this.
DEFAULT_CATEGORY_MASS_THRESHOLD = 1e-5
# Reconstruction rows closer than this in max-norm describe the same category.
DUPLICATE_ROW_TOL = 1e-8
_MAX_MERGE_ROUNDS = 32
# Alternating-direction refinement passes over the grid after the primary
# sweep; passes stop early once no point improves.
_MAX_REFINE_PASSES = 6


class CategorySelectionError(IBNamingError):
    """No frontier point with the requested number of effective categories."""


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for one frontier computation.

    The grid must be strictly increasing; the sweep direction decides the
    traversal order. ``max_clusters`` caps the width of the initial encoder
    only (annealing can only lose clusters after that). ``restarts`` adds
    perturbed warm starts per beta, each drawn from an independent stream
    keyed by (grid index, restart index) so results do not depend on
    evaluation order. Iteration stops once the objective moves by less than
    half of ``convergence_tol`` between passes, which keeps one further
    update within the tolerance.
    """

    beta_grid: tuple[float, ...]
    max_clusters: int | None = None
    convergence_tol: float = 1e-10
    max_iterations: int = 30_000
    mass_prune_threshold: float = 1e-5
    restarts: int = 0
    seed: int = 0
    anneal_direction: str = "high-to-low"

    def __post_init__(self):
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        errors = []
        if not self.beta_grid:
            errors.append("beta_grid is empty")
        elif self.beta_grid[0] < 0:
            errors.append(f"beta_grid values must be >= 0, got {self.beta_grid[0]}")
        if any(b2 <= b1 for b1, b2 in zip(self.beta_grid, self.beta_grid[1:])):
            errors.append("beta_grid must be strictly increasing")
        if self.convergence_tol <= 0:
            errors.append(f"convergence_tol must be > 0, got {self.convergence_tol}")
        if self.max_iterations < 1:
            errors.append(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.mass_prune_threshold < 0:
            errors.append("mass_prune_threshold must be >= 0")
        if self.restarts < 0:
            errors.append("restarts must be >= 0")
        if self.max_clusters is not None and self.max_clusters < 1:
            errors.append(f"max_clusters must be >= 1, got {self.max_clusters}")
        if self.anneal_direction not in ("high-to-low", "low-to-high"):
            errors.append(f"unknown anneal_direction {self.anneal_direction!r}")
        if errors:
            raise ValidationError(errors)

    def to_dict(self) -> dict:
        return {
            "beta_grid": list(self.beta_grid),
            "max_clusters": self.max_clusters,
            "convergence_tol": self.convergence_tol,
            "max_iterations": self.max_iterations,
            "mass_prune_threshold": self.mass_prune_threshold,
            "restarts": self.restarts,
            "seed": self.seed,
            "anneal_direction": self.anneal_direction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        return cls(
            beta_grid=tuple(d["beta_grid"]),
            max_clusters=d.get("max_clusters"),
            convergence_tol=d.get("convergence_tol", 1e-10),
            max_iterations=d.get("max_iterations", 30_000),
            mass_prune_threshold=d.get("mass_prune_threshold", 1e-5),
            restarts=d.get("restarts", 0),
            seed=d.get("seed", 0),
            anneal_direction=d.get("anneal_direction", "high-to-low"),
        )


def default_beta_grid(beta_max: float, num_betas: int, spacing: str = "log",
                      beta_min: float = 0.1) -> tuple[float, ...]:
    """Beta 0 plus (num_betas - 1) log-spaced values from beta_min to beta_max.

    Linear spacing runs straight from 0 to beta_max instead.
    """
    if num_betas < 1:
        raise ValidationError([f"num_betas must be >= 1, got {num_betas}"])
    if beta_max <= 0:
        raise ValidationError([f"beta_max must be > 0, got {beta_max}"])
    if num_betas == 1:
        return (float(beta_max),)
    if spacing == "linear":
        return tuple(float(b) for b in np.linspace(0.0, beta_max, num_betas))
    if spacing != "log":
        raise ValidationError([f"unknown spacing {spacing!r} (expected 'log' or 'linear')"])
    if beta_max <= beta_min:
        raise ValidationError([f"beta_max must exceed {beta_min} for log spacing"])
    tail = np.geomspace(beta_min, beta_max, num_betas - 1)
    return (0.0,) + tuple(float(b) for b in tail)


@dataclass(frozen=True)
class FrontierPoint:
    """One solved tradeoff: the optimal encoder at a single beta."""

    beta: float
    complexity_bits: float
    accuracy_bits: float
    objective_bits: float
    effective_k: int
    encoder: NamingSystem | None
    word_mass: np.ndarray | None
    converged: bool
    iterations: int

    def __post_init__(self):
        if self.word_mass is not None:
            object.__setattr__(self, "word_mass", _freeze(self.word_mass))


@dataclass(frozen=True)
class Frontier:
    """Frontier points sorted by beta, bound to one meaning space."""

    points: tuple[FrontierPoint, ...]
    space_fingerprint: str
    config: SolverConfig

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def betas(self) -> np.ndarray:
        return np.array([p.beta for p in self.points])

    def validate(self, slack: float = 1e-6) -> list[str]:
        """Monotonicity in beta and concavity of accuracy vs. complexity."""
        errors: list[str] = []
        b = self.betas
        if np.any(np.diff(b) <= 0):
            errors.append("points are not sorted by strictly increasing beta")
        c = np.array([p.complexity_bits for p in self.points])
        a = np.array([p.accuracy_bits for p in self.points])
        for i in np.nonzero(np.diff(c) < -slack)[0]:
            errors.append(
                f"complexity decreases from beta={b[i]:.6g} to beta={b[i + 1]:.6g} "
                f"({c[i]:.9g} -> {c[i + 1]:.9g})"
            )
        for i in np.nonzero(np.diff(a) < -slack)[0]:
            errors.append(
                f"accuracy decreases from beta={b[i]:.6g} to beta={b[i + 1]:.6g} "
                f"({a[i]:.9g} -> {a[i + 1]:.9g})"
            )
        for i in range(1, len(self.points) - 1):
            span = c[i + 1] - c[i - 1]
            if span <= 1e-12:
                continue
            chord = a[i - 1] + (a[i + 1] - a[i - 1]) * (c[i] - c[i - 1]) / span
            if a[i] < chord - slack:
                errors.append(
                    f"accuracy dips below the chord at beta={b[i]:.6g} "
                    f"({a[i]:.9g} < {chord:.9g})"
                )
        return errors


# ---------------------------------------------------------------------------
# array-level machinery


def _row_normalize(q: np.ndarray) -> np.ndarray:
    sums = q.sum(axis=1, keepdims=True)
    dead = sums[:, 0] <= 0
    if np.any(dead):
        q = q.copy()
        q[dead] = 1.0 / q.shape[1]
        sums = q.sum(axis=1, keepdims=True)
    return q / sums


def _log2_zeros(a: np.ndarray) -> np.ndarray:
    out = np.full(a.shape, LOG_ZERO)
    np.log2(a, out=out, where=a > 0)
    return out


def _accuracy_fast(qw: np.ndarray, mhat: np.ndarray, m0_log2: np.ndarray) -> float:
    lh = _log2_zeros(mhat)
    per_word = np.sum(mhat * lh, axis=1) - mhat @ m0_log2
    return float(qw @ per_word)


def _distortion_nats_fast(reps: np.ndarray, self_nats: np.ndarray,
                          mhat: np.ndarray) -> np.ndarray:
    lh = np.full(mhat.shape, LOG_ZERO)
    np.log(mhat, out=lh, where=mhat > 0)
    return self_nats[:, None] - reps @ lh.T


@dataclass
class _Workspace:
    """Per-space constants shared across every beta of a sweep."""

    p: np.ndarray
    reps: np.ndarray
    m0_log2: np.ndarray
    self_nats: np.ndarray

    @classmethod
    def for_space(cls, space: MeaningSpace) -> "_Workspace":
        p = space.require_need().mass
        reps = space.representations
        m0 = space.prior_representation
        lr = np.full(reps.shape, LOG_ZERO)
        np.log(reps, out=lr, where=reps > 0)
        return cls(p, reps, _log2_zeros(m0), np.sum(reps * lr, axis=1))


@dataclass
class _SolveState:
    q: np.ndarray
    labels: np.ndarray
    qw: np.ndarray
    mhat: np.ndarray
    complexity: float
    accuracy: float
    objective: float
    iterations: int
    converged: bool


def _evaluate(ws: _Workspace, q: np.ndarray, beta: float):
    """One stats pass: marginal, listener, complexity, accuracy, objective."""
    qw = ws.p @ q
    post = np.divide(ws.p[:, None] * q, qw[None, :],
                     out=np.zeros_like(q), where=qw[None, :] > 0).T
    mhat = post @ ws.reps
    c = _complexity_arrays(ws.p, q, qw)
    a = _accuracy_fast(qw, mhat, ws.m0_log2)
    return qw, mhat, c, a, c - beta * a


def _fixed_point_loop(ws: _Workspace, q: np.ndarray, labels: np.ndarray, beta: float,
                      tol: float, budget: int, prune: float) -> _SolveState:
    # stop at half the tolerance so one further update stays inside it
    stop = 0.5 * tol
    f_prev = np.inf
    best_f = np.inf
    best = None
    it = 0
    converged = False
    qw = mhat = None
    c = a = f = 0.0
    while it < budget:
        qw = ws.p @ q
        keep = (qw >= prune) if prune > 0 else (qw > 0)
        if not keep.all():
            if not keep.any():
                keep[int(np.argmax(qw))] = True
            q = _row_normalize(q[:, keep])
            labels = labels[keep]
            qw = ws.p @ q
        post = (ws.p[:, None] * q / qw[None, :]).T
        mhat = post @ ws.reps
        c = _complexity_arrays(ws.p, q, qw)
        a = _accuracy_fast(qw, mhat, ws.m0_log2)
        f = c - beta * a
        it += 1
        if f < best_f - 1e-12:
            best_f = f
            best = (q, labels)
        if abs(f - f_prev) < stop:
            converged = True
            break
        f_prev = f
        d = _distortion_nats_fast(ws.reps, ws.self_nats, mhat)
        logits = np.log(qw)[None, :] - beta * d
        logits -= logits.max(axis=1, keepdims=True)
        q = np.exp(logits)
        q /= q.sum(axis=1, keepdims=True)
    if best is not None and best_f < f - 1e-12:
        # float wobble put a later iterate above an earlier one; keep the best
        q, labels = best
        qw, mhat, c, a, f = _evaluate(ws, q, beta)
    return _SolveState(q, labels, qw, mhat, c, a, f, it, converged)


def _merge_duplicate_words(state: _SolveState):
    """Union words whose reconstructions agree within DUPLICATE_ROW_TOL."""
    k = state.q.shape[1]
    if k <= 1:
        return None
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    mhat = state.mhat
    for i in range(k - 1):
        close = np.nonzero(np.max(np.abs(mhat[i + 1:] - mhat[i]), axis=1) < DUPLICATE_ROW_TOL)[0]
        for off in close:
            ri, rj = find(i), find(int(off) + i + 1)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    roots = [find(i) for i in range(k)]
    if len(set(roots)) == k:
        return None
    groups: dict[int, list[int]] = {}
    for i, r in enumerate(roots):
        groups.setdefault(r, []).append(i)
    order = sorted(groups)  # keep original column order via lowest member index
    cols = []
    labels = []
    for r in order:
        members = groups[r]
        cols.append(state.q[:, members].sum(axis=1))
        rep = members[int(np.argmax(state.qw[members]))]
        labels.append(state.labels[rep])
    return np.stack(cols, axis=1), np.asarray(labels)


def _solve_arrays(ws: _Workspace, q0: np.ndarray, labels0: np.ndarray, beta: float,
                  config: SolverConfig) -> _SolveState:
    _, _, _, _, f_init = _evaluate(ws, q0, beta)
    prune = config.mass_prune_threshold
    tol = config.convergence_tol

    def run(prune_thr: float) -> _SolveState:
        state = _fixed_point_loop(ws, q0.copy(), labels0.copy(), beta, tol,
                                  config.max_iterations, prune_thr)
        total = state.iterations
        for _ in range(_MAX_MERGE_ROUNDS):
            merged = _merge_duplicate_words(state)
            if merged is None:
                break
            budget = max(1, config.max_iterations - total)
            state = _fixed_point_loop(ws, merged[0], merged[1], beta, tol, budget, prune_thr)
            total += state.iterations
        state.iterations = total
        return state

    state = run(prune)
    if prune > 0 and state.objective > f_init + 1e-9:
        # pruning lifted the objective past the warm start; retry unpruned
        alt = run(0.0)
        if alt.objective < state.objective:
            state = alt
    return state


def _make_point(state: _SolveState, beta: float, word_names: tuple[str, ...],
                meaning_labels: tuple[str, ...]) -> FrontierPoint:
    labels = tuple(word_names[i] for i in state.labels)
    encoder = NamingSystem(state.q, labels, meaning_labels)
    return FrontierPoint(
        beta=float(beta),
        complexity_bits=state.complexity,
        accuracy_bits=state.accuracy,
        objective_bits=state.objective,
        effective_k=int(np.sum(state.qw > DEFAULT_CATEGORY_MASS_THRESHOLD)),
        encoder=encoder,
        word_mass=state.qw,
        converged=state.converged,
        iterations=state.iterations,
    )


def solve_at_beta(space: MeaningSpace, beta: float, init: NamingSystem,
                  config: SolverConfig | None = None) -> FrontierPoint:
    """Solve the tradeoff at one beta from a caller-supplied initial encoder.

    The objective of the result never exceeds the objective of ``init``;
    non-convergence within the iteration budget is reported through the
    ``converged`` flag, not an exception.
    """
    if beta < 0:
        raise ValidationError([f"beta must be >= 0, got {beta}"])
    if init.meaning_labels != space.meaning_labels:
        raise ValidationError(["init encoder meaning labels do not match the space"])
    if config is None:
        config = SolverConfig(beta_grid=(float(beta),) if beta > 0 else (0.0,))
    ws = _Workspace.for_space(space)
    state = _solve_arrays(ws, init.encoder.copy(), np.arange(init.num_words), beta, config)
    return _make_point(state, beta, init.word_labels, space.meaning_labels)


def _identity_encoder(n_meanings: int, k: int) -> np.ndarray:
    q = np.zeros((n_meanings, k))
    q[np.arange(n_meanings), np.arange(n_meanings) % k] = 1.0
    return q


def _perturbed(q: np.ndarray, rng: np.random.Generator, sigma: float = 0.1) -> np.ndarray:
    return _row_normalize(q * np.exp(sigma * rng.standard_normal(q.shape)))


def _stream(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def anneal_frontier(space: MeaningSpace, config: SolverConfig) -> Frontier:
    """Sweep the beta grid, warm-starting each beta from its neighbor.

    The default high-to-low sweep starts from the identity encoder at the
    largest beta, where the optimum is near-deterministic, and tracks the
    solution branch downward as clusters merge away. Each beta additionally
    tries ``config.restarts`` perturbed warm starts and keeps the lowest
    objective (ties broken by restart index).

    Near cluster-merge transitions a single sweep shows hysteresis: it
    crosses the transition late and records metastable points. Refinement
    passes in alternating directions re-solve every point from its refined
    neighbor and keep strictly better objectives, so the recorded frontier
    is the lower envelope of the branches the sweep visited.
    """
    ws = _Workspace.for_space(space)
    n_m = space.num_meanings
    grid = config.beta_grid
    k0 = n_m if config.max_clusters is None else min(config.max_clusters, n_m)
    word_names = tuple(f"w{i:03d}" for i in range(k0))

    high_to_low = config.anneal_direction == "high-to-low"
    if high_to_low:
        q = _identity_encoder(n_m, k0)
        order = range(len(grid) - 1, -1, -1)
    else:
        q = _perturbed(np.full((n_m, k0), 1.0 / k0), _stream(config.seed, (0,)))
        order = range(len(grid))
    labels = np.arange(k0)

    states: list[_SolveState | None] = [None] * len(grid)
    for gi in order:
        beta = grid[gi]
        best: tuple[float, int, _SolveState] | None = None
        for r in range(config.restarts + 1):
            qc = q if r == 0 else _perturbed(q, _stream(config.seed, (1, gi, r)))
            state = _solve_arrays(ws, qc.copy(), labels.copy(), beta, config)
            cand = (state.objective, r, state)
            if best is None or cand[:2] < best[:2]:
                best = cand
        state = best[2]
        q, labels = state.q, state.labels
        states[gi] = state

    ascending = high_to_low  # first refinement pass runs against the sweep
    for _ in range(_MAX_REFINE_PASSES):
        improved = False
        indices = range(1, len(grid)) if ascending else range(len(grid) - 2, -1, -1)
        for gi in indices:
            src = states[gi - 1 if ascending else gi + 1]
            cand = _solve_arrays(ws, src.q.copy(), src.labels.copy(), grid[gi], config)
            if cand.objective < states[gi].objective - 1e-15:
                states[gi] = cand
                improved = True
        if not improved:
            break
        ascending = not ascending

    points = tuple(
        _make_point(states[gi], grid[gi], word_names, space.meaning_labels)
        for gi in range(len(grid))
    )
    return Frontier(points, space.fingerprint, config)


def fixed_point_delta(space: MeaningSpace, point: FrontierPoint) -> float:
    """|change in F_beta| after one extra plain update of a recorded point."""
    if point.encoder is None:
        raise ValidationError(["frontier point carries no encoder"])
    ws = _Workspace.for_space(space)
    q = point.encoder.encoder
    qw = ws.p @ q
    alive = qw > 0
    if not alive.all():
        q = _row_normalize(q[:, alive])
        qw = ws.p @ q
    qw, mhat, c, a, f0 = _evaluate(ws, q, point.beta)
    d = _distortion_nats_fast(ws.reps, ws.self_nats, mhat)
    logits = np.log(qw)[None, :] - point.beta * d
    logits -= logits.max(axis=1, keepdims=True)
    q1 = np.exp(logits)
    q1 /= q1.sum(axis=1, keepdims=True)
    _, _, _, _, f1 = _evaluate(ws, q1, point.beta)
    return abs(f1 - f0)


def effective_category_count(point: FrontierPoint,
                             threshold: float = DEFAULT_CATEGORY_MASS_THRESHOLD) -> int:
    """Number of words whose marginal mass strictly exceeds the threshold."""
    if point.word_mass is None:
        raise ValidationError(
            ["frontier point has no word-mass data; load the frontier with its meaning space"]
        )
    return int(np.sum(point.word_mass > threshold))


def select_most_informative_with_k(frontier: Frontier, k: int,
                                   threshold: float = DEFAULT_CATEGORY_MASS_THRESHOLD
                                   ) -> FrontierPoint:
    """Highest-accuracy frontier point with exactly k effective categories."""
    if not frontier.points:
        raise ValidationError(["frontier has no points"])
    best: FrontierPoint | None = None
    seen: set[int] = set()
    for point in frontier.points:  # ascending beta; ties keep the smaller beta
        count = effective_category_count(point, threshold)
        seen.add(count)
        if count == k and (best is None or point.accuracy_bits > best.accuracy_bits):
            best = point
    if best is None:
        raise CategorySelectionError(
            f"no frontier point with {k} effective categories "
            f"(available: {sorted(seen)})"
        )
    return best
