"""Learners that consume contrastive example pairs.

Each learner is a scikit-learn style estimator: active ones are fitted on an
oracle (``fit(oracle)``), passive ones on a labeled sample with contrastive
points (``fit(X, y, X_contrast)`` or ``fit_pairs(pairs)``). After fitting,
``hypothesis_`` is the learned concept, ``n_interactions_`` the number of
oracle interactions used and ``snapshots_[m]`` the hypothesis held after
``m`` interactions (``None`` when there is none yet).

The module-level functions wrap the estimators and return a
:class:`LearnerOutput`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_consistent_length, check_is_fitted, column_or_1d

from . import geometry as geo
from .geometry import DegenerateDirection, Threshold
from .noise import INFINITY, NoiseFunction, ScaledNoise, ZeroNoise, stop_count
from .oracles import ExamplePair

MACHINE_EPS = float(np.finfo(float).eps)


@dataclass
class VersionInterval:
    lo: float = 0.0
    hi: float = 1.0

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def intersect(self, lo: float, hi: float) -> None:
        """Narrow to ``[lo, hi]``; never widens."""
        self.lo = max(self.lo, lo)
        self.hi = min(self.hi, hi)
        if self.lo > self.hi:
            # only reachable with an invalid oracle; collapse rather than invert
            self.hi = self.lo


@dataclass
class LearnerOutput:
    hypothesis: object
    interactions: int
    trace: Optional[list] = None


class _BudgetReached(Exception):
    pass


class _Learner(BaseEstimator, ClassifierMixin):
    """Shared bookkeeping: budgets, snapshots, predict."""

    def _start(self, initial=None):
        self.classes_ = np.array([0, 1])
        self.snapshots_ = [initial]
        self.trace_ = []
        self.n_interactions_ = 0
        self._current = initial
        self._limit = getattr(self, "budget", None)

    def _query(self, oracle, x) -> ExamplePair:
        if self._limit is not None and self.n_interactions_ >= self._limit:
            raise _BudgetReached
        cap = getattr(self, "max_queries", None)
        if cap is not None and self.n_interactions_ >= cap:
            raise RuntimeError(
                f"{type(self).__name__} hit max_queries={cap} without finishing; "
                "the noise function does not contract the search fast enough"
            )
        pair = oracle.query(x)
        self.n_interactions_ += 1
        self.snapshots_.append(self._current)
        return pair

    def _hold(self, hypothesis) -> None:
        """Update the current hypothesis (and the snapshot of the latest interaction)."""
        self._current = hypothesis
        self.snapshots_[-1] = hypothesis

    def _finish(self, hypothesis) -> None:
        self.hypothesis_ = hypothesis
        self.output_ = LearnerOutput(hypothesis, self.n_interactions_, list(self.trace_))

    def predict(self, X):
        check_is_fitted(self, "hypothesis_")
        if self.hypothesis_ is None:
            raise RuntimeError("no hypothesis was formed within the budget")
        X = np.asarray(X, dtype=float)
        if isinstance(self.hypothesis_, Threshold):
            X = check_array(X.reshape(-1, 1))
            return self.hypothesis_.predict(X[:, 0])
        return self.hypothesis_.predict(check_array(np.atleast_2d(X)))


class _ActiveLearner(_Learner):
    def fit(self, oracle, y=None):
        start = oracle.n_queries
        self._start(self._initial())
        try:
            h = self._run(oracle)
        except _BudgetReached:
            h = self._current
        self._finish(h)
        assert oracle.n_queries - start == self.n_interactions_
        return self

    def _initial(self):
        return None


# ---------------------------------------------------------------------------
# active, deterministic oracles


class ThresholdBisection(_ActiveLearner):
    """Midpoint queries; each contrastive point shrinks the version interval to
    the thresholds that could have produced it."""

    def __init__(self, noise: NoiseFunction = None, epsilon: float = 0.01, budget=None, max_queries: int = 10_000):
        self.noise = noise
        self.epsilon = epsilon
        self.budget = budget
        self.max_queries = max_queries

    def _initial(self):
        return Threshold(0.5)

    def _run(self, oracle):
        f = self.noise if self.noise is not None else ZeroNoise()
        iv = VersionInterval()
        self.trace_.append((0, (iv.lo, iv.hi)))
        while iv.width > 2.0 * self.epsilon:
            x = iv.mid
            p = self._query(oracle, [x])
            xp = float(p.xp[0])
            if xp > x:
                iv.intersect(xp - f.contraction_step(xp - x), xp)
            elif xp < x:
                iv.intersect(xp, xp + f.contraction_step(x - xp))
            else:
                iv.intersect(x, x)
            self._hold(Threshold(iv.mid))
            self.trace_.append((self.n_interactions_, (iv.lo, iv.hi)))
        self.interval_ = iv
        return Threshold(iv.mid)


class HomogeneousOneShot(_ActiveLearner):
    """One query at ``r e_0`` with ``r = min((pi eps delta)^(1/c), 1/2)``; the
    contrastive direction gives the normal."""

    def __init__(self, epsilon: float = 0.05, delta: float = 1.0, c: float = 1.0):
        self.epsilon = epsilon
        self.delta = delta
        self.c = c

    def query_radius(self) -> float:
        return min((math.pi * self.epsilon * self.delta) ** (1.0 / self.c), 0.5)

    def _run(self, oracle):
        k = oracle.dim
        if k < 2:
            raise ValueError("homogeneous learning needs k >= 2")
        r = self.query_radius()
        for axis in (0, 1):
            x = np.zeros(k)
            x[axis] = r
            p = self._query(oracle, x)
            try:
                h = geo.induced_homogeneous(p.x, p.xp, p.lx)
            except DegenerateDirection:
                continue
            self._hold(h)
            self.trace_.append((self.n_interactions_, h))
            return h
        raise RuntimeError("contrastive direction degenerate on both query axes")


class HalfspaceChain(_ActiveLearner):
    """Query 0, then repeatedly the previous contrastive point; the last pair
    defines the boundary."""

    def __init__(self, noise: NoiseFunction = None, epsilon: float = 0.1, c: float = 1.0, budget=None):
        self.noise = noise
        self.epsilon = epsilon
        self.c = c
        self.budget = budget

    def n_steps(self, k: int):
        f = self.noise if self.noise is not None else ZeroNoise()
        target = (self.epsilon / 2**k) ** (1.0 / self.c)
        return max(1, stop_count(f, 0.5, target))

    def _run(self, oracle):
        k = oracle.dim
        m = self.n_steps(k)
        if m == INFINITY:
            raise ValueError("the chain does not reach the target distance (STOP is infinite)")
        x = np.zeros(k)
        h = None
        for _ in range(m):
            p = self._query(oracle, x)
            h = geo.induced_halfspace(p.x, p.xp, p.lx)
            self._hold(h)
            self.trace_.append((self.n_interactions_, p.x.copy()))
            x = p.xp
        return h


# ---------------------------------------------------------------------------
# passive


class _PassiveLearner(_Learner):
    def fit(self, X, y, X_contrast, y_contrast=None):
        X = np.asarray(X, dtype=float)
        Xc = np.asarray(X_contrast, dtype=float)
        if X.ndim == 1:
            X, Xc = X.reshape(-1, 1), Xc.reshape(-1, 1)
        X = check_array(X)
        Xc = check_array(Xc)
        y = column_or_1d(y).astype(int)
        check_consistent_length(X, y, Xc)
        if y_contrast is None:
            y_contrast = 1 - y
        pairs = [ExamplePair(a, la, b, lb) for a, la, b, lb in zip(X, y, Xc, np.asarray(y_contrast).astype(int))]
        return self.fit_pairs(pairs)

    def fit_pairs(self, pairs):
        pairs = list(pairs)
        if not pairs:
            raise ValueError("empty sample")
        self._start(None)
        self.n_interactions_ = len(pairs)
        h = self._learn(pairs)
        self.snapshots_ = [None] * len(pairs) + [h]
        self._finish(h)
        return self


class PassiveThreshold(_PassiveLearner):
    """Largest positive primary; use its contrastive point when ``f(eps) <= eps``."""

    def __init__(self, noise: NoiseFunction = None, epsilon: float = 0.01):
        self.noise = noise
        self.epsilon = epsilon

    def _learn(self, pairs):
        f = self.noise if self.noise is not None else ZeroNoise()
        use_contrast = float(f(self.epsilon)) <= self.epsilon
        pos = [i for i, p in enumerate(pairs) if p.lx == 1]
        if pos:
            i = max(pos, key=lambda j: float(pairs[j].x[0]))
        else:
            # mirror: smallest negative primary
            i = min(range(len(pairs)), key=lambda j: float(pairs[j].x[0]))
        p = pairs[i]
        self.trace_.append((len(pairs), i))
        v = float(p.xp[0]) if use_contrast else float(p.x[0])
        return Threshold(min(1.0, max(0.0, v)))


class PassiveHomogeneous(_PassiveLearner):
    """The pair with the shortest primary-to-contrastive distance defines the normal."""

    def __init__(self):
        pass

    def _learn(self, pairs):
        d = np.array([np.linalg.norm(p.xp - p.x) for p in pairs])
        for i in np.argsort(d, kind="stable"):
            try:
                h = geo.induced_homogeneous(pairs[i].x, pairs[i].xp, pairs[i].lx)
            except DegenerateDirection:
                continue
            self.trace_.append((len(pairs), int(i)))
            return h
        raise ValueError("every pair in the sample is degenerate")


# ---------------------------------------------------------------------------
# active, probabilistic oracles


class ProbThresholdExpected(_ActiveLearner):
    """Sub-phases of a midpoint query and a far-endpoint query; the interval is
    read off the labels of everything seen."""

    def __init__(self, n_subphases=None, budget=None):
        self.n_subphases = n_subphases
        self.budget = budget

    def _initial(self):
        return Threshold(0.5)

    def _see(self, iv: VersionInterval, v: float, lab: int):
        if lab == 1:
            iv.intersect(v, iv.hi)
        else:
            iv.intersect(iv.lo, v)

    def _observe(self, oracle, iv: VersionInterval, x: float) -> ExamplePair:
        p = self._query(oracle, [x])
        self._see(iv, float(p.x[0]), p.lx)
        self._see(iv, float(p.xp[0]), p.lxp)
        self._hold(Threshold(iv.mid))
        return p

    def _run(self, oracle):
        if self.n_subphases is None and self.budget is None:
            raise ValueError("set n_subphases or budget")
        iv = VersionInterval()
        self.trace_.append((0, (iv.lo, iv.hi)))
        t = 0
        while (self.n_subphases is None or t < self.n_subphases) and iv.width > MACHINE_EPS:
            a, b = iv.lo, iv.hi
            p = self._observe(oracle, iv, iv.mid)
            # the far end on the midpoint's own label side
            self._observe(oracle, iv, b if p.lx == 1 else a)
            t += 1
            self.trace_.append((self.n_interactions_, (iv.lo, iv.hi)))
        self.interval_ = iv
        return Threshold(iv.mid)


class ProbThresholdVerified(_ActiveLearner):
    """Query both interval ends until their contrastive points are within
    ``4 f(b - a)`` of each other, then shrink to the span between them.

    ``slack`` is added to that acceptance limit; by default twice the oracle's
    offset ``eta``, since responses on an open side sit at least ``eta`` away
    from the threshold. The interval stays sound either way.
    """

    def __init__(self, noise: NoiseFunction = None, epsilon: float = 1e-4, budget=None, max_queries: int = 1_000_000, slack=None):
        self.noise = noise
        self.epsilon = epsilon
        self.budget = budget
        self.max_queries = max_queries
        self.slack = slack

    def _initial(self):
        return Threshold(0.5)

    def _run(self, oracle):
        f = self.noise if self.noise is not None else ZeroNoise()
        slack = 2.0 * getattr(oracle, "eta", 0.0) if self.slack is None else float(self.slack)
        iv = VersionInterval()
        self.trace_.append((0, (iv.lo, iv.hi)))
        while iv.width > 2.0 * self.epsilon:
            a, b = iv.lo, iv.hi
            limit = 4.0 * float(f(b - a)) + slack
            while True:
                pa = self._query(oracle, [a])
                if pa.lx == 0:
                    raise RuntimeError(f"left end {a} labeled 0; the oracle is inconsistent")
                pb = self._query(oracle, [b])
                if pb.lx == 1:
                    # theta sits exactly at the right end
                    iv.intersect(b, b)
                    break
                xa, xb = float(pa.xp[0]), float(pb.xp[0])
                if xa - xb <= limit:
                    iv.intersect(xb, xa)
                    break
            self._hold(Threshold(iv.mid))
            self.trace_.append((self.n_interactions_, (iv.lo, iv.hi)))
        self.interval_ = iv
        return Threshold(iv.mid)


def default_subphase_budget(f: NoiseFunction, epsilon: float, c: float, k: int):
    """``8 STOP(3 f(2 .), 1/2, (eps / 2^(k-1))^(1/c)) + 8``; INFINITY if STOP is."""
    n = stop_count(ScaledNoise(f, 3.0, 2.0), 0.5, (epsilon / 2 ** (k - 1)) ** (1.0 / c))
    return INFINITY if n == INFINITY else 8 * n + 8


class ProbHalfspaceSubphase(_ActiveLearner):
    """Walk toward the boundary with a step shortened so that, in expectation,
    it does not cross; each landing point's pair gives a candidate boundary.

    The learner cannot certify its error, so it runs to its interaction budget.
    """

    def __init__(self, noise: NoiseFunction = None, epsilon: float = 0.1, c: float = 1.0, budget=None):
        self.noise = noise
        self.epsilon = epsilon
        self.c = c
        self.budget = budget

    def _helper(self, oracle, x, step_noise):
        while True:
            p = self._query(oracle, x)
            d = float(np.linalg.norm(p.xp - p.x))
            if d == 0.0:
                z = p.x
            else:
                s = step_noise.plus_identity_inverse(d)
                z = p.x + (s / d) * (p.xp - p.x)
            q = self._query(oracle, z)
            if q.lx == p.lx:
                return q

    def _run(self, oracle):
        f = self.noise if self.noise is not None else ZeroNoise()
        k = oracle.dim
        if self.budget is None:
            b = default_subphase_budget(f, self.epsilon, self.c, k)
            if b == INFINITY:
                raise ValueError("default budget is infinite; pass an explicit budget")
            self._limit = b
        two_f = ScaledNoise(f, 2.0, 1.0)
        z = np.zeros(k)
        h = None
        while True:
            q = self._helper(oracle, z, two_f)
            if not np.array_equal(q.x, q.xp):
                h = geo.induced_halfspace(q.x, q.xp, q.lx)
                self._hold(h)
            self.trace_.append((self.n_interactions_, q.x.copy()))
            z = q.x


LEARNERS = {
    "active-thresh-det": ThresholdBisection,
    "hhs-one-shot": HomogeneousOneShot,
    "hs-chain": HalfspaceChain,
    "passive-thresh": PassiveThreshold,
    "passive-hhs": PassiveHomogeneous,
    "prob-thresh-exp": ProbThresholdExpected,
    "prob-thresh-verified": ProbThresholdVerified,
    "prob-hs-subphase": ProbHalfspaceSubphase,
}
PASSIVE = ("passive-thresh", "passive-hhs")


def build_learner(learner_id: str, **params):
    """Instantiate a learner by id, ignoring parameters it does not take."""
    try:
        cls = LEARNERS[learner_id]
    except KeyError:
        raise ValueError(f"unknown learner {learner_id!r}; choose from {sorted(LEARNERS)}") from None
    accepted = cls().get_params()
    return cls(**{k: v for k, v in params.items() if k in accepted})


# ---------------------------------------------------------------------------
# functional forms


def active_threshold_det(oracle, f, epsilon) -> LearnerOutput:
    return ThresholdBisection(f, epsilon).fit(oracle).output_


def active_homogeneous_one_shot(oracle, f, epsilon, delta, c) -> LearnerOutput:
    return HomogeneousOneShot(epsilon, delta, c).fit(oracle).output_


def active_halfspace_chain(oracle, f, epsilon, c, k=None) -> LearnerOutput:
    if k is not None and k != oracle.dim:
        raise ValueError(f"k={k} does not match the oracle dimension {oracle.dim}")
    return HalfspaceChain(f, epsilon, c).fit(oracle).output_


def passive_threshold(sample, f, epsilon) -> LearnerOutput:
    return PassiveThreshold(f, epsilon).fit_pairs(sample).output_


def passive_homogeneous(sample) -> LearnerOutput:
    return PassiveHomogeneous().fit_pairs(sample).output_


def prob_threshold_expected(oracle, n_subphases) -> LearnerOutput:
    return ProbThresholdExpected(n_subphases).fit(oracle).output_


def prob_threshold_verified(oracle, f, epsilon) -> LearnerOutput:
    return ProbThresholdVerified(f, epsilon).fit(oracle).output_


def prob_halfspace_subphase(oracle, f, epsilon, c, k=None, budget=None) -> LearnerOutput:
    if k is not None and k != oracle.dim:
        raise ValueError(f"k={k} does not match the oracle dimension {oracle.dim}")
    return ProbHalfspaceSubphase(f, epsilon, c, budget).fit(oracle).output_
