"""Two-step contrastive oracles.

An oracle answers a primary step (an active label query or a passive uniform
sample) and then a contrastive step governed by a mechanism:

* :class:`MinDistance` -- the nearest opposite-label (limit) point;
* :class:`DetAMDM` -- any opposite-label point within ``f(r)`` of it, chosen by
  a deterministic strategy (possibly an adaptive adversary);
* :class:`ProbAMDM` -- a draw from a distribution whose expected distance to it
  is at most ``f(r)``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import IO, Optional

import numpy as np

from . import geometry as geo
from .geometry import RADIUS, Concept, Halfspace, Threshold
from .noise import NoiseFunction, ZeroNoise, noise_from_dict

#: Offset used when the nearest opposite-label point is only a limit point.
ETA = 2.0**-40
AUDIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ExamplePair:
    x: np.ndarray
    lx: int
    xp: np.ndarray
    lxp: int

    def __post_init__(self):
        for name in ("x", "xp"):
            a = np.array(getattr(self, name), dtype=float).reshape(-1)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "lx", int(self.lx))
        object.__setattr__(self, "lxp", int(self.lxp))

    def __eq__(self, other):
        return (
            isinstance(other, ExamplePair)
            and self.lx == other.lx
            and self.lxp == other.lxp
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.xp, other.xp)
        )

    def to_json(self) -> str:
        return json.dumps({"x": self.x.tolist(), "lx": self.lx, "xp": self.xp.tolist(), "lxp": self.lxp})

    @classmethod
    def from_json(cls, line: str) -> "ExamplePair":
        d = json.loads(line)
        return cls(d["x"], d["lx"], d["xp"], d["lxp"])


# ---------------------------------------------------------------------------
# placement helpers


def _ray_reach(p: np.ndarray, u: np.ndarray) -> float:
    """Largest ``t >= 0`` with ``||p + t u|| <= RADIUS`` for unit ``u``."""
    pu = float(p @ u)
    disc = pu * pu - float(p @ p) + RADIUS**2
    if disc < 0:
        return 0.0
    return max(0.0, -pu + math.sqrt(disc))


@dataclass
class _Frame:
    """Where the ideal contrastive point is and which way the opposite label lies."""

    x_min: np.ndarray
    r: float
    direction: np.ndarray  # unit vector into the opposite-label region
    open_side: bool  # the opposite region excludes the boundary itself
    reach: float  # distance available along ``direction`` inside the domain


def frame_for(concept: Concept, x: np.ndarray, lx: int) -> _Frame:
    if isinstance(concept, Threshold):
        th = concept.theta
        s = 1.0 if lx == 1 else -1.0
        reach = (1.0 - th) if s > 0 else th
        return _Frame(np.array([th]), abs(float(x[0]) - th), np.array([s]), lx == 1, reach)
    xm = geo.nearest_opposite_point(x, concept)
    u = (-1.0 if lx == 1 else 1.0) * concept.omega
    return _Frame(xm, float(np.linalg.norm(x - xm)), u, lx == 1, _ray_reach(xm, u))


def place(fr: _Frame, dist: float, eta: float) -> np.ndarray:
    """The point ``dist`` from the ideal one on the opposite side, kept in the domain.

    On an open side the distance is at least ``eta``; in the ball it always is,
    since a projected point may round to either side of the boundary. If the
    normal ray leaves the ball immediately, an inward direction is used instead.
    """
    u, reach = fr.direction, fr.reach
    if fr.x_min.shape[0] == 1:
        if reach <= 0.0:
            return fr.x_min.copy()
        want = max(dist, eta) if fr.open_side else max(dist, 0.0)
        return fr.x_min + min(want, reach) * u
    want = max(dist, eta)
    if reach < eta:
        v = u - fr.x_min / RADIUS
        nv = float(np.linalg.norm(v))
        if nv > 0:
            u = v / nv
            reach = _ray_reach(fr.x_min, u)
    return fr.x_min + min(want, reach) * u


# ---------------------------------------------------------------------------
# strategies


class Strategy:
    """Chooses the contrastive point. Adaptive strategies decide the concept."""

    name = "abstract"
    adaptive = False
    kinds = ("threshold", "halfspace")

    def respond(self, oracle: "ContrastiveOracle", x: np.ndarray, lx: int):
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"name": self.name}


class FarthestValid(Strategy):
    """Distance exactly ``f(r)`` along the normal (clipped to the domain)."""

    name = "farthest"

    def respond(self, oracle, x, lx):
        fr = frame_for(oracle.concept, x, lx)
        return place(fr, float(oracle.noise(fr.r)), oracle.eta)


class NearestValid(Strategy):
    name = "nearest"

    def respond(self, oracle, x, lx):
        return place(frame_for(oracle.concept, x, lx), 0.0, oracle.eta)


class RandomInBall(Strategy):
    """Uniform over the allowed ball around the ideal point, restricted to the
    opposite-label part of the domain (rejection sampling with a fallback)."""

    name = "random"
    tries = 64

    def respond(self, oracle, x, lx):
        c = oracle.concept
        fr = frame_for(c, x, lx)
        budget = float(oracle.noise(fr.r))
        rng = oracle.rng
        if isinstance(c, Threshold) or budget <= 0.0:
            return place(fr, rng.uniform(0.0, budget), oracle.eta)
        k = c.dim
        for _ in range(self.tries):
            v = geo.sample_uniform_ball(k, rng) * (budget / RADIUS)
            along = float(v @ fr.direction)
            if along < 0:
                v = v - 2.0 * along * fr.direction
            cand = fr.x_min + v
            if geo.in_domain(c, cand) and geo.label(c, cand) != lx:
                return cand
        return place(fr, rng.uniform(0.0, budget), oracle.eta)


class ScaledUniform(Strategy):
    """Distance ``D ~ U[0, 2 f(r)]`` from the ideal point, so ``E[D] = f(r)``."""

    name = "scaled-uniform"

    def respond(self, oracle, x, lx):
        fr = frame_for(oracle.concept, x, lx)
        return place(fr, oracle.rng.uniform(0.0, 2.0 * float(oracle.noise(fr.r))), oracle.eta)


class PointMass(Strategy):
    """Always the ideal point pushed ``eta`` into the opposite region."""

    name = "point-mass"

    def respond(self, oracle, x, lx):
        fr = frame_for(oracle.concept, x, lx)
        fr.open_side = True
        return place(fr, oracle.eta, oracle.eta)


class TwoAtom(Strategy):
    """Thresholds only: the far end of the tracked version interval with
    probability ``min(g(r_vs / 4), 1)``, otherwise the ideal point.

    The endpoint probability is additionally capped at ``f(r) / |end - theta|``
    so each response distribution respects the expectation budget.
    """

    name = "two-atom"
    kinds = ("threshold",)

    def __init__(self):
        self.lo, self.hi = 0.0, 1.0

    def endpoint_probability(self, oracle, x: float, lx: int) -> tuple:
        th = oracle.concept.theta
        f = oracle.noise
        width = self.hi - self.lo
        q = width / 4.0
        p = min(float(f(q)) / q, 1.0) if q > 0 else 0.0
        end = self.hi if lx == 1 else self.lo
        gap = abs(end - th)
        if gap > 0:
            p = min(p, float(f(abs(x - th))) / gap)
        return p, end

    def draw(self, oracle, x, lx) -> np.ndarray:
        """One response from the current state, without updating it."""
        th = oracle.concept.theta
        p, end = self.endpoint_probability(oracle, float(x[0]), lx)
        end_ok = (end > th) if lx == 1 else (end <= th)
        if end_ok and oracle.rng.uniform() < p:
            return np.array([end])
        return place(frame_for(oracle.concept, x, lx), 0.0, oracle.eta)

    def respond(self, oracle, x, lx):
        xp = self.draw(oracle, x, lx)
        self._observe(float(x[0]), lx)
        self._observe(float(xp[0]), geo.label(oracle.concept, xp))
        return xp

    def _observe(self, v: float, lab: int):
        if lab == 1:
            self.lo = max(self.lo, v)
        else:
            self.hi = min(self.hi, v)

    def to_dict(self):
        return {"name": self.name}


class ThresholdVersionSpaceAdversary(Strategy):
    """Adaptive worst case for threshold learning under deterministic AMDM.

    Keeps the interval of thresholds still consistent with its answers. A query
    left of the midpoint is labeled 1 and answered with the right end; otherwise
    it is labeled 0 and answered with the left end. The interval then shrinks to
    the thresholds for which that answer is within budget.

    ``ties`` decides a query exactly at the midpoint: ``"right"`` answers with
    the right end, ``"left"`` with the left end. Both are worst cases; ``"left"``
    keeps the shrinking interval near 0, where doubles resolve widths far below
    the spacing of floats near 1.
    """

    name = "vs-adversary"
    adaptive = True
    kinds = ("threshold",)

    def __init__(self, lo: float = 0.0, hi: float = 1.0, ties: str = "right"):
        if ties not in ("left", "right"):
            raise ValueError("ties must be 'left' or 'right'")
        self.lo, self.hi = float(lo), float(hi)
        self.ties = ties
        self.committed: Optional[float] = None

    def answer(self, f: NoiseFunction, t: float):
        """Answer a 1D query ``t``; returns ``(label, contrastive, contrastive_label)``."""
        a, b = self.lo, self.hi
        mid = 0.5 * (a + b)
        if t < mid or (t == mid and self.ties == "right"):
            w = f.contraction_step(b - t)
            self.lo, self.hi = max(a, b - w), b
            return 1, b, (0 if w > 0 else 1)
        w = f.contraction_step(t - a)
        self.lo, self.hi = a, min(b, a + w)
        return 0, a, 1

    def commit(self, hypothesis_value: Optional[float] = None, eta: float = ETA) -> float:
        """Pick a consistent threshold, as far from the learner's guess as possible."""
        lo, hi = self.lo, self.hi
        # lo is always a consistent (closed) end; hi may be open
        theta = lo
        if hypothesis_value is not None and abs(hypothesis_value - lo) < abs(hypothesis_value - hi):
            theta = max(lo, hi - min(eta, 0.5 * (hi - lo)))
        self.committed = theta
        return theta

    def respond(self, oracle, x, lx):  # pragma: no cover - the oracle dispatches to answer()
        raise RuntimeError("adaptive strategy")

    def to_dict(self):
        return {"name": self.name, "lo": self.lo, "hi": self.hi, "ties": self.ties}


class ThresholdEmbeddingAdversary(ThresholdVersionSpaceAdversary):
    """The 1D adversary acting on coordinate 0 of the ball, with concepts
    ``1{x[0] <= p}`` for ``p`` in ``[-1/4, 1/4]``."""

    name = "embedding-adversary"
    kinds = ("halfspace",)

    def __init__(self, k: int = 2, ties: str = "right"):
        if k < 2:
            raise ValueError("embedding adversary needs k >= 2")
        super().__init__(-0.25, 0.25, ties)
        self.k = int(k)

    @staticmethod
    def concept_for(p: float, k: int) -> Halfspace:
        w = np.zeros(k)
        w[0] = -1.0
        return Halfspace(w, -p, False)

    def to_dict(self):
        return {"name": self.name, "k": self.k, "ties": self.ties}


class PassiveThresholdAdversary(Strategy):
    """Assigns one contrastive point to all negatives and one to all positives
    of a passive sample, leaving a wide set of consistent thresholds."""

    name = "passive-adversary"
    kinds = ("threshold",)
    batch = True

    def respond(self, oracle, x, lx):  # pragma: no cover - batch only
        raise RuntimeError("passive adversary only answers whole samples")


def adversary_passive_threshold(xs, labels, f: NoiseFunction) -> dict:
    """Contrastive assignment for a labeled threshold sample.

    With ``x+`` the largest positive and ``x-`` the smallest negative primary
    and ``r = (x- - x+) / 2``, negatives get ``(x- + x+ - f(r)) / 2`` and
    positives ``(x- + x+ + f(r)) / 2``. A missing class is replaced by the
    domain edge (0 for positives, 1 for negatives).

    Returns the two contrastive points, the nominal interval
    ``[max(x+, x~-), min(x-, x~+)]`` and ``consistent``: the sub-interval of
    thresholds for which every assigned point is within budget and correctly
    labeled (closed at the left, open at the right).
    """
    xs = np.asarray(xs, dtype=float).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    pos = xs[labels == 1]
    neg = xs[labels == 0]
    x_plus = float(pos.max()) if pos.size else 0.0
    x_minus = float(neg.min()) if neg.size else 1.0
    r = 0.5 * (x_minus - x_plus)
    fr = float(f(max(r, 0.0)))
    mid = 0.5 * (x_minus + x_plus)
    tilde_neg = mid - 0.5 * fr
    tilde_pos = mid + 0.5 * fr
    # theta >= x+ + u where u + f(u) = tilde_pos - x+   (budget of x+)
    lo = max(x_plus, tilde_neg, x_plus + f.plus_identity_inverse(tilde_pos - x_plus))
    # theta <= x- - v where v + f(v) = x- - tilde_neg   (budget of x-)
    hi = min(x_minus, tilde_pos, x_minus - f.plus_identity_inverse(x_minus - tilde_neg))
    return {
        "x_plus": x_plus,
        "x_minus": x_minus,
        "r": r,
        "tilde_neg": tilde_neg,
        "tilde_pos": tilde_pos,
        "nominal": (max(x_plus, tilde_neg), min(x_minus, tilde_pos)),
        "consistent": (lo, hi),
    }


_STRATEGIES = {
    cls.name: cls
    for cls in (
        FarthestValid,
        NearestValid,
        RandomInBall,
        ScaledUniform,
        PointMass,
        TwoAtom,
        ThresholdVersionSpaceAdversary,
        ThresholdEmbeddingAdversary,
        PassiveThresholdAdversary,
    )
}
DET_STRATEGIES = ("farthest", "nearest", "random", "vs-adversary", "embedding-adversary", "passive-adversary")
PROB_STRATEGIES = ("scaled-uniform", "two-atom", "point-mass")


def strategy_from_dict(d) -> Strategy:
    if isinstance(d, str):
        d = {"name": d}
    d = dict(d)
    name = d.pop("name")
    try:
        cls = _STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}") from None
    if cls is ThresholdEmbeddingAdversary:
        return cls(int(d.get("k", 2)), d.get("ties", "right"))
    if cls is ThresholdVersionSpaceAdversary:
        return cls(float(d.get("lo", 0.0)), float(d.get("hi", 1.0)), d.get("ties", "right"))
    return cls()


# ---------------------------------------------------------------------------
# mechanisms


@dataclass(frozen=True)
class MinDistance:
    name = "mdm"

    @property
    def noise(self) -> NoiseFunction:
        return ZeroNoise()

    def to_dict(self):
        return {"type": "mdm"}


@dataclass(frozen=True)
class DetAMDM:
    noise: NoiseFunction
    strategy: Strategy = field(default_factory=FarthestValid)
    name = "det"

    def __post_init__(self):
        if self.strategy.name not in DET_STRATEGIES:
            raise ValueError(f"{self.strategy.name!r} is not a deterministic strategy")

    def to_dict(self):
        return {"type": "det", "noise": self.noise.to_dict(), "strategy": self.strategy.to_dict()}


@dataclass(frozen=True)
class ProbAMDM:
    noise: NoiseFunction
    strategy: Strategy = field(default_factory=ScaledUniform)
    name = "prob"

    def __post_init__(self):
        if self.strategy.name not in PROB_STRATEGIES:
            raise ValueError(f"{self.strategy.name!r} is not a probabilistic strategy")

    def to_dict(self):
        return {"type": "prob", "noise": self.noise.to_dict(), "strategy": self.strategy.to_dict()}


def mechanism_from_dict(d: dict):
    t = d.get("type")
    if t == "mdm":
        return MinDistance()
    if t in ("det", "prob"):
        noise = noise_from_dict(d["noise"])
        default = "farthest" if t == "det" else "scaled-uniform"
        strat = strategy_from_dict(d.get("strategy", default))
        return DetAMDM(noise, strat) if t == "det" else ProbAMDM(noise, strat)
    raise ValueError(f"unknown mechanism type {t!r}")


# ---------------------------------------------------------------------------
# the oracle


class ContrastiveOracle:
    """Stateful two-step oracle; one interaction = one :class:`ExamplePair`.

    For adaptive adversaries ``concept`` is None until :meth:`finalize`.
    """

    def __init__(self, concept: Optional[Concept], mechanism, seed=None, rng=None, eta: float = ETA):
        self.mechanism = mechanism
        self.noise = mechanism.noise
        self.eta = float(eta)
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.seed = seed
        strat = getattr(mechanism, "strategy", None)
        self.strategy = copy.deepcopy(strat) if strat is not None else None
        self.transcript: list = []
        self._concept = concept
        if self.adaptive:
            if concept is not None and not isinstance(self.strategy, PassiveThresholdAdversary):
                raise ValueError("adaptive adversaries choose the concept themselves")
        elif concept is None:
            raise ValueError("a concept is required for this mechanism")
        if self.strategy is not None and concept is not None:
            kind = "threshold" if isinstance(concept, Threshold) else "halfspace"
            if kind not in self.strategy.kinds:
                raise ValueError(f"strategy {self.strategy.name!r} does not support {kind} concepts")

    @property
    def adaptive(self) -> bool:
        return self.strategy is not None and self.strategy.adaptive

    @property
    def dim(self) -> int:
        if isinstance(self.strategy, ThresholdEmbeddingAdversary):
            return self.strategy.k
        if isinstance(self.strategy, ThresholdVersionSpaceAdversary):
            return 1
        return self._concept.dim

    @property
    def kind(self) -> str:
        """``"threshold"`` (domain [0, 1]) or ``"halfspace"`` (domain the ball)."""
        if isinstance(self.strategy, ThresholdEmbeddingAdversary):
            return "halfspace"
        if isinstance(self.strategy, ThresholdVersionSpaceAdversary):
            return "threshold"
        return "threshold" if isinstance(self._concept, Threshold) else "halfspace"

    @property
    def concept(self) -> Concept:
        if self._concept is None:
            raise RuntimeError("the adversary has not committed to a concept yet; call finalize()")
        return self._concept

    @property
    def n_queries(self) -> int:
        return len(self.transcript)

    def _check_domain(self, x: np.ndarray):
        if self.kind == "threshold":
            if x.shape[0] != 1 or not 0.0 <= float(x[0]) <= 1.0:
                raise ValueError(f"query {x.tolist()} is outside [0, 1]")
        else:
            if x.shape[0] != self.dim:
                raise ValueError(f"query has dimension {x.shape[0]}, expected {self.dim}")
            if float(np.linalg.norm(x)) > RADIUS + geo.BALL_TOL:
                raise ValueError(f"query {x.tolist()} is outside the ball B(0, 1/2)")

    def query(self, x) -> ExamplePair:
        """Active step: label ``x`` and return it with its contrastive example."""
        x = geo.as_point(x)
        self._check_domain(x)
        if self.adaptive:
            pair = self._adaptive_pair(x)
        else:
            lx = geo.label(self._concept, x)
            xp, lxp = self.contrastive_step(x, lx)
            pair = ExamplePair(x, lx, xp, lxp)
        self.transcript.append(pair)
        return pair

    def sample(self) -> ExamplePair:
        """Passive step: a uniform primary point and its contrastive example."""
        if self.adaptive or isinstance(self.strategy, PassiveThresholdAdversary):
            raise RuntimeError(f"strategy {self.strategy.name!r} cannot answer single passive samples")
        x = geo.sample_domain(self.concept, self.rng)
        return self.query(x)

    def sample_batch(self, m: int) -> list:
        if not isinstance(self.strategy, PassiveThresholdAdversary):
            return [self.sample() for _ in range(m)]
        xs = self.rng.uniform(0.0, 1.0, size=m)
        labels = self._concept.predict(xs)
        plan = adversary_passive_threshold(xs, labels, self.noise)
        self._passive_plan = plan
        pairs = []
        for v, lab in zip(xs, labels):
            xp = plan["tilde_pos"] if lab == 1 else plan["tilde_neg"]
            pairs.append(ExamplePair([v], lab, [xp], 1 - lab))
        self.transcript.extend(pairs)
        return pairs

    def contrastive_step(self, x: np.ndarray, lx: int):
        c = self.concept
        if isinstance(self.mechanism, MinDistance):
            xm = np.array([c.theta]) if isinstance(c, Threshold) else geo.nearest_opposite_point(x, c)
            return xm, geo.label(c, xm)
        xp = self.strategy.respond(self, x, lx)
        return xp, geo.label(c, xp)

    def _adaptive_pair(self, x: np.ndarray) -> ExamplePair:
        st = self.strategy
        if isinstance(st, ThresholdEmbeddingAdversary):
            lx, t_p, lxp = st.answer(self.noise, float(x[0]))
            xp = x.copy()
            xp[0] = t_p
            return ExamplePair(x, lx, xp, lxp)
        lx, t_p, lxp = st.answer(self.noise, float(x[0]))
        return ExamplePair(x, lx, [t_p], lxp)

    def finalize(self, hypothesis: Optional[Concept] = None) -> Concept:
        """Fix the target concept (adaptive strategies commit here) and return it."""
        st = self.strategy
        if isinstance(st, ThresholdEmbeddingAdversary):
            guess = None
            if isinstance(hypothesis, Halfspace) and abs(hypothesis.omega[0]) > 0:
                # boundary crossing of the first axis
                guess = hypothesis.b / hypothesis.omega[0]
            p = st.commit(guess, self.eta)
            self._concept = st.concept_for(p, st.k)
        elif isinstance(st, ThresholdVersionSpaceAdversary):
            guess = hypothesis.theta if isinstance(hypothesis, Threshold) else None
            self._concept = Threshold(st.commit(guess, self.eta))
        elif isinstance(st, PassiveThresholdAdversary) and getattr(self, "_passive_plan", None):
            lo, hi = self._passive_plan["consistent"]
            if lo <= hi:
                theta = lo
                if isinstance(hypothesis, Threshold) and abs(hypothesis.theta - lo) < abs(hypothesis.theta - hi):
                    theta = max(lo, hi - self.eta)
                self._concept = Threshold(theta)
        return self.concept

    # -- auditing -------------------------------------------------------------
    def audit(self, tol: float = AUDIT_TOL) -> list:
        """Validity violations in the transcript (empty when every response is legal)."""
        c = self.concept
        out = []
        for i, p in enumerate(self.transcript):
            out.extend(f"pair {i}: {msg}" for msg in audit_pair(c, self.mechanism, p, tol))
        return out

    def write_transcript(self, fp: IO[str]):
        for p in self.transcript:
            fp.write(p.to_json() + "\n")

    def to_config(self) -> dict:
        return {
            "concept": None if self._concept is None or self.adaptive else geo.concept_to_dict(self._concept),
            "mechanism": self.mechanism.to_dict(),
            "seed": self.seed,
            "eta": self.eta,
        }


def oracle_from_config(d: dict) -> ContrastiveOracle:
    concept = geo.concept_from_dict(d["concept"]) if d.get("concept") else None
    return ContrastiveOracle(concept, mechanism_from_dict(d["mechanism"]), seed=d.get("seed"), eta=d.get("eta", ETA))


def read_transcript(fp: IO[str]) -> list:
    return [ExamplePair.from_json(line) for line in fp if line.strip()]


def _opposite_region_empty(c: Concept, lx: int) -> bool:
    return isinstance(c, Threshold) and lx == 1 and c.theta >= 1.0


def audit_pair(c: Concept, mechanism, p: ExamplePair, tol: float = AUDIT_TOL) -> list:
    msgs = []
    if not geo.in_domain(c, p.xp):
        msgs.append("contrastive point outside the domain")
    if geo.label(c, p.x) != p.lx:
        msgs.append("primary label is wrong")
    if geo.label(c, p.xp) != p.lxp:
        msgs.append("contrastive label is wrong")
    fr = frame_for(c, p.x, p.lx)
    dist = float(np.linalg.norm(p.xp - fr.x_min))
    if isinstance(mechanism, MinDistance):
        if dist > tol:
            msgs.append(f"MDM point is {dist:.3g} away from the nearest boundary point")
        return msgs
    if p.lxp == p.lx and not _opposite_region_empty(c, p.lx):
        msgs.append("contrastive label equals primary label")
    if isinstance(mechanism, DetAMDM):
        budget = float(mechanism.noise(fr.r))
        if dist > budget + tol:
            msgs.append(f"contrastive distance {dist:.6g} exceeds budget {budget:.6g}")
    return msgs


def audit_expectation(concept: Concept, mechanism, x, n: int = 10_000, seed=0) -> dict:
    """Monte Carlo check of ``E[d(x', x_min)] <= f(r)`` for a fixed primary point."""
    x = geo.as_point(x)
    oracle = ContrastiveOracle(concept, mechanism, seed=seed)
    lx = geo.label(concept, x)
    fr = frame_for(concept, x, lx)
    d = np.empty(n)
    wrong = 0
    for i in range(n):
        xp, lxp = oracle.contrastive_step(x, lx)
        d[i] = float(np.linalg.norm(xp - fr.x_min))
        wrong += int(lxp == lx)
    budget = float(mechanism.noise(fr.r))
    limit = budget * (1.0 + 4.0 / math.sqrt(n)) + oracle.eta
    return {"mean": float(d.mean()), "budget": budget, "limit": limit, "same_label": wrong, "ok": bool(d.mean() <= limit and wrong == 0)}


# ---------------------------------------------------------------------------
# functional forms


def query_active(oracle: ContrastiveOracle, x) -> ExamplePair:
    return oracle.query(x)


def sample_passive(oracle: ContrastiveOracle) -> ExamplePair:
    return oracle.sample()


def contrastive_step(concept: Concept, mechanism, x, label_x: int, rng=None, eta: float = ETA):
    """One contrastive response for a fixed primary point (no transcript entry)."""
    rng = rng if rng is not None else np.random.default_rng()
    oracle = ContrastiveOracle(concept, mechanism, rng=rng, eta=eta)
    return oracle.contrastive_step(geo.as_point(x), int(label_x))


def adversary_threshold_versionspace(state: ThresholdVersionSpaceAdversary, x: float, f: NoiseFunction):
    """Answer one query; returns ``(label, x', state)`` with ``state`` updated in place."""
    if not 0.0 <= x <= 1.0 and (state.lo, state.hi) == (0.0, 1.0):
        raise ValueError(f"query {x} is outside [0, 1]")
    lx, xp, _ = state.answer(f, float(x))
    return lx, xp, state


def make_embedded_halfspace_adversary(k: int, noise: NoiseFunction, seed=None) -> ContrastiveOracle:
    return ContrastiveOracle(None, DetAMDM(noise, ThresholdEmbeddingAdversary(k)), seed=seed)
