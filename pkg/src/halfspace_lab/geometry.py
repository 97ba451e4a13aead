"""Concepts over ``[0, 1]`` and the ball ``B(0, 1/2)``, plus the geometry used
to turn contrastive pairs into hypotheses and to score them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

RADIUS = 0.5
BALL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Threshold:
    """``x -> 1{x <= theta}`` on ``[0, 1]``."""

    theta: float

    def __post_init__(self):
        t = float(self.theta)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {t}")
        object.__setattr__(self, "theta", t)

    dim = 1
    kind = "threshold"

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1)
        return (X <= self.theta).astype(int)

    def __eq__(self, other):
        return isinstance(other, Threshold) and other.theta == self.theta

    def __hash__(self):
        return hash(("threshold", self.theta))

    def __repr__(self):
        return f"Threshold(theta={self.theta!r})"


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``x -> 1{<omega, x> >= b}`` on the ball, stored with a unit normal."""

    omega: np.ndarray
    b: float = 0.0
    homogeneous: bool = False

    def __post_init__(self):
        w = np.array(self.omega, dtype=float).reshape(-1)
        norm = float(np.linalg.norm(w))
        if not norm > 0.0 or not math.isfinite(norm):
            raise ValueError("half-space normal must be non-zero")
        b = float(self.b)
        if self.homogeneous and b != 0.0:
            raise ValueError("homogeneous half-space needs b = 0")
        # already-unit normals are kept bit-for-bit so serialization round-trips exactly
        if abs(norm - 1.0) > 4 * np.finfo(float).eps:
            w, b = w / norm, b / norm
        w.setflags(write=False)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "b", b)

    kind = "halfspace"

    @property
    def dim(self) -> int:
        return self.omega.shape[0]

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {X.shape[1]}")
        return (X @ self.omega >= self.b).astype(int)

    def __eq__(self, other):
        return (
            isinstance(other, Halfspace)
            and other.homogeneous == self.homogeneous
            and other.b == self.b
            and np.array_equal(other.omega, self.omega)
        )

    def __hash__(self):
        return hash(("halfspace", self.omega.tobytes(), self.b, self.homogeneous))

    def __repr__(self):
        return f"Halfspace(omega={self.omega.tolist()!r}, b={self.b!r}, homogeneous={self.homogeneous})"


Concept = Union[Threshold, Halfspace]


def as_point(x, dim: int | None = None) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"dimension mismatch: point has {x.shape[0]} coords, expected {dim}")
    return x


def in_domain(concept: Concept, x) -> bool:
    if isinstance(concept, Threshold):
        v = float(as_point(x, 1)[0])
        return 0.0 <= v <= 1.0
    return float(np.linalg.norm(as_point(x, concept.dim))) <= RADIUS + BALL_TOL


def label(concept: Concept, x) -> int:
    """Label of a single point; boundary ties get label 1."""
    if isinstance(concept, Threshold):
        return int(float(as_point(x, 1)[0]) <= concept.theta)
    return int(float(as_point(x, concept.dim) @ concept.omega) >= concept.b)


def project_onto_boundary(x, h: Halfspace) -> np.ndarray:
    x = as_point(x, h.dim)
    w = h.omega
    return x - ((x @ w - h.b) / (w @ w)) * w


def distance_to_boundary(x, h: Halfspace) -> float:
    x = as_point(x, h.dim)
    return abs(float(x @ h.omega) - h.b) / float(np.linalg.norm(h.omega))


def threshold_error(a: Threshold, b: Threshold) -> float:
    return abs(a.theta - b.theta)


def _clip_cos(v: float) -> float:
    return min(1.0, max(-1.0, v))


def homogeneous_error(a: Halfspace, b: Halfspace) -> float:
    """Disagreement mass of two homogeneous half-spaces: angle between normals over pi."""
    if not (a.homogeneous and b.homogeneous):
        raise ValueError("homogeneous_error needs two homogeneous half-spaces")
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    cos = float(a.omega @ b.omega) / float(np.linalg.norm(a.omega) * np.linalg.norm(b.omega))
    return math.acos(_clip_cos(cos)) / math.pi


def sample_uniform_ball(k: int, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Uniform draw(s) from ``B(0, 1/2)`` in ``R^k``.

    Returns shape ``(k,)`` when ``n`` is None, else ``(n, k)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    m = 1 if n is None else n
    g = rng.standard_normal((m, k))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero; guard anyway
    norms[norms == 0.0] = 1.0
    radius = RADIUS * rng.uniform(0.0, 1.0, size=(m, 1)) ** (1.0 / k)
    pts = g / norms * radius
    return pts[0] if n is None else pts


def sample_domain(concept: Concept, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    if isinstance(concept, Threshold):
        return rng.uniform(0.0, 1.0, size=1 if n is None else (n, 1))
    return sample_uniform_ball(concept.dim, rng, n)


def monte_carlo_error(a: Concept, b: Concept, n: int, rng: np.random.Generator, points=None):
    """Disagreement fraction on ``n`` uniform domain points and its binomial standard error.

    Pass ``points`` to reuse a fixed evaluation sample.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if a.dim != b.dim:
        raise ValueError("concepts live on different domains")
    X = sample_domain(a, rng, n) if points is None else points
    p = float(np.mean(a.predict(X) != b.predict(X)))
    return p, math.sqrt(p * (1.0 - p) / X.shape[0])


def exact_error(a: Concept, b: Concept) -> float | None:
    """Closed-form disagreement when one is available, else None."""
    if isinstance(a, Threshold) and isinstance(b, Threshold):
        return threshold_error(a, b)
    if isinstance(a, Halfspace) and isinstance(b, Halfspace) and a.homogeneous and b.homogeneous:
        return homogeneous_error(a, b)
    return None


def _oriented(normal: np.ndarray, offset: float, x: np.ndarray, label_x: int, homogeneous: bool) -> Halfspace:
    h = Halfspace(normal, offset, homogeneous)
    if label(h, x) != label_x:
        h = Halfspace(-normal, -offset, homogeneous)
    return h


def induced_halfspace(x, x_prime, label_x: int) -> Halfspace:
    """Half-space with boundary through ``x_prime`` perpendicular to ``x_prime - x``,
    oriented so that ``x`` keeps ``label_x``."""
    x = as_point(x)
    xp = as_point(x_prime, x.shape[0])
    d = xp - x
    n = float(np.linalg.norm(d))
    if n == 0.0:
        raise ValueError("induced_halfspace needs x != x_prime")
    w = d / n
    return _oriented(w, float(w @ xp), x, int(label_x), homogeneous=False)


class DegenerateDirection(ValueError):
    """The candidate boundary passes through the primary point."""


def induced_homogeneous(x, x_prime, label_x: int) -> Halfspace:
    """Homogeneous half-space with normal along ``x_prime - x``, keeping ``x`` at ``label_x``."""
    x = as_point(x)
    xp = as_point(x_prime, x.shape[0])
    d = xp - x
    n = float(np.linalg.norm(d))
    if n == 0.0:
        raise DegenerateDirection("induced_homogeneous needs x != x_prime")
    w = d / n
    if float(w @ x) == 0.0:
        raise DegenerateDirection("x lies on the candidate boundary; its side is undetermined")
    return _oriented(w, 0.0, x, int(label_x), homogeneous=True)


def angle_at(x_prime, x, x_proj) -> float:
    """Angle at vertex ``x`` of the triangle ``(x_prime, x, x_proj)``."""
    x = as_point(x)
    u = as_point(x_prime, x.shape[0]) - x
    v = as_point(x_proj, x.shape[0]) - x
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("angle_at needs x distinct from both other vertices")
    u, v = u / nu, v / nv
    # stable near 0 and pi, unlike acos of the dot product
    return 2.0 * math.atan2(float(np.linalg.norm(u - v)), float(np.linalg.norm(u + v)))


def nearest_opposite_point(x, h: Halfspace) -> np.ndarray:
    """Closest point of the ball to ``x`` on the boundary hyperplane of ``h``.

    This is the orthogonal projection whenever that lies in the ball; otherwise
    the nearest point of the hyperplane-ball intersection (its rim).
    """
    p = project_onto_boundary(x, h)
    if float(np.linalg.norm(p)) <= RADIUS:
        return p
    center = h.b * h.omega
    rho2 = RADIUS**2 - h.b**2
    if rho2 < 0:
        raise ValueError("the boundary hyperplane misses the domain")
    off = p - center
    return center + off * (math.sqrt(rho2) / float(np.linalg.norm(off)))


def random_concept(kind: str, k: int, rng: np.random.Generator) -> Concept:
    """``threshold``: theta ~ U[0, 1]; ``homogeneous``: uniform unit normal;
    ``halfspace``: uniform unit normal with offset ~ U[-1/2, 1/2]."""
    if kind == "threshold":
        return Threshold(rng.uniform(0.0, 1.0))
    w = rng.standard_normal(k)
    w /= np.linalg.norm(w)
    if kind == "homogeneous":
        return Halfspace(w, 0.0, True)
    if kind == "halfspace":
        return Halfspace(w, rng.uniform(-RADIUS, RADIUS), False)
    raise ValueError(f"unknown concept kind {kind!r}")


def concept_to_dict(c: Concept) -> dict:
    if isinstance(c, Threshold):
        return {"kind": "threshold", "theta": c.theta, "dim": 1}
    return {
        "kind": "halfspace",
        "omega": [float(v) for v in c.omega],
        "b": c.b,
        "homogeneous": c.homogeneous,
        "dim": c.dim,
    }


def concept_from_dict(d: dict) -> Concept:
    kind = d.get("kind")
    if kind == "threshold":
        return Threshold(d["theta"])
    if kind == "halfspace":
        h = Halfspace(d["omega"], d.get("b", 0.0), bool(d.get("homogeneous", False)))
        if "dim" in d and int(d["dim"]) != h.dim:
            raise ValueError("dim does not match omega")
        return h
    raise ValueError(f"unknown concept kind {kind!r}")
