"""Perturbation budgets for approximate contrastive oracles.

A noise function ``f`` bounds how far a contrastive example may land from the
ideal (minimum-distance) one, as a function of the primary point's distance to
the decision boundary. Every family here is non-decreasing with ``f(0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

INFINITY = math.inf

#: Hard cap on bisection steps; float exhaustion usually ends the loop first.
MAX_BISECT = 200


def _bisect_inf(h: Callable[[float], float], y: float, lo: float, hi: float) -> float:
    """Smallest ``r`` in ``[lo, hi]`` with ``h(r) >= y`` for non-decreasing ``h``."""
    if h(lo) >= y:
        return lo
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) >= y:
            hi = mid
        else:
            lo = mid
    return hi


class NoiseFunction:
    """Base class; subclasses implement :meth:`__call__` and :meth:`to_dict`.

    The inverse routines default to bisection and are overridden with closed
    forms where one exists.
    """

    family = "abstract"

    def __call__(self, r):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- inverses -------------------------------------------------------------
    def inverse(self, y: float, r_max: float = 1.0) -> float:
        """Generalized inverse ``inf{r >= 0 : f(r) >= y}`` on ``[0, r_max]``."""
        y = float(y)
        if y < 0:
            raise ValueError(f"inverse needs y >= 0, got {y}")
        top = float(self(r_max))
        if y > top:
            raise ValueError(
                f"{y} is above the range of {self!r} on [0, {r_max}] "
                f"(achievable maximum {top})"
            )
        return self._inverse(y, r_max)

    def _inverse(self, y: float, r_max: float) -> float:
        return _bisect_inf(lambda r: float(self(r)), y, 0.0, r_max)

    def ratio_g(self, r: float) -> float:
        """``g(r) = f(r) / r``; ``g(0)`` is the right limit."""
        r = float(r)
        if r < 0:
            raise ValueError("ratio_g needs r >= 0")
        if r == 0.0:
            return self._ratio_at_zero()
        return float(self(r)) / r

    def _ratio_at_zero(self) -> float:
        return 0.0

    def ratio_g_inverse(self, y: float, r_max: float = 1.0) -> float:
        y = float(y)
        top = self.ratio_g(r_max)
        if y < 0 or y > top:
            raise ValueError(
                f"{y} is outside the range of g on (0, {r_max}] (achievable maximum {top})"
            )
        return self._ratio_g_inverse(y, r_max)

    def _ratio_g_inverse(self, y: float, r_max: float) -> float:
        return _bisect_inf(self.ratio_g, y, 0.0, r_max)

    # -- the threshold contraction --------------------------------------------
    def plus_identity_inverse(self, y: float) -> float:
        """Solve ``u + f(u) = y`` for ``u`` in ``[0, y]``."""
        y = float(y)
        if y <= 0.0:
            return 0.0
        return _bisect_inf(lambda u: u + float(self(u)), y, 0.0, y)

    def contraction_step(self, gap: float) -> float:
        """``f((f + I)^{-1}(gap))``: the largest distance between the true
        threshold and a contrastive point sitting ``gap`` away from the query."""
        return float(self(self.plus_identity_inverse(gap)))

    def tilde_f(self, r: float) -> float:
        """Worst-case version-space width after one midpoint query on width ``r``."""
        return self.contraction_step(0.5 * float(r))

    def is_monotone(self, n: int = 1000, seed: int = 0, tol: float = 1e-12) -> bool:
        rng = np.random.default_rng(seed)
        r = np.sort(rng.uniform(0.0, 1.0, size=(n, 2)), axis=1)
        lo = np.array([float(self(v)) for v in r[:, 0]])
        hi = np.array([float(self(v)) for v in r[:, 1]])
        return bool(np.all(lo <= hi + tol))


@dataclass(frozen=True)
class ZeroNoise(NoiseFunction):
    """``f = 0``: the minimum-distance oracle."""

    family = "zero"

    def __call__(self, r):
        return np.zeros_like(r, dtype=float) if np.ndim(r) else 0.0

    def to_dict(self):
        return {"family": "zero"}


@dataclass(frozen=True)
class PolynomialNoise(NoiseFunction):
    """``f(r) = scale * r ** (1 + c)``."""

    c: float = 1.0
    scale: float = 0.25
    family = "poly"

    def __post_init__(self):
        if self.c <= 0 or self.scale <= 0:
            raise ValueError("poly noise needs c > 0 and scale > 0")

    def __call__(self, r):
        return self.scale * np.power(r, 1.0 + self.c) if np.ndim(r) else self.scale * float(r) ** (1.0 + self.c)

    def _inverse(self, y, r_max):
        return (y / self.scale) ** (1.0 / (1.0 + self.c))

    def _ratio_g_inverse(self, y, r_max):
        return (y / self.scale) ** (1.0 / self.c)

    def to_dict(self):
        return {"family": "poly", "c": self.c, "scale": self.scale}


@dataclass(frozen=True)
class ExponentialNoise(NoiseFunction):
    """``f(r) = scale * exp(-1 / r)`` with ``f(0) = 0``."""

    scale: float = 0.25
    family = "exp"

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("exp noise needs scale > 0")

    def __call__(self, r):
        if np.ndim(r):
            r = np.asarray(r, dtype=float)
            out = np.zeros_like(r)
            pos = r > 0
            out[pos] = self.scale * np.exp(-1.0 / r[pos])
            return out
        r = float(r)
        return self.scale * math.exp(-1.0 / r) if r > 0 else 0.0

    def _inverse(self, y, r_max):
        if y == 0.0:
            return 0.0
        return -1.0 / math.log(y / self.scale)

    def to_dict(self):
        return {"family": "exp", "scale": self.scale}


@dataclass(frozen=True)
class LinearNoise(NoiseFunction):
    """``f(r) = slope * r`` with ``slope`` in ``(0, 1]``."""

    slope: float = 1.0
    family = "linear"

    def __post_init__(self):
        if not 0 < self.slope <= 1:
            raise ValueError("linear noise needs slope in (0, 1]")

    def __call__(self, r):
        return self.slope * np.asarray(r, dtype=float) if np.ndim(r) else self.slope * float(r)

    def _inverse(self, y, r_max):
        return y / self.slope

    def _ratio_at_zero(self):
        return self.slope

    def ratio_g_inverse(self, y, r_max=1.0):
        # g is constant, so only y == slope has a preimage
        if float(y) != self.slope:
            raise ValueError(f"g is constant {self.slope}; {y} has no preimage")
        return 0.0

    def to_dict(self):
        return {"family": "linear", "slope": self.slope}


@dataclass(frozen=True)
class TabulatedNoise(NoiseFunction):
    """Piecewise-linear interpolation through monotone ``(r, f(r))`` samples.

    ``(0, 0)`` is prepended when missing; beyond the last knot ``f`` stays flat.
    """

    table: tuple = field(default=((0.0, 0.0), (1.0, 1.0)))
    family = "table"

    def __post_init__(self):
        pts = sorted((float(a), float(b)) for a, b in self.table)
        if not pts or pts[0][0] > 0.0:
            pts.insert(0, (0.0, 0.0))
        rs = np.array([p[0] for p in pts])
        fs = np.array([p[1] for p in pts])
        if fs[0] != 0.0:
            raise ValueError("tabulated noise must satisfy f(0) = 0")
        if np.any(np.diff(rs) <= 0) or np.any(np.diff(fs) < 0):
            raise ValueError("tabulated noise needs strictly increasing r and non-decreasing f")
        if np.any(fs < 0):
            raise ValueError("tabulated noise must be non-negative")
        object.__setattr__(self, "table", tuple(pts))
        object.__setattr__(self, "_rs", rs)
        object.__setattr__(self, "_fs", fs)

    def __call__(self, r):
        out = np.interp(r, self._rs, self._fs)
        return out if np.ndim(r) else float(out)

    def to_dict(self):
        return {"family": "table", "table": [list(p) for p in self.table]}


@dataclass(frozen=True)
class ScaledNoise(NoiseFunction):
    """``f(r) = outer * base(inner * r)``, e.g. ``4f`` or ``3 f(2 r)``."""

    base: NoiseFunction = field(default_factory=ZeroNoise)
    outer: float = 1.0
    inner: float = 1.0
    family = "scaled"

    def __call__(self, r):
        if np.ndim(r):
            return self.outer * self.base(self.inner * np.asarray(r, dtype=float))
        return self.outer * float(self.base(self.inner * float(r)))

    def _ratio_at_zero(self):
        return self.outer * self.inner * self.base._ratio_at_zero()

    def to_dict(self):
        return {"family": "scaled", "base": self.base.to_dict(), "outer": self.outer, "inner": self.inner}


def noise_from_dict(d: dict) -> NoiseFunction:
    fam = d.get("family")
    if fam == "zero":
        return ZeroNoise()
    if fam == "poly":
        return PolynomialNoise(c=float(d.get("c", 1.0)), scale=float(d.get("scale", 0.25)))
    if fam == "exp":
        return ExponentialNoise(scale=float(d.get("scale", 0.25)))
    if fam == "linear":
        return LinearNoise(slope=float(d.get("slope", 1.0)))
    if fam == "table":
        return TabulatedNoise(table=tuple(tuple(p) for p in d["table"]))
    if fam == "scaled":
        return ScaledNoise(noise_from_dict(d["base"]), float(d.get("outer", 1.0)), float(d.get("inner", 1.0)))
    raise ValueError(f"unknown noise family {fam!r}")


def stop_count(h: Callable[[float], float], u: float, b: float, cap: int = 10**6):
    """Least ``n >= 0`` with ``h^(n)(u) <= b``; :data:`INFINITY` if none is found.

    Iteration also stops early (returning INFINITY) once an iterate above ``b``
    fails to decrease, since the sequence can then never reach ``b``.
    """
    if u < 0 or b < 0:
        raise ValueError("stop_count needs u, b >= 0")
    cur = float(u)
    n = 0
    while cur > b:
        if n >= cap:
            return INFINITY
        nxt = float(h(cur))
        if nxt >= cur:
            return INFINITY
        cur = nxt
        n += 1
    return n


def iterates(h: Callable[[float], float], u: float, n: int) -> list:
    out = [float(u)]
    for _ in range(n):
        out.append(float(h(out[-1])))
    return out


def superadditive_on_grid(f: NoiseFunction, grid: Sequence[float], tol: float = 1e-12) -> bool:
    """Check ``f(x + y) >= f(x) + f(y)`` over all grid pairs."""
    g = np.asarray(grid, dtype=float)
    x, y = np.meshgrid(g, g)
    lhs = np.vectorize(lambda v: float(f(v)))(x + y)
    rhs = np.vectorize(lambda v: float(f(v)))(x) + np.vectorize(lambda v: float(f(v)))(y)
    return bool(np.all(lhs >= rhs - tol))
