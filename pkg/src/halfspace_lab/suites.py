"""Property suites: geometric error bounds, the convexity inequality, noise
function identities and oracle validity. Each returns a JSON-ready report
with an ``ok`` verdict and the largest observed slack."""

from __future__ import annotations

import math

import numpy as np

from . import geometry as geo
from .geometry import Halfspace, Threshold
from .noise import (
    ExponentialNoise,
    LinearNoise,
    PolynomialNoise,
    TabulatedNoise,
    ZeroNoise,
    stop_count,
    superadditive_on_grid,
)
from .oracles import (
    ContrastiveOracle,
    DetAMDM,
    FarthestValid,
    MinDistance,
    NearestValid,
    PointMass,
    ProbAMDM,
    RandomInBall,
    ScaledUniform,
    TwoAtom,
    audit_expectation,
)

ANGLE_TOL = 1e-9
MC_SIGMAS = 4.0


def _opposite_point(h: Halfspace, x: np.ndarray, rng, tries: int = 1000):
    """A point of the ball with the opposite label, placed near the projection
    of ``x`` at a log-uniform scale so the error bounds are not all vacuous."""
    lx = geo.label(h, x)
    proj = geo.project_onto_boundary(x, h)
    r = float(np.linalg.norm(x - proj))
    for _ in range(tries):
        v = rng.standard_normal(x.shape[0])
        v *= r * 10 ** rng.uniform(-3, 0.5) / np.linalg.norm(v)
        along = float(v @ h.omega)
        # push into the opposite side
        v -= (along + (1 if lx == 1 else -1) * abs(along)) * h.omega
        v += (-1 if lx == 1 else 1) * 1e-9 * h.omega
        xp = proj + v
        if geo.in_domain(h, xp) and geo.label(h, xp) != lx:
            return xp
    return None


def errdist_config(k: int, rng, homogeneous: bool = False):
    """Random ``(h, x, x')`` with ``x`` off the boundary and ``x'`` of the opposite label."""
    while True:
        h = geo.random_concept("homogeneous" if homogeneous else "halfspace", k, rng)
        x = geo.sample_uniform_ball(k, rng)
        if geo.distance_to_boundary(x, h) < 1e-6:
            continue
        xp = _opposite_point(h, x, rng)
        if xp is not None:
            return h, x, xp


def errdist_bounds(h: Halfspace, x, xp) -> dict:
    proj = geo.project_onto_boundary(x, h)
    r = float(np.linalg.norm(x - proj))
    s = float(np.linalg.norm(xp - proj))
    angle = geo.angle_at(xp, x, proj)
    limit = min(math.atan2(s, r), math.acos(min(1.0, r / float(np.linalg.norm(x - xp)))))
    return {"r": r, "s": s, "angle": angle, "angle_limit": limit}


def verify_errdist(k_list=(2, 3, 5), n_configs: int = 10_000, mc_samples: int = 100_000, seed: int = 0, mc_configs: int = 200) -> dict:
    """Angle bound on every configuration; the two error bounds on a subsample.

    The homogeneous bound is only asserted where the induced normal keeps the
    orientation of ``x - x'`` (``<x - x', x> > 0``); other configurations are
    counted as ``orientation_flips``.
    """
    rng = np.random.default_rng(seed)
    per_k = max(1, -(-n_configs // len(k_list)))
    angle_viol, angle_slack = 0, -math.inf
    for k in k_list:
        for _ in range(per_k):
            h, x, xp = errdist_config(k, rng)
            b = errdist_bounds(h, x, xp)
            slack = b["angle"] - b["angle_limit"]
            angle_slack = max(angle_slack, slack)
            angle_viol += int(slack > ANGLE_TOL)

    gen_viol, gen_slack, hom_viol, hom_slack, flips = 0, -math.inf, 0, -math.inf, 0
    per_k_mc = max(1, mc_configs // len(k_list))
    for k in k_list:
        for _ in range(per_k_mc):
            h, x, xp = errdist_config(k, rng)
            b = errdist_bounds(h, x, xp)
            c = geo.induced_halfspace(x, xp, geo.label(h, x))
            err, se = geo.monte_carlo_error(h, c, mc_samples, rng)
            bound = 2**k * b["s"] / b["r"]
            slack = err - MC_SIGMAS * se - bound
            gen_slack = max(gen_slack, slack)
            gen_viol += int(slack > 0)

            h0, x0, xp0 = errdist_config(k, rng, homogeneous=True)
            if float((x0 - xp0) @ x0) <= 0.0:
                flips += 1
                continue
            b0 = errdist_bounds(h0, x0, xp0)
            c0 = geo.induced_homogeneous(x0, xp0, geo.label(h0, x0))
            slack0 = geo.homogeneous_error(c0, h0) - b0["s"] / (math.pi * b0["r"])
            hom_slack = max(hom_slack, slack0)
            hom_viol += int(slack0 > 1e-12)
    return {
        "suite": "errdist",
        "configs": per_k * len(k_list),
        "angle_violations": angle_viol,
        "angle_max_slack": angle_slack,
        "halfspace_violations": gen_viol,
        "halfspace_max_slack": gen_slack,
        "homogeneous_violations": hom_viol,
        "homogeneous_max_slack": hom_slack,
        "orientation_flips": flips,
        "ok": bool(angle_viol == 0 and gen_viol == 0 and hom_viol == 0),
    }


def random_convex(rng):
    """Non-negative mix of even powers, an affine part and exponentials."""
    a0, a1 = rng.uniform(-1, 1, size=2)
    even = rng.uniform(0, 1, size=3)
    lam = rng.uniform(-2, 2, size=2)
    w = rng.uniform(0, 1, size=2)

    def f(z):
        z = np.asarray(z, dtype=float)
        out = a0 + a1 * z + sum(c * z ** (2 * (j + 1)) for j, c in enumerate(even))
        return out + sum(wi * np.exp(li * z) for wi, li in zip(w, lam))

    return f


def convexity_gap(f, support, probs, a: float, b: float) -> float:
    """``E f(Z) - chord bound``; never positive for convex ``f``."""
    support = np.asarray(support, dtype=float)
    probs = np.asarray(probs, dtype=float)
    ez = float(probs @ support)
    lhs = float(probs @ f(support))
    rhs = (ez - a) / (b - a) * float(f(b)) + (b - ez) / (b - a) * float(f(a))
    return lhs - rhs


def verify_convexity_lemma(n_cases: int = 1000, seed: int = 0, tol: float = 1e-10) -> dict:
    rng = np.random.default_rng(seed)
    viol, worst = 0, -math.inf
    for _ in range(n_cases):
        a, b = np.sort(rng.uniform(-1, 1, size=2))
        if b - a < 1e-3:
            b = a + 1e-3
        n = int(rng.integers(1, 7))
        support = rng.uniform(a, b, size=n)
        probs = rng.dirichlet(np.ones(n))
        gap = convexity_gap(random_convex(rng), support, probs, a, b)
        worst = max(worst, gap)
        viol += int(gap > tol)
    return {"suite": "convexity", "cases": n_cases, "violations": viol, "max_slack": worst, "ok": bool(viol == 0)}


def _invertible_families():
    return [
        PolynomialNoise(1.0, 0.25),
        PolynomialNoise(0.5, 1.0),
        PolynomialNoise(2.0, 1.0 / 16),
        ExponentialNoise(0.25),
        LinearNoise(0.5),
        TabulatedNoise(((0.25, 0.01), (0.5, 0.05), (1.0, 0.3))),
    ]


def verify_noise(seed: int = 0, n: int = 100) -> dict:
    rng = np.random.default_rng(seed)
    fams = _invertible_families()
    round_trip = envelope = lower = 0
    worst = {"round_trip": 0.0, "envelope": -math.inf, "quarter": -math.inf}
    for f in fams:
        top = float(f(1.0))
        for y in rng.uniform(0.0, top, size=n):
            d = abs(float(f(f.inverse(y))) - y)
            worst["round_trip"] = max(worst["round_trip"], d)
            round_trip += int(d > 1e-9)
        rs = rng.uniform(0.0, 1.0, size=n)
        for r in rs:
            e = f.tilde_f(r) - float(f(r / 2))
            worst["envelope"] = max(worst["envelope"], e)
            envelope += int(e > 1e-12)
            # f <= identity on (0, 1] for every family listed
            q = float(f(r / 4)) - f.tilde_f(r)
            worst["quarter"] = max(worst["quarter"], q)
            lower += int(q > 1e-12)
    mono = 0
    for f in fams:
        us = np.linspace(0.05, 1.0, 12)
        bs = np.geomspace(1e-6, 0.5, 12)
        for i in range(len(us)):
            for j in range(len(bs)):
                n0 = stop_count(f, us[i], bs[j])
                if i + 1 < len(us):
                    mono += int(stop_count(f, us[i + 1], bs[j]) < n0)
                if j > 0:
                    mono += int(stop_count(f, us[i], bs[j - 1]) < n0)
    grid = np.linspace(0.01, 0.5, 25)
    superadd = sum(not superadditive_on_grid(f, grid) for f in fams if isinstance(f, PolynomialNoise))
    viol = round_trip + envelope + lower + mono + superadd
    return {
        "suite": "noise",
        "round_trip_violations": round_trip,
        "envelope_violations": envelope,
        "quarter_violations": lower,
        "stop_monotone_violations": mono,
        "superadditive_violations": superadd,
        "max_slack": worst,
        "ok": bool(viol == 0),
    }


def _concepts(rng):
    return [
        Threshold(rng.uniform()),
        Threshold(0.0),
        Threshold(1.0),
        geo.random_concept("homogeneous", 2, rng),
        geo.random_concept("halfspace", 3, rng),
        geo.random_concept("halfspace", 5, rng),
    ]


def verify_oracles(seed: int = 0, n_samples: int = 500, n_draws: int = 10_000) -> dict:
    """Validity audits on passive transcripts, expectation audits for the
    probabilistic strategies, and the two-atom endpoint frequency."""
    rng = np.random.default_rng(seed)
    f = PolynomialNoise(1.0, 0.25)
    problems = []
    mechs = [MinDistance(), DetAMDM(f, FarthestValid()), DetAMDM(f, NearestValid()), DetAMDM(f, RandomInBall()),
             DetAMDM(ZeroNoise(), NearestValid()), ProbAMDM(f, ScaledUniform()), ProbAMDM(f, PointMass())]
    for c in _concepts(rng):
        for i, m in enumerate(mechs):
            o = ContrastiveOracle(c, m, seed=int(rng.integers(2**31)))
            for _ in range(n_samples):
                o.sample()
            problems.extend(f"{c!r} / {type(m).__name__}: {p}" for p in o.audit()[:3])

    worst_ratio = 0.0
    for c in _concepts(rng)[3:] + [Threshold(0.5)]:
        for strat in (ScaledUniform(), PointMass()):
            x = geo.sample_domain(c, rng)
            rep = audit_expectation(c, ProbAMDM(f, strat), x, n=n_draws, seed=int(rng.integers(2**31)))
            if rep["budget"] > 0:
                worst_ratio = max(worst_ratio, rep["mean"] / rep["limit"])
            if not rep["ok"]:
                problems.append(f"expectation audit failed for {strat.name} on {c!r}: {rep}")

    freq = two_atom_frequency(f, n_draws, seed)
    if not freq["ok"]:
        problems.append(f"two-atom endpoint frequency off: {freq}")
    return {
        "suite": "oracles",
        "violations": len(problems),
        "problems": problems[:20],
        "max_expectation_ratio": worst_ratio,
        "two_atom": freq,
        "ok": not problems,
    }


def two_atom_frequency(f, n_draws: int = 10_000, seed: int = 0, theta: float = 0.5, x: float = 0.1) -> dict:
    """Endpoint frequency of the two-atom strategy from its initial state."""
    o = ContrastiveOracle(Threshold(theta), ProbAMDM(f, TwoAtom()), seed=seed)
    st = o.strategy
    lx = geo.label(o.concept, [x])
    p, end = st.endpoint_probability(o, x, lx)
    hits = sum(int(float(st.draw(o, np.array([x]), lx)[0]) == end) for _ in range(n_draws))
    width = st.hi - st.lo
    target = float(f(width / 4)) / (width / 4)
    freq = hits / n_draws
    return {"frequency": freq, "target": target, "probability": p, "ok": bool(abs(freq - target) <= 0.02)}


def run_all(seed: int = 0, quick: bool = False) -> dict:
    n = 2000 if quick else 10_000
    mc = 20_000 if quick else 100_000
    suites = {
        "errdist": verify_errdist(n_configs=n, mc_samples=mc, seed=seed),
        "convexity": verify_convexity_lemma(1000, seed),
        "noise": verify_noise(seed),
        "oracles": verify_oracles(seed, n_samples=200 if quick else 500),
    }
    return {"seed": seed, "suites": suites, "ok": all(s["ok"] for s in suites.values())}
