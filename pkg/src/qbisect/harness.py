"""Scenario runner: seeded property suites, deterministic reports and point clouds.

Every trial draws from its own stream ``make_rng(seed, suite, kind, index)``,
so results do not depend on how trials are split across worker processes.
Workers return per-trial outcomes that are merged in trial order.
"""

from __future__ import annotations

import copy
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable

import jsonschema

from . import __version__
from . import scalar as sc
from .bisector import (Bisector, bisector_from_real_spine, hermitian_triple, is_totally_real_triple,
                       pythagoras, same_bisector, sample_bisector_point, sample_slice_point,
                       sample_spine_point)
from .fan import (FanDecomposition, blade_containing, blade_in_bisector, check_orthogonal_pair,
                  distinct_decompositions, fan_blade, intersection_dim, starlike_check,
                  tangent_dim)
from .isometry import Isometry, frame_transport, left_mult
from .model import BallPoint, ProjectivePoint, ball, delta, dist, geodesic_through
from .qlinalg import (FieldTag, HVector, QMatrix, RankDeficiencyError, Subspace, herm, norm,
                      orth_project, same_span, signature, solve_right)
from .quaternion import (Quaternion, cayley_unit, commutes, in_subfield, is_similar,
                         quaternion_with_norm2, similarity_witness)
from .sampling import (make_rng, random_ball_point, random_imaginary, random_quaternion,
                       random_scalar, random_vector)

SUITES = ("quaternion", "linalg", "model", "isometry", "mostow", "fan", "starlike")

# stream keys; never renumber, certificates depend on them
_SUITE_KEY = {name: i + 1 for i, name in enumerate(SUITES)}
_FIXTURE_KEY = 99

DEFAULT_TRIALS = {
    "quaternion": {"triples": 1000},
    "linalg": {"vectors": 200, "systems": 200},
    "model": {"pairs": 200, "h4_pairs": 1000},
    "isometry": {"maps": 50},
    "mostow": {"spine": 100, "fiber": 10, "bisector": 100, "triple": 100,
               "pythagoras": 100, "rebuild": 5, "rebuild_samples": 20},
    "fan": {"points": 20, "blade_samples": 20, "reflection_samples": 3, "pairs": 10,
            "selector_pairs": 5},
    "starlike": {"pairs": 10, "points": 20},
    "certify": {"points": 100, "blades": 3},
}

MAX_LISTED_VIOLATIONS = 50


class ScenarioError(ValueError):
    """Invalid scenario; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def load_schema(name: str) -> dict:
    text = resources.files("qbisect").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def canonical_json(data) -> str:
    """Sorted, compact, ASCII JSON; the byte form used for hashing and comparison."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _merge_trials(overrides: dict) -> dict:
    out = copy.deepcopy(DEFAULT_TRIALS)
    for suite, counts in (overrides or {}).items():
        out.setdefault(suite, {}).update(counts)
    return out


@dataclass
class Scenario:
    n: int = 2
    backend: str = sc.EXACT
    seed: int = 1
    tolerance: float = 1e-9
    suites: tuple = SUITES
    trials: dict = field(default_factory=dict)
    bisector: dict | None = None
    negative_control: bool = False

    def __post_init__(self):
        self.suites = tuple(self.suites)
        self.trials = _merge_trials(self.trials)

    def count(self, suite: str, kind: str) -> int:
        return int(self.trials[suite][kind])

    def to_json(self) -> dict:
        return {"n": self.n, "backend": self.backend, "seed": self.seed,
                "tolerance": self.tolerance, "suites": list(self.suites),
                "trials": self.trials, "bisector": self.bisector,
                "negative_control": self.negative_control}

    @classmethod
    def from_json(cls, data) -> Scenario:
        validator = jsonschema.Draft202012Validator(load_schema("scenario.v1"))
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            e = errors[0]
            path = "/".join(str(p) for p in e.absolute_path) or "<root>"
            raise ScenarioError(path, e.message)
        data = dict(data)
        data.pop("schema", None)
        s = cls(**data)
        if s.bisector is not None:
            for key in ("p1", "p2"):
                coords = s.bisector[key]
                if len(coords) != s.n:
                    raise ScenarioError(f"bisector/{key}",
                                        f"expected {s.n} ball coordinates, got {len(coords)}")
                try:
                    BallPoint.from_json(coords)
                except (ValueError, ArithmeticError) as exc:
                    raise ScenarioError(f"bisector/{key}", str(exc)) from exc
        return s

    def replace(self, **changes) -> Scenario:
        data = self.to_json()
        data.update(changes)
        return Scenario(**data)


# -- trial outcomes ----------------------------------------------------------------

@dataclass(frozen=True)
class Outcome:
    check: str
    ok: bool
    residual: float | None = None
    witness: dict | None = None


def _ball_json(p) -> list | None:
    p = p if isinstance(p, ProjectivePoint) else ProjectivePoint(p)
    return p.to_ball().to_json() if p.is_negative else None


def _rel(lhs, rhs) -> float:
    return sc.relative_residual(lhs, rhs)


def _qres(a: Quaternion, b: Quaternion) -> float:
    d = (a - b).to_float()
    s = max(1.0, a.to_float().abs(), b.to_float().abs())
    return d.abs() / s


class Context:
    """Per-process fixtures for one scenario."""

    def __init__(self, scenario: Scenario):
        self.s = scenario
        self.backend = scenario.backend
        self._bisector = None
        self._center = None

    def rng(self, suite: str, kind: int, index: int):
        return make_rng(self.s.seed, _SUITE_KEY[suite], kind, index)

    @property
    def exact(self) -> bool:
        return self.backend == sc.EXACT

    @property
    def bisector(self) -> Bisector:
        if self._bisector is None:
            self._bisector = fixture_bisector(self.s)
        return self._bisector

    @property
    def center(self) -> ProjectivePoint:
        if self._center is None:
            rng = make_rng(self.s.seed, _FIXTURE_KEY, 1)
            self._center = sample_spine_point(self.bisector, rng)
        return self._center

    def member(self, B: Bisector, p) -> tuple[bool, float | None]:
        """Bisector membership; the negative control doubles the right-hand side."""
        if not self.s.negative_control:
            return B.contains(p), None if self.exact else B.residual(p)
        lhs, rhs = B.lhs_rhs(p)
        rhs = rhs * 2
        if self.exact:
            return lhs == rhs, None
        return sc.close(lhs, rhs), _rel(lhs, rhs)


def fixture_bisector(s: Scenario) -> Bisector:
    """The scenario's bisector: explicit ball points, or two seeded random points."""
    if s.bisector is not None:
        p1 = BallPoint.from_json(s.bisector["p1"], s.backend).lift()
        p2 = BallPoint.from_json(s.bisector["p2"], s.backend).lift()
        return Bisector(p1, p2)
    rng = make_rng(s.seed, _FIXTURE_KEY, 0)
    while True:
        p1 = random_ball_point(rng, s.n, s.backend)
        p2 = random_ball_point(rng, s.n, s.backend)
        if p1 != p2:
            return Bisector(p1, p2)


def running_example(backend: str = sc.EXACT) -> Bisector:
    """``B(ball(1/2, 0), ball(-1/2, 0))`` in the two-dimensional space."""
    half = sc.to_backend("1/2", backend)
    zero = sc.zero(backend)
    return Bisector(ball(half, zero), ball(-half, zero))


# -- quaternion suite ------------------------------------------------------------------

def _t_quaternion(ctx: Context, rng) -> list[Outcome]:
    be = ctx.backend
    a, b, c = (random_quaternion(rng, be) for _ in range(3))
    scale = max(1.0, sc.mag(a.norm2() * b.norm2() * c.norm2()))
    w = {"a": a.to_json(), "b": b.to_json(), "c": c.to_json()}
    out = []
    lhs, rhs = (a * b) * c, a * (b * c)
    out.append(Outcome("associativity", lhs.close(rhs, scale), None if ctx.exact else _qres(lhs, rhs), w))
    lhs, rhs = (a * (b + c)), a * b + a * c
    out.append(Outcome("distributivity", lhs.close(rhs, scale), None if ctx.exact else _qres(lhs, rhs), w))
    n1, n2 = (a * b).norm2(), a.norm2() * b.norm2()
    out.append(Outcome("norm_multiplicative", sc.close(n1, n2, scale), None if ctx.exact else _rel(n1, n2), w))
    lhs, rhs = (a * b).conj(), b.conj() * a.conj()
    out.append(Outcome("conj_anti_automorphism", lhs.close(rhs, scale), None if ctx.exact else _qres(lhs, rhs), w))
    out.append(Outcome("similar_to_conjugate", is_similar(a, a.conj()), None, w))
    # conjugate a by a random unit to get a similar b, then recover a witness
    u = cayley_unit(random_imaginary(rng, be))
    bb = u * a * u.inverse()
    lam = similarity_witness(a, bb)
    lhs = lam * bb * lam.inverse()
    out.append(Outcome("similarity_witness", not lam.is_zero(0.0) and lhs.close(a, scale),
                       None if ctx.exact else _qres(lhs, a), w))
    # centraliser of a non-real a is C(a)
    if not a.is_real():
        inside = Quaternion.scalar(random_scalar(rng, be), be) + a.imag * random_scalar(rng, be)
        ok = commutes(a, inside) and in_subfield(inside, a.imag, scale)
        ok = ok and commutes(a, c) == in_subfield(c, a.imag, scale)
        out.append(Outcome("centralizer", ok, None, w))
    return out


# -- linalg suite ------------------------------------------------------------------------

def _t_vectors(ctx: Context, rng) -> list[Outcome]:
    be, dim = ctx.backend, ctx.s.n + 1
    v, w = random_vector(rng, dim, be), random_vector(rng, dim, be)
    mu, lam = random_quaternion(rng, be), random_quaternion(rng, be)
    lhs = herm(v * mu, w * lam)
    rhs = mu.conj() * herm(v, w) * lam
    scale = max(1.0, sc.mag(v.euclid2() * w.euclid2() * mu.norm2() * lam.norm2()))
    wit = {"v": v.to_json(), "w": w.to_json()}
    out = [Outcome("sesquilinearity", lhs.close(rhs, scale), None if ctx.exact else _qres(lhs, rhs), wit),
           Outcome("hermitian_symmetry", herm(w, v).close(herm(v, w).conj(), scale), None, wit)]
    # projection onto the span of two random negative points (signature (1,1))
    p = random_ball_point(rng, ctx.s.n, be)
    q = random_ball_point(rng, ctx.s.n, be)
    if p != q:
        W = Subspace((p.lift, q.lift), FieldTag.quaternionic())
        sig = signature(W.gram())
        out.append(Outcome("signature_1_1", (sig.positive, sig.negative, sig.zero) == (1, 1, 0), None, wit))
        vw = orth_project(W, v)
        again = orth_project(W, vw)
        out.append(Outcome("projection_idempotent", again.close(vw, scale), None, wit))
        perp = v - vw
        split = norm(vw) + norm(perp)
        out.append(Outcome("pythagoras_split", sc.close(norm(v), split, scale),
                           None if ctx.exact else _rel(norm(v), split), wit))
        orth = all(herm(b, perp).is_zero(scale) for b in W.basis)
        out.append(Outcome("projection_orthogonal", orth, None, wit))
    return out


def _t_systems(ctx: Context, rng) -> list[Outcome]:
    be = ctx.backend
    size = int(rng.integers(1, 5))
    while True:
        A = QMatrix.from_columns([random_vector(rng, size, be) for _ in range(size)])
        c = random_vector(rng, size, be)
        try:
            lam = solve_right(A, c)
            break
        except RankDeficiencyError:
            continue
    back = A @ lam
    scale = max(1.0, A.max_abs2()) * max(1.0, sc.mag(lam.euclid2()))
    res = None if ctx.exact else max(_qres(x, y) for x, y in zip(back.coords, c.coords))
    return [Outcome("solve_right", back.close(c, scale ** 0.5), res, {"A": A.to_json(), "c": c.to_json()})]


# -- model suite -------------------------------------------------------------------------------

def h4_delta(x, y) -> float:
    """``cosh^2`` of half the real hyperbolic 4-ball distance, from the standard ball formula.

    In the unit ball model of real hyperbolic 4-space
    ``cosh d = 1 + 2|x - y|^2 / ((1 - |x|^2)(1 - |y|^2))``; the quaternionic
    line carries half that metric, and ``cosh^2(d/2) = (1 + cosh d) / 2``.
    """
    import numpy as np
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    cosh_d = 1.0 + 2.0 * np.sum((x - y) ** 2) / ((1.0 - np.sum(x * x)) * (1.0 - np.sum(y * y)))
    return float((1.0 + cosh_d) / 2.0)


def _random_disc_quaternion(rng, radius: float = 0.9) -> Quaternion:
    while True:
        v = rng.uniform(-radius, radius, size=4)
        if float(v @ v) <= radius * radius:
            return Quaternion(*(float(c) for c in v))


def _t_pairs(ctx: Context, rng) -> list[Outcome]:
    be, n = ctx.backend, ctx.s.n
    p, q = random_ball_point(rng, n, be), random_ball_point(rng, n, be)
    lam = random_quaternion(rng, be, nonzero=True)
    d1, d2 = delta(p, q), delta(p.lift * lam, q.lift)
    wit = {"p": _ball_json(p), "q": _ball_json(q)}
    out = [Outcome("delta_scale_invariance", sc.close(d1, d2), None if ctx.exact else _rel(d1, d2), wit),
           Outcome("delta_at_least_one", d1 >= 1 or sc.close(d1, 1), None, wit),
           Outcome("ball_round_trip", ProjectivePoint(p.to_ball().lift().lift) == p, None, wit)]
    if p != q:
        B = Bisector(p, q)
        o = B.center()
        e1, e2 = delta(o, p), delta(o, q)
        out.append(Outcome("center_equidistant", sc.close(e1, e2), None if ctx.exact else _rel(e1, e2), wit))
        # unit speed of the arc-length parametrisation, on floats
        g = geodesic_through(p.to_float(), q.to_float())
        s, t = rng.uniform(-3.0, 3.0, size=2)
        if abs(s - t) > 0.1:
            d = dist(g.point_at(float(s)), g.point_at(float(t)))
            r = abs(d - abs(s - t)) / max(1.0, abs(s - t))
            out.append(Outcome("unit_speed", r <= max(ctx.s.tolerance, 1e-9), r, wit))
    return out


def _t_h4(ctx: Context, rng) -> list[Outcome]:
    z, w = _random_disc_quaternion(rng), _random_disc_quaternion(rng)
    zero = Quaternion.scalar(0.0, sc.FLOAT)
    rest = [zero] * (ctx.s.n - 1)
    d = float(delta(ball(z, *rest), ball(w, *rest)))
    ref = h4_delta(z.coeffs, w.coeffs)
    r = abs(d - ref) / max(1.0, abs(ref))
    return [Outcome("h4_cross_check", r <= 1e-12, r, {"z": z.to_json(), "w": w.to_json()})]


# -- isometry suite -----------------------------------------------------------------------------

def _random_isometry(ctx: Context, rng) -> Isometry:
    """An isometry sending one random point to another, composed with a left multiplication."""
    be, n = ctx.backend, ctx.s.n
    P = random_ball_point(rng, n, be).lift
    Q = random_ball_point(rng, n, be).lift
    Q = Q * (quaternion_with_norm2(norm(P) / norm(Q)) if ctx.exact
             else math.sqrt(norm(P) / norm(Q)))
    g = frame_transport([P], [Q])
    u = cayley_unit(random_imaginary(rng, be))
    return left_mult(u, n + 1) @ g


def _condition(g: Isometry, *points) -> float:
    """Float error amplification of ``delta(g p, g q)``.

    Squared entry size of ``g`` times ``|P|^2 / |<P,P>|``, which grows near
    the boundary.
    """
    kappa = max(float(p.lift.euclid2()) / abs(float(norm(p.lift))) for p in points)
    return max(1.0, float(g.matrix.max_abs2())) * max(1.0, kappa)


def _t_maps(ctx: Context, rng) -> list[Outcome]:
    be, n = ctx.backend, ctx.s.n
    g, h = _random_isometry(ctx, rng), _random_isometry(ctx, rng)
    p, q = random_ball_point(rng, n, be), random_ball_point(rng, n, be)
    d0 = delta(p, q)
    d1 = delta(g.apply(p), g.apply(q))
    wit = {"p": _ball_json(p), "q": _ball_json(q)}
    out = [Outcome("verify", g.verify(), None, wit),
           Outcome("delta_preserved",
                   sc.close(d0, d1) if ctx.exact else _rel(d0, d1) <= ctx.s.tolerance * _condition(g, p, q),
                   None if ctx.exact else _rel(d0, d1), wit),
           Outcome("group_closure", (g @ h).verify() and g.inverse().verify()
                   and (g @ g.inverse()).projectively_equal(
                       Isometry.identity(n + 1, be), max(1.0, float(g.matrix.max_abs2()))),
                   None, wit)]
    # fixed set of a left multiplication is the matching complex-type submanifold
    a = cayley_unit(random_imaginary(rng, be, nonzero=True))
    L = left_mult(a, n + 1)
    inside = HVector([Quaternion.scalar(random_scalar(rng, be, 1), be) / 4 + a.imag * (
        random_scalar(rng, be, 1) / 4) for _ in range(n)] + [Quaternion.scalar(1, be)])
    outside = random_ball_point(rng, n, be)
    in_ca = all(in_subfield(x * outside.canonical[-1].inverse(), a.imag) for x in outside.canonical.coords)
    ok = L.act(ProjectivePoint(inside)) == ProjectivePoint(inside)
    ok = ok and (L.act(outside) == outside) == in_ca
    out.append(Outcome("left_mult_fixed_set", ok, None, wit))
    return out


# -- mostow suite ------------------------------------------------------------------------

def _t_spine(ctx: Context, rng) -> list[Outcome]:
    B = ctx.bisector
    s = sample_spine_point(B, rng)
    ok, res = ctx.member(B, s)
    out = [Outcome("spine_in_bisector", ok and B.spine.contains(s), res, {"s": _ball_json(s)})]
    sl = B.slice_at(s)
    for _ in range(ctx.s.count("mostow", "fiber")):
        x = sample_slice_point(sl, rng)
        ok, res = ctx.member(B, x)
        out.append(Outcome("slice_in_bisector", ok, res, {"s": _ball_json(s), "x": _ball_json(x)}))
    return out


def _t_projection(ctx: Context, rng) -> list[Outcome]:
    B = ctx.bisector
    p = sample_bisector_point(B, rng)
    ok, res = ctx.member(B, p)
    s = B.project_to_spine(p)
    ok2, res2 = ctx.member(B, s)
    ok2 = ok2 and B.spine.contains(s)
    res = None if res is None else max(res, res2)
    return [Outcome("projection_onto_real_spine", ok and ok2, res, {"p": _ball_json(p)})]


def _random_spine_point(B: Bisector, rng) -> ProjectivePoint:
    """A random point of the quaternionic spine (not only the real spine)."""
    be = B.backend
    while True:
        X = B.P1 * random_quaternion(rng, be, nonzero=True) + B.P2 * random_quaternion(rng, be)
        if not X.is_zero(0.0) and sc.sign(norm(X), sc.mag(X.euclid2())) < 0:
            return ProjectivePoint(X)


def _t_triple(ctx: Context, rng) -> list[Outcome]:
    B = ctx.bisector
    p = random_ball_point(rng, ctx.s.n, ctx.backend)
    q = B.project_to_spine(p)
    r = _random_spine_point(B, rng)
    h = hermitian_triple(p, q, r)
    scale = max(1.0, sc.mag(h.norm2()) ** 0.5)
    wit = {"p": _ball_json(p), "r": _ball_json(r)}
    res = None if ctx.exact else h.imag.to_float().abs() / scale
    out = [Outcome("triple_real", h.is_real(scale), res, wit)]
    if p != q and q != r and p != r:
        out.append(Outcome("totally_real_plane", is_totally_real_triple(p, q, r), None, wit))
    return out


def _t_pythagoras(ctx: Context, rng) -> list[Outcome]:
    B = ctx.bisector
    p = random_ball_point(rng, ctx.s.n, ctx.backend)
    r = _random_spine_point(B, rng)
    lhs, rhs = pythagoras(p, r, B)
    return [Outcome("pythagoras", sc.close(lhs, rhs), None if ctx.exact else _rel(lhs, rhs),
                    {"p": _ball_json(p), "r": _ball_json(r)})]


def _t_rebuild(ctx: Context, rng) -> list[Outcome]:
    be, n = ctx.backend, ctx.s.n
    while True:
        p1, p2 = random_ball_point(rng, n, be), random_ball_point(rng, n, be)
        if p1 != p2:
            break
    B = Bisector(p1, p2)
    o = sample_spine_point(B, rng)
    B2 = Bisector(*B.symmetric_pair(o))
    B3 = bisector_from_real_spine(B.spine_frame(o))
    wit = {"p1": _ball_json(p1), "p2": _ball_json(p2), "o": _ball_json(o)}
    out = [Outcome("same_quaternionic_spine",
                   same_span(B.spine.basis, B2.spine.basis) and same_span(B.spine.basis, B3.spine.basis),
                   None, wit),
           Outcome("same_bisector", same_bisector(B, B2) and same_bisector(B, B3), None, wit)]
    agree = True
    for _ in range(ctx.s.count("mostow", "rebuild_samples")):
        x = sample_spine_point(B, rng)
        y = sample_spine_point(B2, rng)
        z = _random_spine_point(B, rng)
        agree = agree and B2.real_spine_contains(x) and B.real_spine_contains(y)
        agree = agree and B.real_spine_contains(z) == B2.real_spine_contains(z)
    out.append(Outcome("real_spine_agreement", agree, None, wit))
    return out


# -- fan suite ---------------------------------------------------------------------------

def _t_fan_point(ctx: Context, rng) -> list[Outcome]:
    B, o = ctx.bisector, ctx.center
    p = sample_bisector_point(B, rng)
    wit = {"p": _ball_json(p), "o": _ball_json(o)}
    N = blade_containing(B, o, p)
    out = [Outcome("blade_through_p_and_o", N.contains(p) and N.contains(o), None, wit),
           Outcome("blade_certificate", blade_in_bisector(N, B), None, wit)]
    IN = N.reflection_N()
    q1, q2 = N.pair
    out.append(Outcome("reflection_swaps_pair", IN.apply(q1) == q2 and IN.apply(q2) == q1, None, wit))
    inside = True
    refl = True
    worst = 0.0
    for k in range(ctx.s.count("fan", "blade_samples")):
        x = N.sample(rng)
        ok, res = ctx.member(B, x)
        inside = inside and ok
        if res is not None:
            worst = max(worst, res)
        if k < ctx.s.count("fan", "reflection_samples"):
            # delta(x, q1) = delta(I_N x, I_N q1) = delta(x, q2), I_N fixing x
            x2 = IN.apply(x)
            d1, d2 = delta(x, q1), delta(x2, IN.apply(q1))
            refl = refl and x2 == x and sc.close(d1, d2) and sc.close(d2, delta(x, q2))
    out.append(Outcome("blade_samples_in_bisector", inside, None if ctx.exact else worst, wit))
    out.append(Outcome("reflection_distance_identity", refl, None, wit))
    return out


def _t_fan_pair(ctx: Context, rng) -> list[Outcome]:
    B, o = ctx.bisector, ctx.center
    p = sample_bisector_point(B, rng)
    rep = check_orthogonal_pair(blade_containing(B, o, p))
    wit = {"p": _ball_json(p), "o": _ball_json(o)}
    return [Outcome(f"pair_{name}", bool(getattr(rep, name)), None, wit)
            for name in ("symplectic", "involutions", "commute", "mutual_invariance",
                         "intersection", "orthogonal")]


def selector_blades(B: Bisector, o, rng):
    """Two blades through ``o`` from independent random selectors."""
    be, n = B.backend, B.dim
    blades = []
    for _ in range(2):
        w = random_imaginary(rng, be, nonzero=True, bound=4)
        params = [random_scalar(rng, be, 4) for _ in range(n - 1)]
        blades.append(fan_blade(B, o, m_selector=(w, None), meridian_selector=params))
    return blades


def blades_distinct(N1, N2) -> bool:
    """Different blades through a common centre: their tangent spaces differ there."""
    O = N1.S.basis[0]
    return intersection_dim(N1.N.subspace, N2.N.subspace, O) < tangent_dim(N1.N.subspace, O)


def _t_selector_pair(ctx: Context, rng) -> list[Outcome]:
    B, o = ctx.bisector, ctx.center
    N1, N2 = selector_blades(B, o, rng)
    wit = {"o": _ball_json(o)}
    dim = intersection_dim(N1.N.subspace, N2.N.subspace, N1.S.basis[0])
    wit["intersection_real_dim"] = dim
    return [Outcome("selector_blades_distinct", blades_distinct(N1, N2), None, wit),
            Outcome("selector_blades_share_center", N1.contains(o) and N2.contains(o), None, wit),
            Outcome("selector_blades_in_bisector",
                    blade_in_bisector(N1, B) and blade_in_bisector(N2, B), None, wit),
            # observation: the blades meet in a totally geodesic set of this dimension
            Outcome("observed_intersection_is_center", dim == 0, None, wit)]


def distinct_decomposition_witness(B: Bisector, o, rng):
    """``(A, A2, blade)`` with ``blade`` a blade of ``A`` that is not a blade of ``A2``."""
    A = FanDecomposition(B, o)
    for _ in range(100):
        o2 = sample_spine_point(B, rng)
        if o2 == o:
            continue
        A2 = FanDecomposition(B, o2)
        for blade in (A.blade(), *selector_blades(B, o, rng)):
            if distinct_decompositions(A, A2, blade):
                return A, A2, blade
    return None


def _t_decompositions(ctx: Context, rng) -> list[Outcome]:
    found = distinct_decomposition_witness(ctx.bisector, ctx.center, rng)
    wit = None
    if found:
        A, A2, _ = found
        wit = {"o": _ball_json(A.center), "o2": _ball_json(A2.center)}
    return [Outcome("two_distinct_decompositions", found is not None, None, wit)]


# -- starlike suite ------------------------------------------------------------------------

def _t_starlike(ctx: Context, rng) -> list[Outcome]:
    B = ctx.bisector
    o = sample_spine_point(B, rng)
    p = sample_bisector_point(B, rng)
    rep = starlike_check(B, o, p, ctx.s.count("starlike", "points"))
    wit = {"o": _ball_json(o), "p": _ball_json(p)}
    tol = max(ctx.s.tolerance, 1e-12)
    return [Outcome("blade_route_certificate", rep.exact and rep.blade_ok, None, wit),
            Outcome("float_segment_residual", rep.max_residual <= tol, rep.max_residual, wit)]


# -- registry -------------------------------------------------------------------------------

TrialFn = Callable[[Context, object], list]

# (suite, trial kind) -> (stream key, trial function); the count comes from the scenario
KINDS: dict[str, list[tuple[str, int, TrialFn]]] = {
    "quaternion": [("triples", 1, _t_quaternion)],
    "linalg": [("vectors", 1, _t_vectors), ("systems", 2, _t_systems)],
    "model": [("pairs", 1, _t_pairs), ("h4_pairs", 2, _t_h4)],
    "isometry": [("maps", 1, _t_maps)],
    "mostow": [("spine", 1, _t_spine), ("bisector", 2, _t_projection), ("triple", 3, _t_triple),
               ("pythagoras", 4, _t_pythagoras), ("rebuild", 5, _t_rebuild)],
    "fan": [("points", 1, _t_fan_point), ("pairs", 2, _t_fan_pair),
            ("selector_pairs", 3, _t_selector_pair), ("decompositions", 4, _t_decompositions)],
    "starlike": [("pairs", 1, _t_starlike)],
}

# checks that are reported but do not decide PASS/FAIL
OBSERVATIONS = {"observed_intersection_is_center"}


def _count(s: Scenario, suite: str, kind: str) -> int:
    if suite == "fan" and kind == "decompositions":
        return 1 if s.count("fan", "points") > 0 else 0
    return s.count(suite, kind)


@lru_cache(maxsize=8)
def _context(scenario_text: str) -> Context:
    s = Scenario(**json.loads(scenario_text))
    sc.set_tolerance(s.tolerance)
    return Context(s)


def _run_chunk(scenario_text: str, suite: str, kind_index: int, start: int, stop: int) -> list:
    """Outcomes of trials ``start .. stop-1`` of one trial kind (runs in a worker)."""
    ctx = _context(scenario_text)
    name, key, fn = KINDS[suite][kind_index]
    rows = []
    for i in range(start, stop):
        try:
            outcomes = fn(ctx, ctx.rng(suite, key, i))
        except (ArithmeticError, ValueError) as exc:
            outcomes = [Outcome(f"{name}_raised", False, None, {"error": f"{type(exc).__name__}: {exc}"})]
        rows.append((i, outcomes))
    return rows


def thread_count() -> int:
    """Worker processes: ``QBISECT_THREADS`` caps the CPU count."""
    cpus = os.cpu_count() or 1
    cap = os.environ.get("QBISECT_THREADS")
    if cap:
        try:
            return max(1, min(cpus, int(cap)))
        except ValueError:
            warnings.warn(f"ignoring non-integer QBISECT_THREADS={cap!r}")
    return cpus


# -- reports ---------------------------------------------------------------------------------

@dataclass
class CheckStats:
    name: str
    passed: int = 0
    failed: int = 0
    max_residual: float | None = None

    def add(self, o: Outcome):
        if o.ok:
            self.passed += 1
        else:
            self.failed += 1
        if o.residual is not None and not math.isnan(o.residual):
            self.max_residual = o.residual if self.max_residual is None else max(self.max_residual, o.residual)

    def to_json(self, backend: str) -> dict:
        d = {"name": self.name, "passed": self.passed, "failed": self.failed}
        if backend == sc.FLOAT:
            d["max_residual"] = self.max_residual
        return d


@dataclass
class SuiteResult:
    name: str
    checks: dict = field(default_factory=dict)
    observations: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.checks.values())

    @property
    def failed(self) -> int:
        return sum(c.failed for c in self.checks.values())

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_json(self, backend: str) -> dict:
        d = {"name": self.name, "status": "PASS" if self.ok else "FAIL",
             "passed": self.passed, "failed": self.failed,
             "checks": [c.to_json(backend) for c in self.checks.values()],
             "violations": self.violations[:MAX_LISTED_VIOLATIONS],
             "violations_total": len(self.violations),
             "observations": {k: v.to_json(backend) for k, v in self.observations.items()},
             "warnings": self.warnings}
        if backend == sc.FLOAT:
            res = [c.max_residual for c in self.checks.values() if c.max_residual is not None]
            d["max_residual"] = max(res) if res else None
        return d


@dataclass
class Report:
    scenario: Scenario
    suites: list

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.suites)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def versions(self) -> dict:
        import gmpy2
        import numpy
        return {"qbisect": __version__, "numpy": numpy.__version__, "gmpy2": gmpy2.version()}

    def to_json(self, timing: bool = False) -> dict:
        """Report document; wall times only when ``timing`` (they break byte identity)."""
        d = {"schema": "qbisect/report/v1", "versions": self.versions(),
             "scenario": self.scenario.to_json(), "seed": self.scenario.seed,
             "status": "PASS" if self.ok else "FAIL",
             "suites": [s.to_json(self.scenario.backend) for s in self.suites]}
        if timing:
            d["wall_time"] = {s.name: round(s.wall_time, 3) for s in self.suites}
        return d

    def canonical(self) -> str:
        return canonical_json(self.to_json())

    def summary_lines(self) -> list[str]:
        lines = []
        for s in self.suites:
            status = "PASS" if s.ok else "FAIL"
            lines.append(f"{s.name:<10} {status}  passed={s.passed} failed={s.failed}"
                         f"  ({s.wall_time:.2f}s)")
            for w in s.warnings:
                lines.append(f"{'':<10} warning: {w}")
        lines.append(f"overall    {'PASS' if self.ok else 'FAIL'}")
        return lines


def _chunks(total: int, workers: int) -> list[tuple[int, int]]:
    if total <= 0:
        return []
    size = max(1, math.ceil(total / max(1, workers * 4)))
    return [(a, min(total, a + size)) for a in range(0, total, size)]


def run_suite(s: Scenario, suite: str, pool=None) -> SuiteResult:
    import time
    if suite not in KINDS:
        raise ScenarioError("suites", f"unknown suite {suite!r}")
    started = time.perf_counter()
    text = canonical_json(s.to_json())
    result = SuiteResult(suite)
    workers = getattr(pool, "_max_workers", 1) if pool is not None else 1
    total_trials = 0
    for k, (kind, _key, _fn) in enumerate(KINDS[suite]):
        total = _count(s, suite, kind)
        total_trials += total
        tasks = _chunks(total, workers)
        if pool is not None and len(tasks) > 1:
            futures = [pool.submit(_run_chunk, text, suite, k, a, b) for a, b in tasks]
            rows = [r for f in futures for r in f.result()]
        else:
            with sc.tolerance_context(s.tolerance):
                rows = [r for a, b in tasks for r in _run_chunk(text, suite, k, a, b)]
        rows.sort(key=lambda r: r[0])
        for index, outcomes in rows:
            for o in outcomes:
                bucket = result.observations if o.check in OBSERVATIONS else result.checks
                bucket.setdefault(o.check, CheckStats(o.check)).add(o)
                if not o.ok and o.check not in OBSERVATIONS:
                    result.violations.append({"check": o.check, "kind": kind, "trial": index,
                                              "witness": o.witness})
    if total_trials == 0:
        result.warnings.append("no trials requested: vacuous PASS")
    result.wall_time = time.perf_counter() - started
    return result


def run(s: Scenario, threads: int | None = None) -> Report:
    """Run the scenario's suites in the fixed suite order."""
    threads = thread_count() if threads is None else threads
    for name in s.suites:
        if name not in KINDS:
            raise ScenarioError("suites", f"unknown suite {name!r}")
    order = [name for name in SUITES if name in s.suites]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = [run_suite(s, name, pool) for name in order]
    else:
        results = [run_suite(s, name) for name in order]
    return Report(s, results)


# -- point clouds ---------------------------------------------------------------------------

SAMPLE_KINDS = ("bisector", "spine", "slice", "blade")


def sample(s: Scenario, what: str, count: int = 20) -> dict:
    """Seeded ball-model points of one kind with their membership residuals."""
    if what not in SAMPLE_KINDS:
        raise ScenarioError("what", f"expected one of {', '.join(SAMPLE_KINDS)}")
    with sc.tolerance_context(s.tolerance):
        B = fixture_bisector(s)
        rng = make_rng(s.seed, _FIXTURE_KEY, 2, SAMPLE_KINDS.index(what))
        extra: dict = {}
        if what == "bisector":
            pts = [sample_bisector_point(B, rng) for _ in range(count)]
        elif what == "spine":
            pts = [sample_spine_point(B, rng) for _ in range(count)]
        elif what == "slice":
            base = sample_spine_point(B, rng)
            sl = B.slice_at(base)
            pts = [sample_slice_point(sl, rng) for _ in range(count)]
            extra["slice_base"] = _ball_json(base)
        else:
            o = sample_spine_point(B, rng)
            N = fan_blade(B, o)
            pts = [N.sample(rng) for _ in range(count)]
            extra["center"] = _ball_json(o)
        rows = []
        for p in pts:
            row = {"ball": _ball_json(p), "member": B.contains(p),
                   "residual": B.residual(p)}
            if what == "slice":
                row["projection"] = _ball_json(B.project_to_spine(p))
            if what == "blade":
                row["in_blade"] = N.contains(p)
            rows.append(row)
    doc = {"schema": "qbisect/samples/v1", "what": what, "seed": s.seed, "n": B.dim,
           "backend": s.backend,
           "bisector": {"p1": _ball_json(B.p1), "p2": _ball_json(B.p2)},
           "points": rows}
    doc.update(extra)
    return doc


# -- fan enumeration ------------------------------------------------------------------------

_FAN_KEY = 60


@dataclass
class FanConfig:
    n: int = 2
    seed: int = 1
    backend: str = sc.EXACT
    center: object = "midpoint"
    selectors: int = 3
    trials: int = 20
    bisector: dict | None = None

    @classmethod
    def from_json(cls, data) -> FanConfig:
        validator = jsonschema.Draft202012Validator(load_schema("fan_config.v1"))
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            e = errors[0]
            raise ScenarioError("/".join(str(p) for p in e.absolute_path) or "<root>", e.message)
        data = dict(data)
        data.pop("schema", None)
        return cls(**data)

    def scenario(self) -> Scenario:
        return Scenario(n=self.n, seed=self.seed, backend=self.backend, bisector=self.bisector)


def fan_report(cfg: FanConfig) -> dict:
    """Blades of one fan decomposition with exact (or residual) membership per blade.

    Selector 0 is the default blade; the others draw a random imaginary
    ``M``-selector and meridian parameters from the seed.
    """
    s = cfg.scenario()
    with sc.tolerance_context(s.tolerance):
        B = fixture_bisector(s)
        if cfg.center == "midpoint":
            o = B.center()
        else:
            try:
                mu = Quaternion.from_json(cfg.center["mu"], s.backend)
                nu = Quaternion.from_json(cfg.center["nu"], s.backend)
                o = B.spine_point(mu, nu)
            except (ValueError, ArithmeticError) as exc:
                raise ScenarioError("center", str(exc)) from exc
        fan = FanDecomposition(B, o)
        rows = []
        blades = []
        for i in range(cfg.selectors):
            rng = make_rng(s.seed, _FAN_KEY, 1, i)
            if i == 0:
                w, params = None, None
                blade = fan.blade()
            else:
                w = random_imaginary(rng, s.backend, nonzero=True, bound=4)
                params = [random_scalar(rng, s.backend, 4) for _ in range(B.dim - 1)]
                blade = fan.blade((w, None), params)
            blades.append(blade)
            worst, inside = 0.0, 0
            for _ in range(cfg.trials):
                x = blade.sample(rng)
                inside += bool(B.contains(x))
                worst = max(worst, B.residual(x))
            row = {"index": i,
                   "selector": {"w": w.to_json() if w is not None else None,
                                "meridian": [sc.fmt(t) for t in params] if params else None},
                   "a": blade.a.to_json(), "b": blade.b.to_json(),
                   "contains_center": blade.contains(o),
                   "samples": cfg.trials, "samples_in_bisector": inside,
                   "max_residual": worst}
            if s.backend == sc.EXACT:
                row["certificate"] = blade_in_bisector(blade, B)
            row["ok"] = (row["contains_center"] and inside == cfg.trials
                         and row.get("certificate", True))
            rows.append(row)
        O = blades[0].S.basis[0]
        meets = [{"blades": [i, j],
                  "intersection_real_dim": intersection_dim(blades[i].N.subspace,
                                                            blades[j].N.subspace, O),
                  "distinct": blades_distinct(blades[i], blades[j])}
                 for i in range(len(blades)) for j in range(i + 1, len(blades))]
    return {"schema": "qbisect/fan-report/v1", "n": B.dim, "seed": s.seed, "backend": s.backend,
            "bisector": {"p1": _ball_json(B.p1), "p2": _ball_json(B.p2)},
            "center": _ball_json(o), "blades": rows, "intersections": meets,
            "status": "PASS" if all(r["ok"] for r in rows) else "FAIL"}


__all__ = [
    "DEFAULT_TRIALS", "FanConfig", "KINDS", "OBSERVATIONS", "Outcome", "Report", "SAMPLE_KINDS", "SUITES",
    "Scenario", "ScenarioError", "SuiteResult", "blades_distinct", "canonical_json",
    "distinct_decomposition_witness", "fan_report", "fixture_bisector", "h4_delta", "load_schema", "run",
    "run_suite", "running_example", "sample", "selector_blades", "thread_count",
]
