"""Exact certificates for the slice decomposition and for fan blades.

A certificate lists operands as rational quaternions together with the
identities they satisfy. ``check`` re-verifies every identity with its own
small ``fractions.Fraction`` quaternion arithmetic, so acceptance does not
rest on the code that produced the transcript.

Identities per entry (``f(X) = |<X,P1>|^2 - |<X,P2>|^2`` with equal norms):

* ``slice_point`` / ``bisector_point``: ``X`` negative, ``f(X) = 0``;
  ``S = P1 alpha + P2 beta`` negative with ``f(S) = 0``; ``X - S`` orthogonal
  to ``P1`` and ``P2``. So ``X`` lies on the bisector and projects to ``S``
  on the real spine.
* ``blade``: for the generators ``S_r`` and ``S_r b`` of a blade, the polar
  form ``Re(<X,P1><P1,Y> - <X,P2><P2,Y>)`` vanishes on every pair, so every
  real combination (the whole blade) satisfies ``f = 0``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import jsonschema

from . import __version__
from . import scalar as sc
from .bisector import Bisector, sample_bisector_point, sample_slice_point, sample_spine_point
from .fan import blade_containing
from .harness import Scenario, canonical_json, fixture_bisector, load_schema
from .qlinalg import FieldTag, Subspace, orth_project
from .sampling import make_rng

SCHEMA_ID = "qbisect/certificate/v1"
_CERT_KEY = 50


class CertificateError(ValueError):
    pass


def _qjson(qv) -> list:
    return qv.to_json()


def _entry_point(kind: str, B: Bisector, X) -> dict:
    sub = Subspace((B.P1, B.P2), FieldTag.quaternionic())
    S = orth_project(sub, X)
    alpha, beta = sub.coordinates(S)
    return {"kind": kind, "X": X.to_json(), "alpha": _qjson(alpha), "beta": _qjson(beta),
            "residual": sc.fmt(B.quadric(X))}


def certify(s: Scenario) -> dict:
    """Certificate for the scenario's bisector (exact backend only)."""
    if s.backend != sc.EXACT:
        raise CertificateError("certificates need the exact backend")
    B = fixture_bisector(s)
    entries = []
    for i in range(s.count("certify", "points")):
        rng = make_rng(s.seed, _CERT_KEY, 1, i)
        base = sample_spine_point(B, rng)
        x = sample_slice_point(B.slice_at(base), rng)
        entries.append(_entry_point("slice_point", B, x.lift))
    for i in range(s.count("certify", "points")):
        rng = make_rng(s.seed, _CERT_KEY, 2, i)
        entries.append(_entry_point("bisector_point", B, sample_bisector_point(B, rng).lift))
    if s.count("certify", "blades"):
        o = sample_spine_point(B, make_rng(s.seed, _CERT_KEY, 3))
        for i in range(s.count("certify", "blades")):
            rng = make_rng(s.seed, _CERT_KEY, 4, i)
            N = blade_containing(B, o, sample_bisector_point(B, rng))
            entries.append({"kind": "blade", "frame": [v.to_json() for v in N.S.basis],
                            "b": _qjson(N.b), "residual": "0"})
    for e in entries:
        if e["residual"] != "0":
            raise CertificateError(f"non-zero residual while certifying: {e['residual']}")
    body = {
        "scenario": s.to_json(),
        "versions": {"qbisect": __version__},
        "bisector": {"p1": B.p1.to_ball().to_json(), "p2": B.p2.to_ball().to_json(),
                     "P1": B.P1.to_json(), "P2": B.P2.to_json(),
                     "scale1": _qjson(B.P1[-1]), "scale2": _qjson(B.P2[-1])},
        "entries": entries,
    }
    return {"schema": SCHEMA_ID, "body": body, "digest": digest(body)}


def digest(body: dict) -> str:
    return hashlib.sha256(canonical_json(body).encode("ascii")).hexdigest()


def dumps(cert: dict) -> str:
    """Byte form written to disk: canonical JSON plus a newline."""
    return canonical_json(cert) + "\n"


# -- independent checker ---------------------------------------------------------

def _fq(data) -> tuple:
    return tuple(Fraction(str(c)) for c in data)


def _fv(data) -> list:
    return [_fq(c) for c in data]


def _mul(a, b) -> tuple:
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0)


def _conj(a) -> tuple:
    return (a[0], -a[1], -a[2], -a[3])


def _add(a, b) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def _abs2(a) -> Fraction:
    return sum(x * x for x in a)


_ZERO = (Fraction(0),) * 4


def _form(v, w) -> tuple:
    """``sum conj(v_i) w_i - conj(v_last) w_last``."""
    total = _ZERO
    for k, (x, y) in enumerate(zip(v, w)):
        term = _mul(_conj(x), y)
        total = _sub(total, term) if k == len(v) - 1 else _add(total, term)
    return total


def _scale(v, lam) -> list:
    return [_mul(x, lam) for x in v]


@dataclass
class CheckResult:
    ok: bool
    checked: int = 0
    errors: list = field(default_factory=list)


def _f(X, P1, P2) -> Fraction:
    return _abs2(_form(X, P1)) - _abs2(_form(X, P2))


def _polar(X, Y, P1, P2) -> Fraction:
    return _mul(_form(X, P1), _form(P1, Y))[0] - _mul(_form(X, P2), _form(P2, Y))[0]


def check(cert) -> CheckResult:
    """Re-verify a certificate document (parsed JSON, text or bytes)."""
    if isinstance(cert, (bytes, str)):
        try:
            cert = json.loads(cert)
        except (ValueError, UnicodeDecodeError) as exc:
            return CheckResult(False, 0, [f"not JSON: {exc}"])
    try:
        jsonschema.validate(cert, load_schema("certificate.v1"))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        return CheckResult(False, 0, [f"schema: {path}: {exc.message}"])
    body = cert["body"]
    if digest(body) != cert["digest"]:
        return CheckResult(False, 0, ["digest mismatch"])
    errors: list[str] = []
    bz = body["bisector"]
    P1, P2 = _fv(bz["P1"]), _fv(bz["P2"])
    one = (Fraction(1),) + (Fraction(0),) * 3
    for key, P, scale in (("p1", P1, bz["scale1"]), ("p2", P2, bz["scale2"])):
        lift = _fv(bz[key]) + [one]
        if len(lift) != len(P) or _scale(lift, _fq(scale)) != P:
            errors.append(f"bisector: {key.upper()} is not ({key}, 1) times its scale")
    n1, n2 = _form(P1, P1)[0], _form(P2, P2)[0]
    if n1 != n2 or not n1 < 0:
        errors.append("bisector: lifts do not have equal negative norms")
    if _abs2(_form(P1, P2)) == n1 * n2:
        errors.append("bisector: the two points coincide")
    checked = 0
    for idx, e in enumerate(body["entries"]):
        where = f"entry {idx} ({e['kind']})"
        if e["kind"] == "blade":
            frame = [_fv(v) for v in e["frame"]]
            b = _fq(e["b"])
            if b[0] != 0 or _abs2(b) == 0:
                errors.append(f"{where}: b is not a non-zero imaginary quaternion")
            if any(len(v) != len(P1) for v in frame):
                errors.append(f"{where}: dimension mismatch")
                continue
            gens = frame + [_scale(v, b) for v in frame]
            bad = [(i, j) for i in range(len(gens)) for j in range(i, len(gens))
                   if _polar(gens[i], gens[j], P1, P2) != 0]
            if bad:
                errors.append(f"{where}: polar form non-zero on generator pairs {bad[:3]}")
            if not _form(frame[0], frame[0])[0] < 0:
                errors.append(f"{where}: first frame vector is not negative")
        else:
            X = _fv(e["X"])
            if len(X) != len(P1):
                errors.append(f"{where}: dimension mismatch")
                continue
            S = [_add(a, b) for a, b in zip(_scale(P1, _fq(e["alpha"])), _scale(P2, _fq(e["beta"])))]
            D = [_sub(x, s) for x, s in zip(X, S)]
            if not _form(X, X)[0] < 0:
                errors.append(f"{where}: X is not a negative vector")
            if _f(X, P1, P2) != 0:
                errors.append(f"{where}: X is not on the bisector")
            if not _form(S, S)[0] < 0:
                errors.append(f"{where}: projection is not a negative vector")
            if _f(S, P1, P2) != 0:
                errors.append(f"{where}: projection is not on the real spine")
            if _form(P1, D) != _ZERO or _form(P2, D) != _ZERO:
                errors.append(f"{where}: X - S is not orthogonal to the spine")
        checked += 1
    return CheckResult(not errors, checked, errors)


__all__ = ["CertificateError", "CheckResult", "certify", "check", "digest", "dumps"]
