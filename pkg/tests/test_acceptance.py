"""Acceptance gate: every criterion at its stated size, tolerance and time budget.

Each test records one ``PASS``/``FAIL`` line, printed in the terminal summary
(and to stdout when run with ``-s``). Timings are single-process.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from qbisect import scalar as sc
from qbisect.bisector import hermitian_triple
from qbisect.certificate import certify, check, dumps
from qbisect.harness import Scenario, run, run_suite, running_example
from qbisect.model import ball
from qbisect.quaternion import J, K, Quaternion, is_similar
from qbisect.sampling import make_rng, random_quaternion

SEED = 1


def record(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def only(suite: str, counts: dict, n: int = 2, backend: str = sc.EXACT):
    """Run one suite with exactly the given trial kinds (every other kind of that suite at 0)."""
    from qbisect.harness import DEFAULT_TRIALS
    trials = {suite: {k: 0 for k in DEFAULT_TRIALS[suite]} | counts}
    s = Scenario(n=n, backend=backend, seed=SEED, suites=(suite,), trials=trials)
    start = time.perf_counter()
    result = run_suite(s, suite)
    return result, time.perf_counter() - start


def checks(result, *names) -> tuple[int, int]:
    c = [result.checks[n] for n in names]
    return sum(x.passed for x in c), sum(x.failed for x in c)


def test_criterion_01_quaternion_algebra():
    rng = make_rng(SEED, 1001)
    start = time.perf_counter()
    bad = 0
    for _ in range(10_000):
        a, b, c = (random_quaternion(rng) for _ in range(3))
        ok = (a * b) * c == a * (b * c)
        ok = ok and (a * b).norm2() == a.norm2() * b.norm2()
        ok = ok and (a * b).conj() == b.conj() * a.conj()
        ok = ok and is_similar(a, a.conj())
        bad += not ok
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 5
    record("1 quaternion algebra", ok, f"10^4 exact triples, {bad} violations, {elapsed:.2f}s < 5s")
    assert ok


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_02_mostow_decomposition(n):
    result, elapsed = only("mostow", {"spine": 1000, "fiber": 10, "bisector": 1000}, n=n)
    passed, failed = checks(result, "spine_in_bisector", "slice_in_bisector",
                            "projection_onto_real_spine")
    ok = failed == 0 and passed == 1000 + 10_000 + 1000 and elapsed < 60
    record(f"2 Mostow decomposition n={n}", ok,
           f"{passed} exact checks, {failed} violations, {elapsed:.1f}s < 60s")
    assert ok


def test_criterion_03_hermitian_triple():
    result, elapsed = only("mostow", {"triple": 1000})
    passed, failed = checks(result, "triple_real")
    p, r = ball(J * sc.exact("1/2"), K * sc.exact("1/2")), ball(sc.exact("1/2"), 0)
    value = hermitian_triple(p, running_example().project_to_spine(p), r)
    ok = failed == 0 and passed == 1000 and value == Quaternion(sc.exact("-51/64")) and elapsed < 5
    record("3 triple reality", ok,
           f"{passed} real triples, {failed} violations, instance = {value.re}, {elapsed:.2f}s < 5s")
    assert ok


def test_criterion_04_pythagoras():
    exact, t1 = only("mostow", {"pythagoras": 1000})
    flt, t2 = only("mostow", {"pythagoras": 1000}, backend=sc.FLOAT)
    pe, fe = checks(exact, "pythagoras")
    pf, ff = checks(flt, "pythagoras")
    worst = flt.checks["pythagoras"].max_residual
    ok = fe == 0 and pe == 1000 and ff == 0 and pf == 1000 and worst <= 1e-9 and t1 + t2 < 10
    record("4 Pythagorean identity", ok,
           f"exact {pe}/1000, float {pf}/1000 max residual {worst:.1e} <= 1e-9, "
           f"{t1 + t2:.2f}s < 10s")
    assert ok


def test_criterion_05_orthogonal_pairs():
    result, elapsed = only("fan", {"pairs": 100})
    names = [f"pair_{x}" for x in ("symplectic", "involutions", "commute", "mutual_invariance",
                                    "intersection", "orthogonal")]
    passed, failed = checks(result, *names)
    ok = failed == 0 and passed == 600 and elapsed < 30
    record("5 orthogonal blade pairs", ok,
           f"100 pairs x 6 conditions, {failed} violations, {elapsed:.1f}s < 30s")
    assert ok


@pytest.fixture(scope="module")
def fan_runs():
    counts = {"points": 200, "blade_samples": 100, "reflection_samples": 3,
              "selector_pairs": 20}
    return {n: only("fan", counts, n=n) for n in (2, 3)}


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_06_fan_decomposition(fan_runs, n):
    result, elapsed = fan_runs[n]
    passed, failed = checks(result, "blade_through_p_and_o", "blade_certificate",
                            "blade_samples_in_bisector", "reflection_swaps_pair",
                            "reflection_distance_identity")
    sp, sf = checks(result, "selector_blades_distinct", "selector_blades_share_center",
                    "selector_blades_in_bisector")
    dp, df = checks(result, "two_distinct_decompositions")
    ok = (failed == 0 and passed == 5 * 200 and sf == 0 and sp == 3 * 20 and dp == 1 and df == 0
          and elapsed < 120)
    record(f"6 fan decomposition n={n}", ok,
           f"200 points x 100 blade samples exact, 20 distinct selector pairs, "
           f"distinct decompositions exhibited, {elapsed:.1f}s < 120s")
    assert ok


@pytest.mark.xfail(strict=True, reason="two blades through o share at least a geodesic "
                   "(tangent dimensions 2n + 2n exceed 4n - 1)")
@pytest.mark.parametrize("n", [2, 3])
def test_criterion_06_selector_blades_meet_only_at_center(fan_runs, n):
    result, _ = fan_runs[n]
    obs = result.observations["observed_intersection_is_center"]
    ok = obs.failed == 0 and obs.passed == 20
    record(f"6 fan decomposition n={n}, blades meet only in {{o}}", ok,
           f"{obs.passed}/20 selector pairs meet only at the centre")
    assert ok


def test_criterion_07_starlike():
    result, elapsed = only("starlike", {"pairs": 100, "points": 20})
    passed, failed = checks(result, "blade_route_certificate", "float_segment_residual")
    worst = result.checks["float_segment_residual"].max_residual
    ok = failed == 0 and passed == 200 and worst <= 1e-9 and elapsed < 30
    record("7 starlikeness", ok,
           f"100 exact blade certificates, float residual {worst:.1e} <= 1e-9 at 20 points, "
           f"{elapsed:.1f}s < 30s")
    assert ok


def test_criterion_08_spine_uniqueness():
    result, elapsed = only("mostow", {"rebuild": 50, "rebuild_samples": 100})
    passed, failed = checks(result, "same_quaternionic_spine", "same_bisector",
                            "real_spine_agreement")
    ok = failed == 0 and passed == 150 and elapsed < 30
    record("8 spine uniqueness", ok, f"50 rebuilt bisectors x 100 samples, {failed} violations, "
           f"{elapsed:.1f}s < 30s")
    assert ok


def test_criterion_09_four_ball_cross_check():
    result, elapsed = only("model", {"h4_pairs": 1000}, n=1, backend=sc.FLOAT)
    passed, failed = checks(result, "h4_cross_check")
    worst = result.checks["h4_cross_check"].max_residual
    ok = failed == 0 and passed == 1000 and worst <= 1e-12 and elapsed < 5
    record("9 four-ball cross-check", ok,
           f"1000 pairs, max relative error {worst:.1e} <= 1e-12, {elapsed:.2f}s < 5s")
    assert ok


def test_criterion_10_determinism():
    s = Scenario(seed=SEED)
    first, second = run(s, threads=1), run(s, threads=2)
    c1, c2 = dumps(certify(s)), dumps(certify(s))
    same_report = first.canonical() == second.canonical()
    ok = same_report and c1 == c2 and first.ok and check(c1).ok
    record("10 determinism", ok, "full default suite twice (1 and 2 workers): byte-identical "
           f"report {same_report}, certificate {c1 == c2}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
