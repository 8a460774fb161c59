"""Exit criteria.  Each test records one PASS/FAIL line printed after the run."""

from __future__ import annotations

import contextlib
import time

import pytest
from mpmath import mpf

from conftest import ACCEPTANCE_LINES
from oracles import interval_thresholds
from partineq.asymptotics import R_bound, certify, exact_le, exact_within, main_term_Q, summands_S
from partineq.bounds import D_MAX, D_MIN, REFERENCE_THRESHOLDS, compute_N, method_b, threshold_N3, threshold_N8
from partineq.constants import constant_bundle
from partineq.exact import FamilyConfig, Kind, brute_force_count, count_congruence, count_distinct, delta
from partineq.params import BoundParams
from partineq.verify import Mode, SweepJob, predicted_negatives, run_sweep

pytestmark = pytest.mark.acceptance


@contextlib.contextmanager
def criterion(number: int, title: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        detail = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        ACCEPTANCE_LINES[number] = f"FAIL {number}. {title} ({time.perf_counter() - start:.1f}s): {detail}"
        raise
    ACCEPTANCE_LINES[number] = f"PASS {number}. {title} ({time.perf_counter() - start:.1f}s)"


def test_1_oracle_equivalence():
    with criterion(1, "DP counts equal brute-force enumeration, d<=12, n<=150"):
        n_max = 150
        for d in range(1, 13):
            for a in (1, 2):
                q = count_distinct(d, a, n_max).values
                cfg = FamilyConfig(d, a, False, Kind.DISTINCT)
                assert list(q) == [brute_force_count(n, cfg) for n in range(n_max + 1)], (d, a)
                for minus in (False, True):
                    cfg = FamilyConfig(d, a, minus)
                    Q = count_congruence(cfg, n_max).values
                    assert list(Q) == [brute_force_count(n, cfg) for n in range(n_max + 1)], (d, a, minus)


def test_2_classical_identities():
    with criterion(2, "Euler, Rogers-Ramanujan and Schur identities, n<=2000"):
        n_max = 2000
        assert all(x == 0 for x in delta(1, 1, False, n_max)), "d=1 a=1"
        assert all(x == 0 for x in delta(2, 1, False, n_max)), "d=2 a=1"
        assert all(x == 0 for x in delta(2, 2, False, n_max)), "d=2 a=2"
        assert all(x >= 0 for x in delta(3, 1, False, n_max)), "d=3 a=1"


def test_3_delta_sign_pattern():
    with criterion(3, "delta sign pattern for 6<=d<=21, n<=50000"):
        wrong = {}
        for d in range(6, 22):
            report = run_sweep(SweepJob(d, Mode.DELTA, 50_000))
            expected = predicted_negatives(d, Mode.DELTA)
            if report.negative_set != expected:
                wrong[d] = sorted(report.negative_set)
        assert not wrong, f"negative sets differ from prediction: {wrong}"


def test_4_delta_minus_nonnegative():
    with criterion(4, "delta-minus >= 0 for 6<=d<=61 and d in {1,3,4,5}, n<=20000"):
        bad = {}
        for d in [1, 3, 4, 5, *range(6, 62)]:
            report = run_sweep(SweepJob(d, Mode.DELTA_MINUS, 20_000))
            if report.negatives:
                bad[d] = sorted(report.negative_set)[:5]
        assert not bad, f"negatives found: {bad}"


def test_5_envelope_soundness():
    with criterion(5, "envelope and upper bound hold exactly, d in {6,8,10}, n up to 1e5"):
        ns = (10**3, 10**4, 10**5)
        for d in (6, 8, 10):
            params = BoundParams.for_d(d)
            bundle = constant_bundle(d, params)
            b = method_b(d)
            Q = count_congruence(FamilyConfig(d, 2), max(ns)).values
            Qb = Q if b == 2 else count_congruence(FamilyConfig(d, b), max(ns)).values
            for n in ns:
                bits = params.precision_bits
                assert exact_within(Q[n], main_term_Q(d, n), R_bound(d, n, bundle, params), bits), (d, n)
                S = summands_S(d, b, n, bundle, params)
                assert exact_le(Qb[n], S[0] + S[1] + S[2], bits), (d, n)


def test_6_certification():
    with criterion(6, "sum of summands <= main term at N, 2N, 10N for 4<=d<=61"):
        failed = []
        for d in range(D_MIN, D_MAX + 1):
            params = BoundParams.for_d(d)
            bundle = constant_bundle(d, params)
            N = compute_N(d, params, bundle).N_d
            pts = certify(d, [N, 2 * N, 10 * N], params, bundle)
            failed += [(d, pt.n) for pt in pts if not pt.holds]
        assert not failed, f"certification fails at {failed}"


def test_7_threshold_recomputation(capsys):
    with criterion(7, "N1,N2,N4,N5,N6 match interval recomputation; N3,N8 stable at 512 bits"):
        table = []
        for d in range(D_MIN, D_MAX + 1):
            params = BoundParams.for_d(d)
            bundle = constant_bundle(d, params)
            report = compute_N(d, params, bundle)
            ref = interval_thresholds(d, report.b, params, bundle)
            for name, idx in (("N1", 0), ("N2", 1), ("N4", 3), ("N5", 4), ("N6", 5)):
                lo, hi = ref[name]
                assert lo == hi == report.N[idx], (d, name, ref[name], report.N[idx])
            p2 = params.with_precision(512)
            b2 = constant_bundle(d, p2)
            assert threshold_N3(d, report.b, p2.K(3), b2).N == report.N[2], (d, "N3")
            assert threshold_N8(d, p2.K(8), p2, b2).N == report.N[7], (d, "N8")
            table.append((d, report.N_d, REFERENCE_THRESHOLDS[d], report.argmax))
        with capsys.disabled():
            print(f"\nN(d) against the reference values (diagnostic, f_err_max={params.f_err_max}):")
            for d, got, ref, arg in table:
                print(f"  d={d:2d} N={got:>12d} table={ref:>12d} ratio={got / ref:8.4f} argmax=N{arg}")


def test_8_precision_stability():
    with criterion(8, "constant bundles agree at 256 and 512 bits to 248 bits"):
        tol = mpf(2) ** -248
        for d in range(D_MIN, D_MAX + 1):
            lo = constant_bundle(d, BoundParams.for_d(d))
            hi = constant_bundle(d, BoundParams.for_d(d).with_precision(512))
            for (name, x), (_, y) in zip(lo.numeric_items(), hi.numeric_items()):
                if name == "A_tail_bound":
                    # a truncation certificate, not a constant: it shrinks with the precision
                    assert x < mpf(2) ** -256 and y < mpf(2) ** -512, (d, name)
                    continue
                if x is None:
                    assert y is None, (d, name)
                    continue
                assert abs(x - y) <= tol * abs(y), (d, name)
            assert lo.beta_hypothesis_min_n == hi.beta_hypothesis_min_n, d
