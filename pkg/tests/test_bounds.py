from __future__ import annotations

import csv
import io
import json
from dataclasses import replace
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from oracles import interval_thresholds
from partineq.asymptotics import main_term_q, summands_S
from partineq.bounds import (
    CSV_COLUMNS, REFERENCE_THRESHOLDS, compute_N, kappa, method_b, n3_function, n8_function,
    reports_csv, reports_json, threshold_N1, threshold_N2, threshold_N3, threshold_N4,
    threshold_N5, threshold_N6, threshold_N7, threshold_N8,
)
from partineq.constants import constant_bundle
from partineq.errors import DomainError
from partineq.params import BoundParams


@pytest.fixture(scope="module")
def even():
    p = BoundParams.for_d(8)
    return p, constant_bundle(8, p)


@pytest.fixture(scope="module")
def odd():
    p = BoundParams.for_d(9)
    return p, constant_bundle(9, p)


def _holds(i, d, b, n, p, bundle):
    S = summands_S(d, b, n, bundle, p)
    return S[i - 1] <= p.K(i) * main_term_q(d, n, bundle)


def test_reference_table_complete():
    assert sorted(REFERENCE_THRESHOLDS) == list(range(4, 62))
    assert REFERENCE_THRESHOLDS[8] == 577857
    assert REFERENCE_THRESHOLDS[10] == 314268
    assert REFERENCE_THRESHOLDS[6] == 2270342


def test_regression_d8(even):
    p, bundle = even
    r = compute_N(8, p, bundle)
    assert r.N == (2687, 308560, 4544, 478, 111, 5078, 1, 222036)
    assert r.N_Q == max(r.N[:3]) and r.N_q == max(r.N[3:]) and r.N_d == max(r.N_Q, r.N_q)
    assert r.argmax == 2
    assert r.conditional


def test_regression_other_d():
    assert compute_N(10).N[1] == 150152
    assert compute_N(6).N[2] == 9543


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5, 6, 8])
@pytest.mark.parametrize("d", [8, 9])
def test_defining_inequality_at_threshold_and_beyond(i, d):
    p = BoundParams.for_d(d)
    bundle = constant_bundle(d, p)
    r = compute_N(d, p, bundle)
    N = r.N[i - 1]
    for n in (N, 2 * N, 5 * N, 25 * N, 125 * N):
        assert _holds(i, d, r.b, n, p, bundle), (i, n)


@pytest.mark.parametrize("i", [1, 3, 8])
def test_threshold_is_tight(i, even):
    # these are exact rearrangements, so one below N fails (N2 bounds a power first)
    p, bundle = even
    N = compute_N(8, p, bundle).N[i - 1]
    assert N > 1
    assert not _holds(i, 8, 2, N - 1, p, bundle)


def test_N7_inequality(even):
    p, bundle = even
    p2 = replace(p, f_err_max=Fraction("0.002"))
    N = threshold_N7(8, p2.K(7), p2, bundle)
    assert N > 1
    assert _holds(7, 8, 2, N, p2, bundle)
    assert not _holds(7, 8, 2, N - 1, p2, bundle)


@pytest.mark.parametrize("fn", [threshold_N1, threshold_N3])
def test_nonincreasing_in_weight_Q_side(fn, even):
    _, bundle = even
    vals = []
    for K in (Fraction(1, 1600), Fraction(1, 800), Fraction(1, 400)):
        out = fn(8, 2, K, bundle)
        vals.append(getattr(out, "N", out))
    assert vals == sorted(vals, reverse=True)


def test_N2_nonincreasing(even):
    p, bundle = even
    vals = [threshold_N2(8, 2, K, bundle, p.delta) for K in (Fraction(1, 1600), Fraction(1, 800), Fraction(1, 2))]
    assert vals == sorted(vals, reverse=True)


@pytest.mark.parametrize("fn", [threshold_N4, threshold_N5, threshold_N6, threshold_N8])
def test_nonincreasing_in_weight_q_side(fn, even):
    p, bundle = even
    vals = []
    for K in (Fraction(1, 1600), Fraction(1, 800), Fraction(1, 400), Fraction(1, 4)):
        out = fn(8, K, p, bundle)
        vals.append(getattr(out, "N", out))
    assert vals == sorted(vals, reverse=True)


def test_N5_exponent_is_one_when_epsilon2_is_one(even):
    p, bundle = even
    assert p.epsilon2 == 1
    A = bundle.A_d
    direct = int(mpmath.ceil(A**2 / mpmath.log(1 + mpf(p.K(5).numerator) / p.K(5).denominator)))
    assert threshold_N5(8, p.K(5), p, bundle) == direct


def test_N7_edge_cases(even):
    p, bundle = even
    assert threshold_N7(8, p.K(7), replace(p, f_err_max=None), bundle) is None
    assert threshold_N7(8, p.K(7), replace(p, f_err_max=Fraction(0)), bundle) == 1
    too_big = Fraction(1, 100)  # K7^2 < f^2 A_d
    with pytest.raises(DomainError):
        threshold_N7(8, p.K(7), replace(p, f_err_max=too_big), bundle)
    Ns = [threshold_N7(8, p.K(7), replace(p, f_err_max=Fraction(f)), bundle)
          for f in ("1e-4", "1e-3", "2e-3")]
    assert Ns == sorted(Ns)


def test_unavailable_N7_marks_report_conditional():
    p = replace(BoundParams.for_d(8), f_err_max=None)
    r = compute_N(8, p)
    assert r.N[6] is None and r.conditional
    assert r.N_q == max(n for n in r.N[3:] if n is not None)


def test_root_bracket_has_sign_change(even):
    p, bundle = even
    r3 = threshold_N3(8, 2, p.K(3), bundle)
    h, _ = n3_function(8, p.K(3), bundle)
    lo, hi = r3.bracket
    assert h(mpmath.sqrt(lo)) < 0 <= h(mpmath.sqrt(hi))
    r8 = threshold_N8(8, p.K(8), p, bundle)
    g, _ = n8_function(8, p.K(8), p, bundle)
    lo, hi = r8.bracket
    assert g(mpmath.log(lo)) < 0 <= g(mpmath.log(hi))
    assert r8.minimum_at < r8.root


def test_N3_reduction_to_root_variable(even):
    # C u^(3/2) = exp(kappa u) has the same solutions as h(u) = 0
    p, bundle = even
    h, _ = n3_function(8, p.K(3), bundle)
    k = kappa(8, bundle.A_d)
    C = 2 * mpmath.sqrt(mpmath.pi * bundle.alpha**5 * (8 * bundle.alpha**7 + 1)) / (
        mpf(1) / 2 * bundle.A_d ** (mpf(1) / 4))
    for u in (mpf(3), mpf(10), mpf(40), mpf(70), mpf(200)):
        lhs = mpmath.log(C * u ** (mpf(3) / 2))
        assert abs((k * u - lhs) - h(u)) < mpf(10) ** -60


def test_roots_stable_under_doubled_precision(even):
    p, bundle = even
    p2 = p.with_precision(512)
    b2 = constant_bundle(8, p2)
    assert threshold_N3(8, 2, p.K(3), bundle).N == threshold_N3(8, 2, p2.K(3), b2).N
    assert threshold_N8(8, p.K(8), p, bundle).N == threshold_N8(8, p2.K(8), p2, b2).N


def test_interval_recomputation(even, odd):
    for d, (p, bundle) in ((8, even), (9, odd)):
        r = compute_N(d, p, bundle)
        ref = interval_thresholds(d, method_b(d), p, bundle)
        for name, idx in (("N1", 0), ("N2", 1), ("N4", 3), ("N5", 4), ("N6", 5)):
            lo, hi = ref[name]
            assert lo == hi == r.N[idx], name


def test_odd_d_uses_method_one(odd):
    p, bundle = odd
    r = compute_N(9, p, bundle)
    assert r.b == 1 and p.delta == Fraction(1, 80)


def test_domain():
    with pytest.raises(DomainError):
        compute_N(3)
    with pytest.raises(DomainError):
        compute_N(62)


def test_serialisation(even):
    p, bundle = even
    r = compute_N(8, p, bundle)
    data = json.loads(reports_json([r]))
    assert data[0]["N_d"] == r.N_d and data[0]["reference_N_d"] == 577857
    rows = list(csv.reader(io.StringIO(reports_csv([r]))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[1][0] == "8" and rows[1][-1] == "true"
    assert reports_json([r]) == reports_json([compute_N(8, p, bundle)])
