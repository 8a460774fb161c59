from __future__ import annotations

import json

import mpmath
import pytest
from mpmath import mp, mpf

from oracles import A_by_polylog, alpha_by_polyroots
from partineq.constants import (
    c2_candidates, compute_A, constant_bundle, eta_value, f1_error_factor, f2_error_factor,
    hurwitz_zeta_3_2_at_2, q_side_constants, Q_side_constants, solve_alpha,
    zeta_tail_integral_bound,
)
from partineq.errors import DomainError, HypothesisViolation
from partineq.params import BoundParams, to_mpf


def test_alpha_d2_golden_ratio():
    with mp.workprec(300):
        assert abs(solve_alpha(2) - (mpmath.sqrt(5) - 1) / 2) < mpf(2) ** -250


def test_alpha_d1():
    assert solve_alpha(1) == mpf(1) / 2


@pytest.mark.parametrize("d", [4, 7, 13, 61])
def test_alpha_against_polynomial_solver(d):
    a = solve_alpha(d)
    with mp.workprec(300):
        assert abs(a**d + a - 1) < mpf(10) ** -30
        assert abs(a - alpha_by_polyroots(d)) < mpf(10) ** -50


def test_A_classical_values():
    with mp.workprec(300):
        A1 = compute_A(1, mpf(1) / 2).value
        assert abs(A1 - mpmath.pi**2 / 12) < mpf(10) ** -70
        A2 = compute_A(2, solve_alpha(2)).value
        assert abs(A2 - mpmath.pi**2 / 15) < mpf(10) ** -70


@pytest.mark.parametrize("d", [3, 6, 20, 61])
def test_A_against_polylog(d):
    alpha = solve_alpha(d)
    A = compute_A(d, alpha)
    with mp.workprec(300):
        assert A.value > d * mpmath.log(alpha) ** 2 / 2
        assert abs(A.value - A_by_polylog(d, alpha)) < mpf(10) ** -55
        assert A.tail_bound < mpf(2) ** -256


def test_hurwitz_zeta_value():
    z = hurwitz_zeta_3_2_at_2()
    with mp.workprec(320):
        ref = mpmath.zeta(mpf(3) / 2) - 1
        assert abs(z.value - ref) < mpf(2) ** -250
        assert z.value < mpmath.zeta(mpf(3) / 2)
        assert abs(z.value - mpf("1.6123753486854883")) < mpf(10) ** -15
    assert z.tail_bound < mpf(2) ** -256
    assert zeta_tail_integral_bound(100) <= 2 / mpmath.sqrt(100)


@pytest.mark.parametrize("d", [6, 8, 11])
def test_bundle_positivity_and_residual(d):
    b = constant_bundle(d)
    for name in ("A_d", "F1", "F2", "c6", "c7", "c10", "gamma", "eta", "zeta_3_2_2"):
        assert getattr(b, name) > 0, name
    assert 0 < b.rho < 1
    assert abs(b.rho - (1 - b.alpha)) < mpf(2) ** -248
    assert abs(b.alpha**d + b.alpha - 1) <= mpf(2) ** (-256 + 4)
    assert b.c6 > 1
    if d % 2 == 0:
        for name in ("c2", "c3", "c4", "c5", "y_max"):
            assert getattr(b, name) > 0, name
    else:
        assert b.c2 is None and b.c3 is None


def test_gamma_closed_form():
    b = constant_bundle(8)
    with mp.workprec(320):
        X = b.alpha**5 * (8 * b.alpha**7 + 1)
        assert abs(b.gamma - 1 / (2 * mpmath.pi * mpmath.sqrt(X))) < mpf(2) ** -250


@pytest.mark.parametrize("d", [4, 6, 8, 10, 30, 60])
def test_c2_candidates_positive(d):
    cands = c2_candidates(d)
    assert len(cands) == 4
    assert all(c > 0 for c in cands)
    assert abs(constant_bundle(d).c2 / min(cands) - 1) < mpf(2) ** -250


def test_bound4_closed_form_d4():
    with mp.workprec(320):
        e = mpmath.e
        ref = 8 * mpmath.pi / ((e ** (7 * mpmath.pi) - 1) * ((e ** mpf(3.5) - 1) ** 2 + 4 * e ** mpf(3.5)))
        assert abs(c2_candidates(4)[3] / ref - 1) < mpf(10) ** -60


def test_c2_needs_even_d():
    with pytest.raises(DomainError):
        c2_candidates(7)
    with pytest.raises(DomainError):
        Q_side_constants(7, 2, BoundParams.for_d(7))


def test_y_max_conditions():
    b = constant_bundle(10)
    with mp.workprec(300):
        upper = (1 / (2 * mpmath.pi)) ** (1 / (b.beta_Q - 1))
        assert 0 < b.y_max <= upper
        assert b.c4 > 0 and b.c5 > 0


def test_eta_positive_for_tiny_beta():
    with mp.workprec(300):
        for beta in (mpf("1e-20"), mpf("1e-8"), mpf("0.01")):
            assert eta_value(beta, mpf("0.11")) > 0


def test_f1_f2_decrease_in_n():
    d = 6
    p = BoundParams.for_d(d)
    b = constant_bundle(d, p)
    with mp.workprec(300):
        eps, xi = to_mpf(p.epsilon), to_mpf(p.xi)
        for n in (1, 10, 100):
            x = mpmath.sqrt(b.A_d / n)
            assert f1_error_factor(x, b.rho, eps, b.zeta_3_2_2) <= b.F1 * (1 + mpf(2) ** -240)
            assert f2_error_factor(x, d, b.rho, eps, xi) <= b.F2 * (1 + mpf(2) ** -240)
        f1 = [f1_error_factor(mpmath.sqrt(b.A_d / n), b.rho, eps, b.zeta_3_2_2) for n in range(1, 60, 7)]
        f2 = [f2_error_factor(mpmath.sqrt(b.A_d / n), d, b.rho, eps, xi) for n in range(1, 60, 7)]
        assert f1 == sorted(f1, reverse=True)
        assert f2 == sorted(f2, reverse=True)


def test_beta_hypothesis_reported_and_strict_mode():
    b = constant_bundle(8)
    with mp.workprec(300):
        n = b.beta_hypothesis_min_n
        assert mpmath.sqrt(b.A_d / n) < b.beta_q
        assert mpmath.sqrt(b.A_d / (n - 1)) >= b.beta_q
    assert not b.beta_hypothesis_at_n1
    with pytest.raises(HypothesisViolation) as info:
        constant_bundle(8, strict=True)
    assert "beta_q" in info.value.constraint


def test_q_side_rejects_small_d():
    with pytest.raises(DomainError):
        q_side_constants(3, mpf("0.68"), mpf(1), BoundParams.for_d(3))
    with pytest.raises(DomainError):
        constant_bundle(3)


def test_bundle_json_is_deterministic():
    a, b = constant_bundle(12), constant_bundle(12)
    assert a.to_json() == b.to_json()
    assert a.digest() == b.digest()
    data = json.loads(a.to_json())
    assert data["precision_bits"] == 256 and data["d"] == 12
    assert mpf(data["A_d"]) == +a.A_d or abs(mpf(data["A_d"]) - a.A_d) < mpf(10) ** -70
