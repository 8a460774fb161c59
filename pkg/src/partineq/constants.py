"""Per-d transcendental constants for the asymptotic formulas and thresholds.

Everything is evaluated with mpmath at ``precision_bits + GUARD_BITS`` and
rounded to ``precision_bits`` on the way out.  Differences of nearly equal
quantities are rewritten (``1 - cos x = 2 sin^2(x/2)``, ``expm1``) so the
guard bits are not eaten by cancellation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from typing import NamedTuple

import mpmath
from mpmath import mp, mpf

from .errors import CertificationFailure, DomainError, HypothesisViolation
from .params import BoundParams, to_mpf

GUARD_BITS = 64


def _work(bits):
    return mp.workprec(bits + GUARD_BITS)


def _out(x, bits):
    if x is None:
        return None
    with mp.workprec(bits):
        return +x


def _one_minus_cos(x):
    return 2 * mpmath.sin(x / 2) ** 2


# -- growth constants of the d-distinct family ----------------------------------


def solve_alpha(d: int, precision_bits: int = 256):
    """Root of x^d + x - 1 on (0, 1), by bisection on a certified sign change."""
    if d < 1:
        raise DomainError("d must be >= 1")
    with _work(precision_bits):
        if d == 1:
            root = mpf(1) / 2
        else:
            lo, hi = mpf(0), mpf(1)
            tol = mpf(2) ** -(precision_bits + GUARD_BITS - 2)
            while hi - lo > tol:
                mid = (lo + hi) / 2
                if mid**d + mid - 1 < 0:
                    lo = mid
                else:
                    hi = mid
            root = (lo + hi) / 2
        root = _out(root, precision_bits)
        residual = abs(root**d + root - 1)
    if residual > mpf(2) ** (-precision_bits + 4):
        raise CertificationFailure(f"alpha residual {residual} too large for d={d}")
    return root


class SeriesValue(NamedTuple):
    value: object
    tail_bound: object
    terms: int


def compute_A(d: int, alpha, precision_bits: int = 256) -> SeriesValue:
    """``(d/2) log^2 alpha + Li2(alpha^d)``, the dilogarithm summed directly.

    The neglected tail after R terms is below rho^(R+1) / ((R+1)^2 (1-rho)).
    """
    with _work(precision_bits):
        alpha = mpf(alpha)
        rho = alpha**d
        target = mpf(2) ** -(precision_bits + GUARD_BITS)
        total = mpf(0)
        power = mpf(1)
        r = 0
        while True:
            r += 1
            power *= rho
            total += power / r**2
            tail = power * rho / ((r + 1) ** 2 * (1 - rho))
            if tail < target:
                break
        value = d * mpmath.log(alpha) ** 2 / 2 + total
    return SeriesValue(_out(value, precision_bits), _out(tail, precision_bits), r)


def zeta_tail_integral_bound(N: int):
    """Upper bound on sum_{n >= N} (n+2)^(-3/2) by comparison with an integral."""
    return 2 / mpmath.sqrt(N + 1)


def hurwitz_zeta_3_2_at_2(precision_bits: int = 256) -> SeriesValue:
    """zeta(3/2, 2) = sum_{n>=0} (n+2)^(-3/2) via Euler-Maclaurin.

    The first N terms are summed directly and the tail is replaced by its
    Euler-Maclaurin expansion at a = N+2.  For x^(-s) the remainder is bounded
    by the first omitted correction term, which is reported as ``tail_bound``.
    """
    with _work(precision_bits):
        s = mpf(3) / 2
        N = max(64, precision_bits // 4 + 16)
        head = mpmath.fsum(mpf(n + 2) ** -s for n in range(N))
        a = mpf(N + 2)
        total = head + a ** (1 - s) / (s - 1) + a**-s / 2
        target = mpf(2) ** -(precision_bits + GUARD_BITS)
        rising = s  # s (s+1) ... (s+2k-2)
        k = 1
        while True:
            term = mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * rising * a ** (-s - 2 * k + 1)
            rising *= (s + 2 * k - 1) * (s + 2 * k)
            nxt = mpmath.bernoulli(2 * k + 2) / mpmath.factorial(2 * k + 2) * rising * a ** (-s - 2 * k - 1)
            total += term
            if abs(nxt) < target:
                break
            k += 1
            if k > 4 * N:
                raise CertificationFailure("Euler-Maclaurin expansion did not converge")
    return SeriesValue(_out(total, precision_bits), _out(abs(nxt), precision_bits), N)


# -- q-side error factors ------------------------------------------------------


def f1_error_factor(x, rho, epsilon, zeta32):
    """Factor bounding the first q-side error term at x = sqrt(A_d / n)."""
    return (
        (1 + x ** (2 * epsilon)) ** (mpf(1) / 4)
        / mpmath.sqrt(2)
        * mpmath.pi ** (-mpf(3) / 2)
        * zeta32
        * (rho / (1 - rho))
        / (mpmath.pi / 2 - mpmath.atan(x**epsilon))
    )


def f2_error_factor(x, d, rho, epsilon, xi):
    """Factor bounding the second q-side error term at x = sqrt(A_d / n)."""
    pi = mpmath.pi
    x = abs(x)
    w = d * x * (1 + x ** (2 * epsilon))
    ratio = mpmath.exp(-4 * pi**2 * (1 - xi) / w) / -mpmath.expm1(-2 * pi**2 * (1 - xi) / w)
    first = mpmath.exp(d * x / 8) * (
        mpmath.expm1(d * x * mpmath.sqrt(1 + x ** (2 * epsilon)) / 8) + 2 * ratio
    )
    second = 2 * mpmath.exp(
        2 * pi * (abs(rho) - pi) / w - 2 * mpmath.log(rho) / d * x ** (epsilon - 1) + d * x / 8
    )
    return first + second


def beta_q_value(d, alpha, epsilon, xi):
    rho = 1 - alpha
    pi = mpmath.pi
    base = min(
        -pi * xi / mpmath.log(rho),
        2 * alpha ** (2 - d) / (pi * d),
        mpf(1) / (2 * d) + rho * (mpf(1) / 2 - pi**2 / 24),
    )
    return base ** (1 / epsilon)


def eta_value(beta, epsilon):
    """Exponent rate of the I_2 bound; positive for every beta > 0.

    Uses 1/(1 - e^(-beta)) in the first fraction (the sign that makes the
    bracket positive); the two fractions nearly cancel, so both are formed
    with expm1.
    """
    em = mpmath.expm1(-beta)  # e^(-beta) - 1
    root = mpmath.sqrt(em**2 + 4 * mpmath.exp(-beta) * mpmath.sin(beta ** (1 + epsilon) / 2) ** 2)
    bracket = 1 / -em - 1 / root
    return mpmath.exp(-3 * beta) * beta ** (1 - 2 * epsilon) * bracket


# -- Q-side constants ------------------------------------------------------------


def c2_candidates(d: int):
    """The four lower bounds whose minimum is c2 (even d only)."""
    if d % 2:
        raise DomainError(f"c2 needs d even, got d={d}")
    if d < 4:
        raise DomainError("c2 is defined for d >= 4")
    pi = mpmath.pi
    e = mpmath.exp
    s = _one_minus_cos(2 * pi / (d + 5))
    denom = mpmath.expm1((d + 3) * pi) * (e((d + 3) * pi) + 1) ** 2
    bound1 = 2 * pi * s * (e((2 * d + 4) * pi) + e((d + 5) * pi)) / denom
    bound2 = pi * s * (
        e((3 * d + 7) * pi) + e(2 * pi) - e((2 * d + 4) * pi) - e((d + 5) * pi)
    ) / denom
    bound3 = (
        pi * _one_minus_cos((d + 3 - pi) / mpf(d + 3) ** 2) * (2 * (d + 3) * (d + 1))
        / (mpmath.expm1(pi * (d + 3)) * (8 * pi**2 + (d + 3) ** 2))
    )
    h = e(mpf(d + 3) / 2)
    bound4 = 8 * pi / (mpmath.expm1((d + 3) * pi) * ((h - 1) ** 2 + 4 * h))
    return (bound1, bound2, bound3, bound4)


def _ymax_search(d, delta, xi, c2, beta_Q):
    pi = mpmath.pi
    L = mpmath.log(2 * mpmath.sin(2 * pi / (d + 3)))
    lead = 2 * pi**4 / (3 * (d + 3))

    def c4(y):
        return lead - L * y ** (delta / 2) - xi * y ** ((1 + delta) / 2)

    def c5(y):
        return c2 + y * L - xi * y ** (mpf(3) / 2)

    def ok(y):
        return c4(y) > 0 and c5(y) > 0

    upper = (1 / (2 * pi)) ** (1 / (beta_Q - 1))
    if ok(upper):
        return upper, c4(upper), c5(upper)
    hi = upper
    lo = upper / 2
    steps = 0
    while not ok(lo):
        hi, lo = lo, lo / 2
        steps += 1
        if steps > 20000:
            raise CertificationFailure(f"no y_max with c4 > 0 and c5 > 0 for d={d}")
    rel = mpf(2) ** -32
    while hi - lo > rel * lo:
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo, c4(lo), c5(lo)


# -- bundle ------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantBundle:
    d: int
    b: int
    precision_bits: int
    params_fingerprint: str
    alpha: object
    A_d: object
    A_tail_bound: object
    rho: object
    gamma: object
    zeta_3_2_2: object
    beta_q: object
    eta: object
    F1: object
    F2: object
    beta_Q: object
    c10: object
    phi3_max: object
    c6: object
    c7: object
    # c2 .. c3 exist for even d only (the b = 2 envelope)
    c2: object = None
    y_max: object = None
    c4: object = None
    c5: object = None
    c3: object = None
    # smallest n with sqrt(A_d/n) < beta_q
    beta_hypothesis_min_n: int = 0

    @property
    def beta_hypothesis_at_n1(self) -> bool:
        return self.beta_hypothesis_min_n <= 1

    def numeric_items(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, mpmath.mpf):
                yield f.name, v

    def to_dict(self) -> dict:
        digits = int(self.precision_bits * 0.30103) + 2
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, mpmath.mpf):
                with mp.workprec(self.precision_bits):
                    v = mpmath.nstr(v, digits, min_fixed=-5, max_fixed=5,
                                    strip_zeros=False)
            out[f.name] = v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def q_side_constants(d: int, alpha, A, params: BoundParams, precision_bits=None,
                     strict: bool = False) -> dict:
    """rho, gamma, beta_q, eta, F1, F2 and the beta_q hypothesis threshold.

    With ``strict`` a violated hypothesis sqrt(A_d) < beta_q (at n = 1) raises
    HypothesisViolation; otherwise the smallest n where it holds is reported.
    """
    if d < 4:
        raise DomainError("q-side constants need d >= 4")
    bits = precision_bits or params.precision_bits
    with _work(bits):
        eps = to_mpf(params.epsilon)
        xi = to_mpf(params.xi)
        alpha = mpf(alpha)
        A = mpf(A)
        pi = mpmath.pi
        rho = 1 - alpha
        gamma = 1 / (2 * pi * mpmath.sqrt(alpha ** (d - 3) * (d * alpha ** (d - 1) + 1)))
        beta = beta_q_value(d, alpha, eps, xi)
        eta = eta_value(beta, eps)
        zeta32 = hurwitz_zeta_3_2_at_2(bits).value
        F1 = f1_error_factor(mpmath.sqrt(A), rho, eps, zeta32)
        F2 = f2_error_factor(mpmath.sqrt(A), d, rho, eps, xi)
        min_n = int(mpmath.floor(A / beta**2)) + 1
    if strict and min_n > 1:
        raise HypothesisViolation(
            "sqrt(A_d/n) < beta_q at n = 1",
            f"sqrt(A_d/n) < beta_q needs n >= {min_n} for d={d}",
        )
    return {
        "rho": _out(rho, bits), "gamma": _out(gamma, bits),
        "beta_q": _out(beta, bits), "eta": _out(eta, bits),
        "F1": _out(F1, bits), "F2": _out(F2, bits),
        "zeta_3_2_2": _out(zeta32, bits), "beta_hypothesis_min_n": min_n,
    }


def Q_side_constants(d: int, b: int, params: BoundParams, precision_bits=None,
                     with_envelope: bool | None = None) -> dict:
    """c10, phi3_max, c6, c7 for the b-family; c2, y_max, c4, c5, c3 for b = 2."""
    if d < 4:
        raise DomainError("Q-side constants need d >= 4")
    if b not in (1, 2):
        raise DomainError("b must be 1 or 2")
    if with_envelope is None:
        with_envelope = b == 2
    if with_envelope and d % 2:
        raise DomainError(f"the Q_d^(2) envelope needs d even, got d={d}")
    bits = precision_bits or params.precision_bits
    out = {}
    with _work(bits):
        pi = mpmath.pi
        delta = to_mpf(params.delta)
        xi = to_mpf(params.xi)
        eps1 = to_mpf(params.epsilon1)
        m = d + 3
        beta_Q = mpf(3) / 2 - delta / 4
        c10 = 2 * pi * (pi**2 / (3 * m)) ** (beta_Q - 1)
        phi3 = (
            mpf(2) ** ((22 + 3 * delta) / 8) * pi ** ((22 - 3 * delta) / 4)
            / (3 * mpf(m) ** ((10 - 3 * delta) / 8))
            + xi * (pi**2 / (2 * m)) ** (mpf(1) / 4)
        )
        c6 = mpmath.expm1(phi3) / phi3
        c7 = c6 * c10**3 + xi * c6 * pi ** ((4 - 3 * delta) / 4) / (
            mpf(2) ** (3 * delta / 8) * mpf(3) ** ((2 - 3 * delta) / 4)
            * mpf(m) ** ((4 - 3 * delta) / 8)
        )
        out.update(beta_Q=beta_Q, c10=c10, phi3_max=phi3, c6=c6, c7=c7)
        if with_envelope:
            c2 = min(c2_candidates(d))
            y_max, c4, c5 = _ymax_search(d, delta, xi, c2, beta_Q)
            c3 = min(c4 * y_max ** (eps1 - delta / 2), c5 * y_max ** (eps1 - 1))
            out.update(c2=c2, y_max=y_max, c4=c4, c5=c5, c3=c3)
    return {k: _out(v, bits) for k, v in out.items()}


def constant_bundle(d: int, params: BoundParams | None = None,
                    precision_bits: int | None = None, strict: bool = False) -> ConstantBundle:
    """All constants for d >= 4 with b = 2 for even d and b = 1 for odd d."""
    if d < 4:
        raise DomainError("constant bundles are defined for d >= 4")
    if params is None:
        params = BoundParams.for_d(d)
    bits = precision_bits or params.precision_bits
    b = 2 if d % 2 == 0 else 1
    alpha = solve_alpha(d, bits)
    A = compute_A(d, alpha, bits)
    q = q_side_constants(d, alpha, A.value, params, bits, strict=strict)
    Q = Q_side_constants(d, b, params, bits)
    return ConstantBundle(
        d=d, b=b, precision_bits=bits, params_fingerprint=params.fingerprint(),
        alpha=alpha, A_d=A.value, A_tail_bound=A.tail_bound, **q, **Q,
    )
