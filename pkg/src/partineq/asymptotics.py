"""Main terms, the eight error summands S_1..S_8 and the R_d(n) envelope.

mpmath numbers carry an unbounded exponent, so exp(2 sqrt(A_d n)) at n = 10^8
is represented directly; no rescaling to log space is needed for the
comparisons.  ``log_*`` helpers are provided where a log-magnitude is the
natural output.

Comparisons with exact counts round the integer away from the side being
tested and shrink the real bound by the rounding slack, so a pass is
conservative.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from .constants import GUARD_BITS, ConstantBundle, constant_bundle
from .errors import DomainError
from .params import BoundParams, to_mpf
from .rounding import int_to_mpf, nudge_down, nudge_up

ENVELOPE_MIN_N = 6


def _kappa0(d):
    return 2 * mpmath.pi / mpmath.sqrt(3 * (d + 3))


def _sin_b(d, b):
    if b not in (1, 2):
        raise DomainError("b must be 1 or 2")
    return mpmath.sin(b * mpmath.pi / (d + 3))


def main_term_q(d: int, n, bundle: ConstantBundle):
    """m_d(n) = A_d^(1/4) n^(-3/4) exp(2 sqrt(A_d n)) / (2 sqrt(pi alpha^(d-3) (d alpha^(d-1) + 1)))."""
    if n < 1:
        raise DomainError("n must be >= 1")
    with mp.workprec(bundle.precision_bits + GUARD_BITS):
        n = mpf(n)
        A, alpha = bundle.A_d, bundle.alpha
        X = alpha ** (d - 3) * (d * alpha ** (d - 1) + 1)
        value = (A ** (mpf(1) / 4) / (2 * mpmath.sqrt(mpmath.pi * X))
                 * n ** (-mpf(3) / 4) * mpmath.exp(2 * mpmath.sqrt(A * n)))
    return +value


def log_main_term_q(d: int, n, bundle: ConstantBundle):
    with mp.workprec(bundle.precision_bits + GUARD_BITS):
        return mpmath.log(main_term_q(d, n, bundle))


def main_term_Q(d: int, n, b: int = 2, precision_bits: int = 256):
    """n^(-3/4) exp(2 pi sqrt(n) / sqrt(3(d+3))) / (4 (3(d+3))^(1/4) sin(b pi/(d+3)))."""
    if n < 1:
        raise DomainError("n must be >= 1")
    with mp.workprec(precision_bits + GUARD_BITS):
        n = mpf(n)
        value = (n ** (-mpf(3) / 4) * mpmath.exp(_kappa0(d) * mpmath.sqrt(n))
                 / (4 * mpf(3 * (d + 3)) ** (mpf(1) / 4) * _sin_b(d, b)))
    return +value


def summands_S(d: int, b: int, n, bundle: ConstantBundle, params: BoundParams) -> tuple:
    """(S_1, ..., S_8) at n; S_7 is None without a configured f_err_max."""
    if n < 1:
        raise DomainError("n must be >= 1")
    with mp.workprec(bundle.precision_bits + GUARD_BITS):
        n = mpf(n)
        pi = mpmath.pi
        A, gamma = bundle.A_d, bundle.gamma
        eps = to_mpf(params.epsilon)
        e2 = to_mpf(params.epsilon2)
        dl = to_mpf(params.delta)
        m3 = mpf(3 * (d + 3))
        s = _sin_b(d, b)
        E0 = mpmath.exp(_kappa0(d) * mpmath.sqrt(n))
        grow = 2 * mpmath.sqrt(A * n)
        Aeps = A**eps * n**-eps

        S1 = n ** (-mpf(3) / 4) * E0 / (4 * m3 ** (mpf(1) / 4) * s)
        S2 = n ** (-1 + dl / 2) * bundle.c7 * pi ** (1 + dl / 2) / (m3**2 * s) * E0
        S3 = E0
        S4 = (gamma / mpmath.sqrt(2 * A**eps) * n ** (eps / 2 - 1)
              * mpmath.exp(grow - n ** (mpf(1) / 2 - eps) * A ** (mpf(1) / 2 + eps)))
        S5 = (gamma * mpmath.exp(grow)
              * mpmath.expm1(A ** ((1 + 3 * e2) / 2) * n ** ((1 - 3 * e2) / 2))
              * mpmath.sqrt(pi) * A ** (mpf(1) / 4) * n ** (-mpf(3) / 4))
        decay = A ** (e2 / 2) * n ** (1 - e2 / 2)
        S6 = (gamma * mpmath.exp(grow - decay / (1 + Aeps)) * A ** (mpf(3) / 2)
              * n ** (-mpf(3) / 2) * (1 + Aeps)
              + gamma * mpmath.sqrt(A) * n ** (-mpf(3) / 2) * mpmath.exp(grow - decay))
        if params.f_err_max is None:
            S7 = None
        else:
            S7 = (gamma * mpmath.exp(grow) * to_mpf(params.f_err_max)
                  * mpmath.sqrt(pi * A ** (mpf(3) / 2) * n ** (-mpf(3) / 2) * (1 + Aeps)))
        lam = bundle.eta * bundle.rho * A ** (eps - mpf(1) / 2)
        S8 = (mpmath.sqrt(2 * pi / (d * mpmath.sqrt(A))) * n ** (mpf(1) / 4)
              * mpmath.exp(-lam * n ** (mpf(1) / 2 - eps)) * (1 + bundle.F2)
              * mpmath.exp(grow + (3 - d) * mpmath.log(bundle.alpha) / 2 + bundle.F1))
        out = (S1, S2, S3, S4, S5, S6, S7, S8)
    return tuple(None if x is None else +x for x in out)


def R_bound(d: int, n, bundle: ConstantBundle, params: BoundParams):
    """Three-term envelope for |Q_d^(2)(n) - main_term_Q(d, n)| (d even)."""
    if d % 2:
        raise DomainError(f"the envelope is defined for even d, got d={d}")
    if bundle.c3 is None:
        raise DomainError("bundle lacks c3; compute it with the b = 2 constants")
    if n < 1:
        raise DomainError("n must be >= 1")
    with mp.workprec(bundle.precision_bits + GUARD_BITS):
        n = mpf(n)
        pi = mpmath.pi
        dl = to_mpf(params.delta)
        e1 = to_mpf(params.epsilon1)
        m3 = mpf(3 * (d + 3))
        s = _sin_b(d, 2)
        k0 = _kappa0(d) * mpmath.sqrt(n)
        t1 = (n ** (-mpf(1) / 4) * mpmath.sqrt(pi) * m3 ** (-mpf(3) / 4) / (2 * s)
              * mpmath.exp(k0 - n ** (-dl / 8) * 2 * pi ** (2 - dl / 4) * m3 ** (-2 + 3 * dl / 8)))
        t2 = n ** (-1 + dl / 2) * bundle.c7 * pi ** (1 + dl / 2) / (m3**2 * s) * mpmath.exp(k0)
        t3 = mpmath.exp(k0 - bundle.c3 * n ** (e1 / 2) * (pi**2 / m3) ** (-3 * e1 / 2))
        value = t1 + t2 + t3
    return +value


# -- conservative comparisons with exact integers --------------------------------


def exact_le(value: int, bound, precision_bits: int) -> bool:
    """value <= bound, with value rounded up and bound shrunk by the slack."""
    with mp.workprec(precision_bits + GUARD_BITS):
        return int_to_mpf(value, "up") <= nudge_down(mpf(bound), precision_bits)


def exact_ge(value: int, bound, precision_bits: int) -> bool:
    with mp.workprec(precision_bits + GUARD_BITS):
        return int_to_mpf(value, "down") >= nudge_up(mpf(bound), precision_bits)


def exact_within(value: int, center, radius, precision_bits: int) -> bool:
    """|value - center| <= radius, each side tested with adverse rounding."""
    with mp.workprec(precision_bits + GUARD_BITS):
        c, r = mpf(center), mpf(radius)
        return exact_le(value, c + r, precision_bits) and exact_ge(value, c - r, precision_bits)


# -- evaluation records --------------------------------------------------------


@dataclass(frozen=True)
class EnvelopeEvaluation:
    d: int
    b: int
    n: int
    main_q: object
    main_Q: object
    S: tuple
    combined_Q_upper: object
    R_d_bound: object
    r_d_bound: object

    def row(self, digits: int = 30) -> list:
        def fmt(x):
            return "" if x is None else mpmath.nstr(x, digits)

        return [self.d, self.b, self.n, fmt(self.main_q), fmt(self.main_Q),
                *(fmt(x) for x in self.S), fmt(self.R_d_bound)]


CSV_COLUMNS = ("d", "b", "n", "main_q", "main_Q") + tuple(f"S{i}" for i in range(1, 9)) + ("R_bound",)


def evaluate(d: int, n: int, params: BoundParams | None = None,
             bundle: ConstantBundle | None = None, b: int | None = None) -> EnvelopeEvaluation:
    if params is None:
        params = BoundParams.for_d(d)
    if bundle is None:
        bundle = constant_bundle(d, params)
    if b is None:
        b = bundle.b
    bits = bundle.precision_bits
    S = summands_S(d, b, n, bundle, params)
    with mp.workprec(bits + GUARD_BITS):
        combined = S[0] + S[1] + S[2]
        r_q = None if S[6] is None else S[3] + S[4] + S[5] + S[6] + S[7]
    R = R_bound(d, n, bundle, params) if d % 2 == 0 and bundle.c3 is not None else None
    return EnvelopeEvaluation(
        d=d, b=b, n=n,
        main_q=main_term_q(d, n, bundle),
        main_Q=main_term_Q(d, n, b, bits),
        S=S, combined_Q_upper=+combined, R_d_bound=R,
        r_d_bound=None if r_q is None else +r_q,
    )


def envelope_csv(rows, digits: int = 30) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for ev in rows:
        w.writerow(ev.row(digits))
    return buf.getvalue()


@dataclass(frozen=True)
class CertificationPoint:
    n: int
    total: object      # sum of S_i
    main: object       # m_d(n)
    holds: bool


def certify(d: int, n_values, params: BoundParams | None = None,
            bundle: ConstantBundle | None = None, b: int | None = None) -> list[CertificationPoint]:
    """Check sum_i S_i(n) <= m_d(n) with the sum rounded up and m_d rounded down.

    Needs f_err_max so that S_7 is available.
    """
    if params is None:
        params = BoundParams.for_d(d)
    if params.f_err_max is None:
        raise DomainError("certification needs a configured f_err_max")
    if bundle is None:
        bundle = constant_bundle(d, params)
    if b is None:
        b = bundle.b
    bits = bundle.precision_bits
    out = []
    for n in n_values:
        S = summands_S(d, b, n, bundle, params)
        m = main_term_q(d, n, bundle)
        with mp.workprec(bits + GUARD_BITS):
            total = mpmath.fsum(S)
            holds = nudge_up(total, bits) <= nudge_down(m, bits)
        out.append(CertificationPoint(n, total, m, bool(holds)))
    return out
