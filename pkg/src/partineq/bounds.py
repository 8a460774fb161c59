"""Thresholds N_1..N_8 beyond which each error summand is below its share of
the main term, and their maxima N_Q, N_q, N(d).

Each N_i is an upward-rounded ceiling (see ``rounding``).  N_3 and N_8 have no
closed form: both are the larger root of a convex function, so they are found
by locating the analytic minimum, growing a bracket geometrically past it and
bisecting, then fixing the integer by evaluating the inequality directly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp, mpf

from .constants import GUARD_BITS, ConstantBundle, constant_bundle
from .errors import DomainError, HypothesisViolation, MethodFailure, RootBracketError
from .params import BoundParams, to_mpf
from .rounding import ceil_certified

D_MIN, D_MAX = 4, 61
BRACKET_LIMIT = mpf(10) ** 60

# Reference N(d) for 4 <= d <= 61, kept for diagnostic comparison only.
REFERENCE_THRESHOLDS = {
    4: 38133800, 5: 142685922, 6: 2270342, 7: 16962519, 8: 577857,
    9: 4661719, 10: 314268, 11: 1886829, 12: 405797, 13: 949272,
    14: 507346, 15: 547612, 16: 618979, 17: 635395, 18: 740779,
    19: 755215, 20: 872843, 21: 884932, 22: 1015278, 23: 1024661,
    24: 1168195, 25: 1174519, 26: 1331711, 27: 1334627, 28: 1505944,
    29: 1505109, 30: 1691018, 31: 1686090, 32: 1887055, 33: 1877697,
    34: 2094182, 35: 2080058, 36: 2312526, 37: 2293302, 38: 2542214,
    39: 2517558, 40: 2783376, 41: 2752957, 42: 3036139, 43: 2999626,
    44: 3300632, 45: 3257697, 46: 3576985, 47: 3527299, 48: 3865326,
    49: 3808560, 50: 5165784, 51: 4101610, 52: 4478487, 53: 4406575,
    54: 4803561, 55: 4723585, 56: 5141132, 57: 5052765, 58: 5491330,
    59: 5394245, 60: 5854276, 61: 5748150,
}


def method_b(d: int) -> int:
    """Congruence family compared against: b = 2 for even d, b = 1 for odd d."""
    return 2 if d % 2 == 0 else 1


def _X(d, alpha):
    return alpha ** (d - 3) * (d * alpha ** (d - 1) + 1)


def kappa(d, A):
    """Gap 2 sqrt(A_d) - 2 pi / sqrt(3(d+3)) between the two growth rates."""
    return 2 * mpmath.sqrt(A) - 2 * mpmath.pi / mpmath.sqrt(3 * (d + 3))


def _kappa_checked(d, A):
    k = kappa(d, A)
    if k <= 0:
        raise MethodFailure(f"2 sqrt(A_d) <= 2 pi / sqrt(3(d+3)) for d={d}; the method does not apply")
    return k


def _squared_log_ceiling(log_term, k, bits):
    # log_term <= 0 means the inequality already holds at every n >= 1
    if log_term <= 0:
        return 1
    return ceil_certified((log_term / k) ** 2, bits)


# -- the Q-side thresholds -----------------------------------------------------


def threshold_N1(d: int, b: int, K1, bundle: ConstantBundle) -> int:
    bits = bundle.precision_bits
    with mp.workprec(bits + GUARD_BITS):
        A, alpha = bundle.A_d, bundle.alpha
        k = _kappa_checked(d, A)
        s = mpmath.sin(b * mpmath.pi / (d + 3))
        arg = mpmath.sqrt(mpmath.pi * _X(d, alpha)) / (
            2 * to_mpf(Fraction(K1)) * s * (3 * (d + 3) * A) ** (mpf(1) / 4)
        )
        return _squared_log_ceiling(mpmath.log(arg), k, bits)


def threshold_N2(d: int, b: int, K2, bundle: ConstantBundle, delta) -> int:
    bits = bundle.precision_bits
    with mp.workprec(bits + GUARD_BITS):
        A, alpha = bundle.A_d, bundle.alpha
        k = _kappa_checked(d, A)
        dl = to_mpf(Fraction(delta))
        s = mpmath.sin(b * mpmath.pi / (d + 3))
        arg = (
            2 * bundle.c7 * mpmath.pi ** (1 + dl / 2) * mpmath.sqrt(mpmath.pi * _X(d, alpha))
            / (to_mpf(Fraction(K2)) * A ** (mpf(1) / 4) * mpf(3 * (d + 3)) ** 2 * s)
        )
        return _squared_log_ceiling(mpmath.log(arg), k, bits)


@dataclass(frozen=True)
class RootResult:
    N: int
    root: object          # larger root in the variable n
    bracket: tuple        # (lo, hi) in n with a sign change
    minimum_at: object    # n where the log-ratio is smallest
    all_n: bool           # inequality holds for every n >= 1


def _larger_root(h, x_min, to_n, from_n, bits):
    """Larger root of a convex h with minimum at x_min; x is the search variable.

    ``to_n`` maps x to n and ``from_n`` maps n back.  Returns a RootResult
    whose N is the smallest integer n >= the root where h(from_n(n)) >= 0.
    """
    if h(x_min) >= 0:
        return RootResult(1, None, (None, None), to_n(x_min), True)
    lo = x_min
    hi = x_min + max(abs(x_min), mpf(1))
    while h(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > BRACKET_LIMIT:
            raise RootBracketError(
                "no sign change below the bracket limit",
                interval=(to_n(x_min), to_n(hi)),
            )
    tol = mpf(2) ** -(bits + GUARD_BITS // 2)
    while hi - lo > tol * hi:
        mid = (lo + hi) / 2
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    root = to_n(hi)
    N = ceil_certified(root, bits)
    n_min = to_n(x_min)
    # settle the integer by evaluating the inequality itself
    while N - 1 > n_min and h(from_n(mpf(N - 1))) >= 0:
        N -= 1
    while h(from_n(mpf(N))) < 0:
        N += 1
    return RootResult(N, root, (to_n(lo), to_n(hi)), n_min, False)


def n3_function(d: int, K3, bundle: ConstantBundle):
    """h(u) = kappa u - log C_3 - (3/2) log u with u = sqrt(n); S_3 <= K_3 m_d iff h >= 0."""
    A, alpha = bundle.A_d, bundle.alpha
    k = _kappa_checked(d, A)
    C3 = 2 * mpmath.sqrt(mpmath.pi * _X(d, alpha)) / (to_mpf(Fraction(K3)) * A ** (mpf(1) / 4))
    logC = mpmath.log(C3)

    def h(u):
        return k * u - logC - mpf(3) / 2 * mpmath.log(u)

    return h, mpf(3) / 2 / k


def threshold_N3(d: int, b: int, K3, bundle: ConstantBundle) -> RootResult:
    bits = bundle.precision_bits
    with mp.workprec(bits + GUARD_BITS):
        h, u_min = n3_function(d, K3, bundle)
        return _larger_root(h, u_min, lambda u: u * u, mpmath.sqrt, bits)


# -- the q-side thresholds -----------------------------------------------------


def threshold_N4(d: int, K4, params: BoundParams, bundle: ConstantBundle) -> int:
    bits = bundle.precision_bits
    with mp.workprec(bits + GUARD_BITS):
        A = bundle.A_d
        eps = to_mpf(params.epsilon)
        L = mpmath.log(1 / (to_mpf(Fraction(K4)) * mpmath.sqrt(2 * mpmath.pi)
                            * A ** (eps / 2 + mpf(1) / 4)))
        if L <= 0:
            return 1
        return ceil_certified((A ** (-mpf(1) / 2 - eps) * L) ** (2 / (1 - 2 * eps)), bits)


def threshold_N5(d: int, K5, params: BoundParams, bundle: ConstantBundle) -> int:
    bits = bundle.precision_bits
    with mp.workprec(bits + GUARD_BITS):
        A = bundle.A_d
        e2 = to_mpf(params.epsilon2)
        base = A ** ((1 + 3 * e2) / 2) / mpmath.log1p(to_mpf(Fraction(K5)))
        return ceil_certified(base ** (2 / (3 * e2 - 1)), bits)


def threshold_N6(d: int, K6, params: BoundParams, bundle: ConstantBundle) -> int:
    bits = bundle.precision_bits
    with mp.workprec(bits + GUARD_BITS):
        A = bundle.A_d
        eps = to_mpf(params.epsilon)
        base = (A ** (mpf(5) / 4) * (1 + A**eps) + A ** (mpf(1) / 4)) / (
            mpmath.sqrt(mpmath.pi) * to_mpf(Fraction(K6))
        )
        return ceil_certified(base ** (mpf(4) / 3), bits)


def threshold_N7(d: int, K7, params: BoundParams, bundle: ConstantBundle) -> int | None:
    """None when f_err_max is not configured; 1 when it is zero."""
    if params.f_err_max is None:
        return None
    if params.f_err_max == 0:
        return 1
    bits = bundle.precision_bits
    with mp.workprec(bits + GUARD_BITS):
        A = bundle.A_d
        eps = to_mpf(params.epsilon)
        f = to_mpf(params.f_err_max)
        K = to_mpf(Fraction(K7))
        gap = K**2 - f**2 * A
        if gap <= 0:
            raise DomainError(f"K7^2 <= f_err_max^2 A_d for d={d}; N7 is undefined")
        return ceil_certified(A ** (1 + 1 / eps) * f ** (2 / eps) / gap ** (1 / eps), bits)


def n8_coefficient(d: int, K8, bundle: ConstantBundle):
    """C_8 = sqrt(2) (1+F_2) exp((3-d)/2 log alpha + F_1) / (K_8 gamma A_d^(1/2) sqrt(d))."""
    A = bundle.A_d
    return (
        mpmath.sqrt(2) * (1 + bundle.F2)
        * mpmath.exp((3 - d) * mpmath.log(bundle.alpha) / 2 + bundle.F1)
        / (to_mpf(Fraction(K8)) * bundle.gamma * mpmath.sqrt(A) * mpmath.sqrt(d))
    )


def n8_function(d: int, K8, params: BoundParams, bundle: ConstantBundle):
    """g(t) = lambda e^(theta t) - log C_8 - t with t = log n; S_8 <= K_8 m_d iff g >= 0."""
    eps = to_mpf(params.epsilon)
    lam = bundle.eta * bundle.rho * bundle.A_d ** (eps - mpf(1) / 2)
    if lam <= 0:
        raise HypothesisViolation("eta > 0", f"eta * rho * A_d^(eps-1/2) <= 0 for d={d}")
    theta = mpf(1) / 2 - eps
    logC = mpmath.log(n8_coefficient(d, K8, bundle))

    def g(t):
        return lam * mpmath.exp(theta * t) - logC - t

    t_min = -mpmath.log(lam * theta) / theta
    return g, t_min


def threshold_N8(d: int, K8, params: BoundParams, bundle: ConstantBundle) -> RootResult:
    bits = bundle.precision_bits
    with mp.workprec(bits + GUARD_BITS):
        g, t_min = n8_function(d, K8, params, bundle)
        # the bracket search needs a nonnegative start
        t_min = max(t_min, mpf(0))
        return _larger_root(g, t_min, mpmath.exp, mpmath.log, bits)


# -- assembly ---------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdReport:
    d: int
    b: int
    params: BoundParams
    N: tuple                    # N_1..N_8, None where unavailable
    N_Q: int
    N_q: int
    N_d: int
    conditional: bool
    roots: dict = field(default_factory=dict)
    beta_hypothesis_min_n: int = 0
    constants_digest: str = ""

    @property
    def reference(self) -> int | None:
        return REFERENCE_THRESHOLDS.get(self.d)

    @property
    def argmax(self) -> int:
        """1-based index of the threshold attaining N(d)."""
        return next(i for i, n in enumerate(self.N, 1) if n == self.N_d)

    def to_dict(self) -> dict:
        roots = {
            k: {"root": mpmath.nstr(r.root, 30) if r.root is not None else None,
                "all_n": r.all_n}
            for k, r in sorted(self.roots.items())
        }
        return {
            "d": self.d, "b": self.b,
            "params": self.params.to_dict(),
            "N": list(self.N), "N_Q": self.N_Q, "N_q": self.N_q, "N_d": self.N_d,
            "argmax": self.argmax,
            "conditional": self.conditional,
            "reference_N_d": self.reference,
            "roots": roots,
            "beta_hypothesis_min_n": str(self.beta_hypothesis_min_n),
            "constants_digest": self.constants_digest,
        }


CSV_COLUMNS = ("d",) + tuple(f"N{i}" for i in range(1, 9)) + ("NQ", "Nq", "Nd", "conditional")


def compute_N(d: int, params: BoundParams | None = None,
              bundle: ConstantBundle | None = None) -> ThresholdReport:
    if not D_MIN <= d <= D_MAX:
        raise DomainError(f"thresholds are defined for {D_MIN} <= d <= {D_MAX}, got d={d}")
    if params is None:
        params = BoundParams.for_d(d)
    if bundle is None:
        bundle = constant_bundle(d, params)
    b = method_b(d)
    K = params.K
    r3 = threshold_N3(d, b, K(3), bundle)
    r8 = threshold_N8(d, K(8), params, bundle)
    N = (
        threshold_N1(d, b, K(1), bundle),
        threshold_N2(d, b, K(2), bundle, params.delta),
        r3.N,
        threshold_N4(d, K(4), params, bundle),
        threshold_N5(d, K(5), params, bundle),
        threshold_N6(d, K(6), params, bundle),
        threshold_N7(d, K(7), params, bundle),
        r8.N,
    )
    N_Q = max(N[:3])
    N_q = max(n for n in N[3:] if n is not None)
    return ThresholdReport(
        d=d, b=b, params=params, N=N, N_Q=N_Q, N_q=N_q, N_d=max(N_Q, N_q),
        # N7 depends on an externally supplied constant whenever it is used
        conditional=params.f_err_max is not None and params.f_err_max > 0 or N[6] is None,
        roots={"N3": r3, "N8": r8},
        beta_hypothesis_min_n=bundle.beta_hypothesis_min_n,
        constants_digest=bundle.digest(),
    )


def reports_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow((r.d, *("" if n is None else n for n in r.N), r.N_Q, r.N_q, r.N_d,
                    "true" if r.conditional else "false"))
    return buf.getvalue()
