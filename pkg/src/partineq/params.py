"""Free parameters of the threshold construction.

All values are exact rationals so that a configuration means the same thing
at every working precision; they are converted to mpmath numbers only inside
the numerical routines.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from fractions import Fraction

from mpmath import mpf

from .errors import DomainError

DEFAULT_PRECISION_BITS = 256

# Placeholder for the external error-term maximum; operators should supply the
# value computed for their parameter choice.  Runs using it are conditional.
DEFAULT_F_ERR_MAX = Fraction("1e-4")

TABLE_SHARED = {
    "c": Fraction("0.37501"),
    "epsilon": Fraction("0.11"),
    "epsilon2": Fraction(1),
    "xi": Fraction("0.224"),
}
TABLE_DELTA = {"even": Fraction(1, 3), "odd": Fraction(1, 80)}
TABLE_WEIGHTS = {
    "even": tuple(Fraction(k, 800) for k in (1, 1, 400, 1, 1, 1, 1)),
    "odd": tuple(Fraction(k, 800) for k in (1, 100, 100, 1, 1, 1, 1)),
}


def parity(d: int) -> str:
    return "even" if d % 2 == 0 else "odd"


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("pass reals as decimal strings or Fractions, not floats")
    return Fraction(value)


def to_mpf(value: Fraction):
    """Correctly rounded conversion at the current mpmath precision."""
    return mpf(value.numerator) / value.denominator


@dataclass(frozen=True)
class BoundParams:
    epsilon: Fraction
    epsilon2: Fraction
    delta: Fraction
    xi: Fraction
    c: Fraction
    epsilon1: Fraction
    weights: tuple[Fraction, ...]
    f_err_max: Fraction | None = None
    precision_bits: int = DEFAULT_PRECISION_BITS

    def __post_init__(self):
        e, e2, dl = self.epsilon, self.epsilon2, self.delta
        problems = []
        if not 0 < e < Fraction(1, 2):
            problems.append("0 < epsilon < 1/2")
        if not (e2 > Fraction(1, 3) and e2 > e):
            problems.append("epsilon2 > 1/3 and epsilon2 > epsilon")
        if not 0 < dl < Fraction(1, 2):
            problems.append("0 < delta < 1/2")
        if not 0 < self.xi < 1:
            problems.append("0 < xi < 1")
        if not Fraction(3, 8) < self.c < Fraction(1, 2):
            problems.append("3/8 < c < 1/2")
        if not 0 < self.epsilon1 < dl / 2:
            problems.append("0 < epsilon1 < delta/2")
        if len(self.weights) != 8 or any(k <= 0 for k in self.weights):
            problems.append("eight positive weights")
        elif sum(self.weights) != 1:
            problems.append("weights sum to 1")
        if self.f_err_max is not None and self.f_err_max < 0:
            problems.append("f_err_max >= 0")
        if self.precision_bits < 16:
            problems.append("precision_bits >= 16")
        if problems:
            raise DomainError("invalid bound parameters: " + "; ".join(problems))

    @classmethod
    def build(cls, *, epsilon, epsilon2, delta, xi, c, weights, epsilon1=None,
              f_err_max=None, precision_bits=DEFAULT_PRECISION_BITS):
        """Build from K1..K7; K8 is the remainder so the weights sum to one."""
        ks = tuple(as_fraction(k) for k in weights)
        if len(ks) == 8:
            ks = ks[:7]
        if len(ks) != 7:
            raise DomainError("give the first seven weights K1..K7")
        ks = ks + (1 - sum(ks),)
        delta = as_fraction(delta)
        return cls(
            epsilon=as_fraction(epsilon),
            epsilon2=as_fraction(epsilon2),
            delta=delta,
            xi=as_fraction(xi),
            c=as_fraction(c),
            epsilon1=delta / 4 if epsilon1 is None else as_fraction(epsilon1),
            weights=ks,
            f_err_max=None if f_err_max is None else as_fraction(f_err_max),
            precision_bits=int(precision_bits),
        )

    @classmethod
    def for_d(cls, d: int, *, f_err_max=DEFAULT_F_ERR_MAX,
              precision_bits=DEFAULT_PRECISION_BITS) -> "BoundParams":
        """Default parameters, selected by the parity of d."""
        p = parity(d)
        return cls.build(
            delta=TABLE_DELTA[p], weights=TABLE_WEIGHTS[p], f_err_max=f_err_max,
            precision_bits=precision_bits, **TABLE_SHARED,
        )

    def K(self, i: int) -> Fraction:
        """Weight K_i, 1-based."""
        return self.weights[i - 1]

    def with_precision(self, bits: int) -> "BoundParams":
        return replace(self, precision_bits=bits)

    def to_dict(self) -> dict:
        return {
            "epsilon": str(self.epsilon),
            "epsilon2": str(self.epsilon2),
            "delta": str(self.delta),
            "xi": str(self.xi),
            "c": str(self.c),
            "epsilon1": str(self.epsilon1),
            "weights": [str(k) for k in self.weights],
            "f_err_max": None if self.f_err_max is None else str(self.f_err_max),
            "precision_bits": self.precision_bits,
        }

    def fingerprint(self) -> str:
        text = repr(sorted(self.to_dict().items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]
