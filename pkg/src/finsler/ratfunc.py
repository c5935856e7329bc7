"""Exact rational-function arithmetic in the indeterminates s and t = b^2.

Coefficients are arbitrary-precision rationals, so the profile scalars of
an (alpha,beta)-metric become exact algebraic objects.  Equality goes by
cross-multiplication; the only reduction kept is content extraction, which
is all a soundness certificate needs.

The certificates shipped here pin down two facts used everywhere else:

* the reduced (Q, Theta, Psi) published for the second approximate
  Matsumoto profile agree exactly with the generic definitions when Q is
  built with the denominator phi - s*phi' (and fail with phi - s*phi --
  exposing the misprint);
* the scalar Phi is not identically zero for that profile in any
  dimension, while it vanishes identically in the Riemannian case.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

__all__ = [
    "Poly2",
    "RatFunc",
    "RF_ZERO",
    "RF_ONE",
    "rf_s",
    "rf_t",
    "rf_const",
    "generic_scalars",
    "reduced_second_matsumoto",
    "ReductionCertificate",
    "verify_second_matsumoto_reduction",
    "phi_nonvanishing_certificate",
]


class Poly2:
    """Polynomial in (s, t) with Fraction coefficients; zero terms stripped."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Fraction] | None = None):
        clean: dict[tuple[int, int], Fraction] = {}
        if terms:
            for k, v in terms.items():
                v = Fraction(v)
                if v != 0:
                    clean[(int(k[0]), int(k[1]))] = v
        self.terms = clean

    # construction helpers
    @staticmethod
    def const(v) -> "Poly2":
        return Poly2({(0, 0): Fraction(v)})

    @staticmethod
    def s(power: int = 1) -> "Poly2":
        return Poly2({(power, 0): Fraction(1)})

    @staticmethod
    def t(power: int = 1) -> "Poly2":
        return Poly2({(0, power): Fraction(1)})

    @staticmethod
    def from_s_coeffs(coeffs: Sequence) -> "Poly2":
        """Polynomial in s alone from ascending coefficients."""
        return Poly2({(i, 0): Fraction(c) for i, c in enumerate(coeffs)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly2) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "Poly2") -> "Poly2":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return Poly2(out)

    def __neg__(self) -> "Poly2":
        return Poly2({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "Poly2") -> "Poly2":
        return self + (-other)

    def __mul__(self, other) -> "Poly2":
        if not isinstance(other, Poly2):
            other = Poly2.const(other)
        out: dict[tuple[int, int], Fraction] = {}
        for (i1, j1), v1 in self.terms.items():
            for (i2, j2), v2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, Fraction(0)) + v1 * v2
        return Poly2(out)

    __rmul__ = __mul__

    def __pow__(self, p: int) -> "Poly2":
        out = Poly2.const(1)
        b = self
        while p:
            if p & 1:
                out = out * b
            p >>= 1
            if p:
                b = b * b
        return out

    def d_ds(self) -> "Poly2":
        return Poly2({(i - 1, j): v * i for (i, j), v in self.terms.items() if i > 0})

    def eval(self, s, t):
        acc = None
        for (i, j), v in self.terms.items():
            term = v * s**i * t**j
            acc = term if acc is None else acc + term
        return acc if acc is not None else 0 * s

    def content(self) -> Fraction:
        """gcd of numerators over lcm of denominators; 0 for the zero poly."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for v in self.terms.values():
            num = gcd(num, abs(v.numerator))
            den = den * v.denominator // gcd(den, v.denominator)
        return Fraction(num, den)

    def leading_sign(self) -> int:
        if not self.terms:
            return 0
        k = max(self.terms)
        return 1 if self.terms[k] > 0 else -1

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j), v in sorted(self.terms.items()):
            mono = "".join(
                [f"*s^{i}" if i else "", f"*t^{j}" if j else ""]
            )
            parts.append(f"{v}{mono}")
        return " + ".join(parts)


@dataclass(frozen=True)
class RatFunc:
    """num/den with nonzero den, reduced by joint content, den sign-normalized."""

    num: Poly2
    den: Poly2

    @staticmethod
    def make(num: Poly2, den: Poly2) -> "RatFunc":
        if den.is_zero():
            raise ZeroDivisionError("zero denominator polynomial")
        if num.is_zero():
            return RatFunc(Poly2(), Poly2.const(1))
        cn, cd = num.content(), den.content()
        g = Fraction(
            gcd(cn.numerator * cd.denominator, cd.numerator * cn.denominator),
            cn.denominator * cd.denominator,
        )
        if den.leading_sign() < 0:
            g = -g
        inv = 1 / g
        num = Poly2({k: v * inv for k, v in num.terms.items()})
        den = Poly2({k: v * inv for k, v in den.terms.items()})
        return RatFunc(num, den)

    @staticmethod
    def from_poly(p: Poly2) -> "RatFunc":
        return RatFunc.make(p, Poly2.const(1))

    @staticmethod
    def const(v) -> "RatFunc":
        return RatFunc.make(Poly2.const(v), Poly2.const(1))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other) -> "RatFunc":
        other = _coerce(other)
        return RatFunc.make(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other) -> "RatFunc":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "RatFunc":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "RatFunc":
        other = _coerce(other)
        return RatFunc.make(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFunc":
        other = _coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc.make(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RatFunc":
        return _coerce(other) / self

    def __pow__(self, p: int) -> "RatFunc":
        if p < 0:
            return RatFunc.const(1) / self ** (-p)
        return RatFunc.make(self.num**p, self.den**p)

    def equals(self, other: "RatFunc") -> bool:
        """Exact equality as rational functions (cross-multiplication)."""
        return self.num * other.den == other.num * self.den

    def d_ds(self) -> "RatFunc":
        """Quotient-rule derivative with respect to s (t held fixed)."""
        return RatFunc.make(
            self.num.d_ds() * self.den - self.num * self.den.d_ds(), self.den * self.den
        )

    def eval(self, s, t):
        den = self.den.eval(s, t)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.eval(s, t) / den


def _coerce(v) -> RatFunc:
    if isinstance(v, RatFunc):
        return v
    if isinstance(v, Poly2):
        return RatFunc.from_poly(v)
    return RatFunc.const(v)


RF_ZERO = RatFunc.const(0)
RF_ONE = RatFunc.const(1)


def rf_s() -> RatFunc:
    return RatFunc.from_poly(Poly2.s())


def rf_t() -> RatFunc:
    return RatFunc.from_poly(Poly2.t())


# -- profile scalars as exact objects -----------------------------------------


def generic_scalars(phi_coeffs: Sequence, n: int, mistype_q: bool = False) -> dict[str, RatFunc]:
    """Q, Theta, Psi, Delta, Phi for a polynomial profile, as exact rational
    functions of (s, t).

    ``mistype_q`` swaps Q's denominator for phi - s*phi (the literal form a
    misprint would give); useful to demonstrate that exact arithmetic
    distinguishes the two.
    """
    s = Poly2.s()
    t = Poly2.t()
    w = t - s * s  # b^2 - s^2
    phi = Poly2.from_s_coeffs(phi_coeffs)
    phip = phi.d_ds()
    phipp = phip.d_ds()
    q_den = phi - s * phi if mistype_q else phi - s * phip
    Q = RatFunc.make(phip, q_den)
    Qp = Q.d_ds()
    Qpp = Qp.d_ds()
    sR = RatFunc.from_poly(s)
    wR = RatFunc.from_poly(w)
    bracket = RatFunc.from_poly((phi - s * phip) + w * phipp)
    Theta = RatFunc.from_poly(phi * phip - s * (phi * phipp + phip * phip)) / (
        2 * RatFunc.from_poly(phi) * bracket
    )
    Psi = RatFunc.from_poly(phipp) / (2 * bracket)
    Delta = RF_ONE + sR * Q + wR * Qp
    Phi = -(n * Delta + RF_ONE + sR * Q) * (Q - sR * Qp) - wR * (RF_ONE + sR * Q) * Qpp
    return {"Q": Q, "Theta": Theta, "Psi": Psi, "Delta": Delta, "Phi": Phi}


def reduced_second_matsumoto() -> dict[str, RatFunc]:
    """The published reduced (Q, Theta, Psi) for phi = 1 + s + s^2 + s^3."""
    s = Poly2.s()
    t = Poly2.t()
    one = Poly2.const(1)
    Q = RatFunc.make(
        -(one + 2 * s + 3 * s**2), Poly2.const(-1) + s**2 + 2 * s**3
    )
    theta_num = one - 6 * s**2 - 12 * s**3 - 15 * s**4 - 12 * s**5
    shared_den = one - 3 * s**2 - 8 * s**3 + 2 * t + 6 * (t * s)
    Theta = RatFunc.make(theta_num, 2 * ((one + s + s**2 + s**3) * shared_den))
    Psi = RatFunc.make(one + 3 * s, shared_den)
    return {"Q": Q, "Theta": Theta, "Psi": Psi}


@dataclass(frozen=True)
class ReductionCertificate:
    q_ok: bool
    theta_ok: bool
    psi_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.q_ok and self.theta_ok and self.psi_ok


SECOND_MATSUMOTO_COEFFS = (1, 1, 1, 1)


def verify_second_matsumoto_reduction() -> ReductionCertificate:
    """Exact-equality certificate: generic (Q, Theta, Psi) with
    phi = 1 + s + s^2 + s^3 against their published reduced forms."""
    generic = generic_scalars(SECOND_MATSUMOTO_COEFFS, n=2)
    reduced = reduced_second_matsumoto()
    return ReductionCertificate(
        q_ok=generic["Q"].equals(reduced["Q"]),
        theta_ok=generic["Theta"].equals(reduced["Theta"]),
        psi_ok=generic["Psi"].equals(reduced["Psi"]),
    )


def phi_nonvanishing_certificate(
    n: int, phi_coeffs: Sequence = SECOND_MATSUMOTO_COEFFS
) -> bool:
    """True iff the numerator of Phi is not the zero polynomial in (s, t)."""
    if n < 2:
        raise ValueError("dimension must be >= 2")
    Phi = generic_scalars(phi_coeffs, n)["Phi"]
    return not Phi.num.is_zero()
