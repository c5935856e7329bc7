"""Truncated multivariate Taylor (jet) arithmetic.

Scalar fields f(x, y) on a chart are differentiated exactly (to machine
precision) by evaluating them on ``Series`` values: truncated Taylor
polynomials in the displacements of the base coordinates x and the fiber
coordinates y.  Truncation is per variable group -- total degree <= kx in
the x-displacements and <= ky in the y-displacements -- so a single
evaluation of ``f`` yields every mixed partial within those caps.

The public surface is ``jet_eval`` / ``Jet`` (capped at order 2 in x and
4 in y) plus the finite-difference oracle ``fd_cross_check``.  The
``Series`` engine itself is reused internally at whatever truncation a
curvature quantity needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ArgumentError, EvaluationError

MAX_ORDER_X = 2
MAX_ORDER_Y = 4

ScalarField = Callable[[Sequence["Series"], Sequence["Series"]], "Series | float"]


def _bounded_exponents(nvars: int, cap: int) -> list[tuple[int, ...]]:
    """All exponent tuples of length ``nvars`` with total degree <= cap."""
    if nvars == 0:
        return [()]
    out = []
    for e in product(range(cap + 1), repeat=nvars):
        if sum(e) <= cap:
            out.append(e)
    out.sort(key=lambda e: (sum(e), e))
    return out


class SeriesSpace:
    """Monomial basis and precomputed tables for one truncation signature.

    Spaces are interned: ``SeriesSpace.get`` returns a shared instance per
    (nx, ny, kx, ky), so the multiplication table is built once.
    """

    _cache: dict[tuple[int, int, int, int], "SeriesSpace"] = {}

    def __init__(self, nx: int, ny: int, kx: int, ky: int):
        self.nx = nx
        self.ny = ny
        self.kx = kx
        self.ky = ky
        self.nvars = nx + ny
        exps_x = _bounded_exponents(nx, kx)
        exps_y = _bounded_exponents(ny, ky)
        exps = [ex + ey for ex in exps_x for ey in exps_y]
        exps.sort(key=lambda e: (sum(e), e))
        self.exponents: tuple[tuple[int, ...], ...] = tuple(exps)
        self.size = len(exps)
        self.index: dict[tuple[int, ...], int] = {e: i for i, e in enumerate(exps)}
        earr = np.array(exps, dtype=np.int64).reshape(self.size, self.nvars)
        self._earr = earr
        self.xdeg = earr[:, :nx].sum(axis=1) if nx else np.zeros(self.size, dtype=np.int64)
        self.ydeg = earr[:, nx:].sum(axis=1) if ny else np.zeros(self.size, dtype=np.int64)
        # factorial weight turning a Taylor coefficient into a partial derivative
        fact = np.ones(self.size)
        for d in range(self.nvars):
            fact *= np.array([math.factorial(int(e)) for e in earr[:, d]])
        self.fact = fact
        # packed integer key per monomial; digit-wise addition is carry-free
        # because admissible pair sums stay within the group caps
        base = max(kx, ky, 1) + 1
        key = np.zeros(self.size, dtype=np.int64)
        for d in range(self.nvars):
            key = key * base + earr[:, d]
        self._key = key
        self._key_order = np.argsort(key)
        self._key_sorted = key[self._key_order]
        self._mul_table: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._deriv_info: dict[int, tuple["SeriesSpace", np.ndarray, np.ndarray]] = {}
        self._restrict_info: dict[tuple[int, int], tuple["SeriesSpace", np.ndarray]] = {}

    @classmethod
    def get(cls, nx: int, ny: int, kx: int, ky: int) -> "SeriesSpace":
        sig = (nx, ny, kx, ky)
        sp = cls._cache.get(sig)
        if sp is None:
            sp = cls(nx, ny, kx, ky)
            cls._cache[sig] = sp
        return sp

    def _lookup(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self._key_sorted, keys)
        return self._key_order[pos]

    def mul_table(self):
        if self._mul_table is None:
            ok = (self.xdeg[:, None] + self.xdeg[None, :] <= self.kx) & (
                self.ydeg[:, None] + self.ydeg[None, :] <= self.ky
            )
            ia, ib = np.nonzero(ok)
            ic = self._lookup(self._key[ia] + self._key[ib])
            self._mul_table = (ia, ib, ic)
        return self._mul_table

    def deriv_info(self, var: int):
        """Target space and coefficient map for d/d(var)."""
        info = self._deriv_info.get(var)
        if info is None:
            if var < self.nx:
                tgt = SeriesSpace.get(self.nx, self.ny, self.kx - 1, self.ky)
            else:
                tgt = SeriesSpace.get(self.nx, self.ny, self.kx, self.ky - 1)
            src_idx = np.empty(tgt.size, dtype=np.int64)
            factor = np.empty(tgt.size)
            for j, e in enumerate(tgt.exponents):
                lifted = list(e)
                lifted[var] += 1
                src_idx[j] = self.index[tuple(lifted)]
                factor[j] = lifted[var]
            info = (tgt, src_idx, factor)
            self._deriv_info[var] = info
        return info

    def restrict_info(self, kx: int, ky: int):
        info = self._restrict_info.get((kx, ky))
        if info is None:
            tgt = SeriesSpace.get(self.nx, self.ny, kx, ky)
            src_idx = np.array([self.index[e] for e in tgt.exponents], dtype=np.int64)
            info = (tgt, src_idx)
            self._restrict_info[(kx, ky)] = info
        return info

    def constant(self, v: float) -> "Series":
        c = np.zeros(self.size)
        c[0] = v
        return Series(self, c)

    def variable(self, var: int, base: float) -> "Series":
        if var >= self.nvars:
            raise ArgumentError(f"variable index {var} out of range for {self.nvars} variables")
        cap = self.kx if var < self.nx else self.ky
        if cap < 1:
            raise ArgumentError("cannot create a variable in a zero-order group")
        c = np.zeros(self.size)
        c[0] = base
        e = [0] * self.nvars
        e[var] = 1
        c[self.index[tuple(e)]] = 1.0
        return Series(self, c)


def _binom_real(p: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= (p - j) / (j + 1)
    return out


class Series:
    """A truncated Taylor polynomial; immutable by convention."""

    __slots__ = ("space", "c")

    def __init__(self, space: SeriesSpace, c: np.ndarray):
        self.space = space
        self.c = c

    # -- basic ring operations -------------------------------------------

    def _coerce(self, other) -> "Series | None":
        if isinstance(other, Series):
            if other.space is not self.space:
                raise ArgumentError("series from different truncation spaces")
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            c = self.c.copy()
            c[0] += other
            return Series(self.space, c)
        return Series(self.space, self.c + o.c)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.space, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return Series(self.space, self.c * other)
        ia, ib, ic = self.space.mul_table()
        prod_ = self.c[ia] * o.c[ib]
        return Series(self.space, np.bincount(ic, weights=prod_, minlength=self.space.size))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if other == 0:
                raise EvaluationError("division by zero scalar")
            return Series(self.space, self.c / other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) or (isinstance(p, float) and p.is_integer()):
            p = int(p)
            if p < 0:
                return self.reciprocal() ** (-p)
            out = self.space.constant(1.0)
            b = self
            while p:
                if p & 1:
                    out = out * b
                p >>= 1
                if p:
                    b = b * b
            return out
        u0 = self.value
        if u0 <= 0.0:
            raise EvaluationError(f"non-integer power of non-positive base {u0}")
        return self._compose([_binom_real(p, k) * u0 ** (p - k) for k in range(self._depth() + 1)])

    # -- analytic composition --------------------------------------------

    def _depth(self) -> int:
        return self.space.kx + self.space.ky

    def _compose(self, coeffs: list[float]) -> "Series":
        """Evaluate sum_k coeffs[k] * (self - value)^k by Horner."""
        hat = Series(self.space, self.c.copy())
        hat.c[0] = 0.0
        acc = self.space.constant(coeffs[-1])
        for k in range(len(coeffs) - 2, -1, -1):
            acc = acc * hat + coeffs[k]
        return acc

    @property
    def value(self) -> float:
        return float(self.c[0])

    def reciprocal(self) -> "Series":
        u0 = self.value
        if u0 == 0.0:
            raise EvaluationError("division by a series with zero value")
        return self._compose([(-1.0) ** k / u0 ** (k + 1) for k in range(self._depth() + 1)])

    def sqrt(self) -> "Series":
        u0 = self.value
        if u0 <= 0.0:
            raise EvaluationError(f"sqrt of non-positive series value {u0}")
        return self._compose(
            [_binom_real(0.5, k) * u0 ** (0.5 - k) for k in range(self._depth() + 1)]
        )

    def exp(self) -> "Series":
        e0 = math.exp(self.value)
        return self._compose([e0 / math.factorial(k) for k in range(self._depth() + 1)])

    def sin(self) -> "Series":
        u0 = self.value
        cyc = (math.sin(u0), math.cos(u0), -math.sin(u0), -math.cos(u0))
        return self._compose([cyc[k % 4] / math.factorial(k) for k in range(self._depth() + 1)])

    def cos(self) -> "Series":
        u0 = self.value
        cyc = (math.cos(u0), -math.sin(u0), -math.cos(u0), math.sin(u0))
        return self._compose([cyc[k % 4] / math.factorial(k) for k in range(self._depth() + 1)])

    # -- derivative extraction -------------------------------------------

    def deriv(self, var: int) -> "Series":
        """Series of d(self)/d(var) in the order-reduced space."""
        tgt, src_idx, factor = self.space.deriv_info(var)
        return Series(tgt, self.c[src_idx] * factor)

    def partial(self, exponents: Sequence[int]) -> float:
        """Value of the mixed partial derivative with the given exponent tuple."""
        i = self.space.index[tuple(exponents)]
        return float(self.c[i] * self.space.fact[i])

    def in_space(self, space: SeriesSpace) -> "Series":
        if space is self.space:
            return self
        if space.kx > self.space.kx or space.ky > self.space.ky:
            raise ArgumentError("cannot restrict a series to a larger space")
        _, src_idx = self.space.restrict_info(space.kx, space.ky)
        return Series(space, self.c[src_idx])

    def __repr__(self):
        sp = self.space
        return f"Series(nx={sp.nx}, ny={sp.ny}, kx={sp.kx}, ky={sp.ky}, value={self.value})"


# -- public jet surface ----------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """Exact mixed partial derivatives of a scalar field at one (x, y).

    ``coeffs`` maps exponent multi-indices over (x_1..x_n, y_1..y_n) to
    partial-derivative values; exponent storage makes Schwarz symmetry a
    structural fact (any ordering of the same differentiation indices
    names the same key).
    """

    base_x: tuple[float, ...]
    base_y: tuple[float, ...]
    order_x: int
    order_y: int
    coeffs: Mapping[tuple[int, ...], float] = field(repr=False)

    @property
    def value(self) -> float:
        n = len(self.base_x) + len(self.base_y)
        return self.coeffs[(0,) * n]

    def partial(self, x_vars: Sequence[int] = (), y_vars: Sequence[int] = ()) -> float:
        """Partial derivative by differentiation-index lists (order irrelevant)."""
        n = len(self.base_x)
        e = [0] * (n + len(self.base_y))
        for i in x_vars:
            e[i] += 1
        for i in y_vars:
            e[n + i] += 1
        return self.coeffs[tuple(e)]


def _as_series(v, space: SeriesSpace) -> Series:
    return v if isinstance(v, Series) else space.constant(float(v))


def jet_eval(
    f: ScalarField,
    x: Sequence[float],
    y: Sequence[float],
    order_x: int = MAX_ORDER_X,
    order_y: int = MAX_ORDER_Y,
) -> Jet:
    """Evaluate every mixed partial of ``f`` at (x, y) up to the given orders.

    ``f`` receives the chart coordinates as ``Series`` values and must
    combine them with ordinary arithmetic (+, -, *, /, **) and the
    ``sqrt``/``sin``/``cos``/``exp`` methods; a constant return is accepted.
    """
    if not (0 <= order_x <= MAX_ORDER_X):
        raise ArgumentError(f"order_x must be in [0, {MAX_ORDER_X}], got {order_x}")
    if not (0 <= order_y <= MAX_ORDER_Y):
        raise ArgumentError(f"order_y must be in [0, {MAX_ORDER_Y}], got {order_y}")
    nx, ny = len(x), len(y)
    space = SeriesSpace.get(nx, ny, order_x, order_y)
    if order_x > 0:
        xs = [space.variable(i, float(x[i])) for i in range(nx)]
    else:
        xs = [space.constant(float(v)) for v in x]
    if order_y > 0:
        ys = [space.variable(nx + i, float(y[i])) for i in range(ny)]
    else:
        ys = [space.constant(float(v)) for v in y]
    out = _as_series(f(xs, ys), space)
    if not np.all(np.isfinite(out.c)):
        bad = int(np.flatnonzero(~np.isfinite(out.c))[0])
        raise EvaluationError(
            f"non-finite value propagated into coefficient {space.exponents[bad]}"
        )
    coeffs = {e: float(out.c[i] * space.fact[i]) for i, e in enumerate(space.exponents)}
    return Jet(tuple(map(float, x)), tuple(map(float, y)), order_x, order_y, coeffs)


def _central_difference(
    f: ScalarField, x: list[float], y: list[float], e: list[int], h: float
) -> float:
    """Nested central differences for the mixed partial with exponents ``e``."""
    for d in range(len(e)):
        if e[d] > 0:
            e2 = list(e)
            e2[d] -= 1
            nx = len(x)
            xp, yp = list(x), list(y)
            xm, ym = list(x), list(y)
            if d < nx:
                xp[d] += h
                xm[d] -= h
            else:
                yp[d - nx] += h
                ym[d - nx] -= h
            fp = _central_difference(f, xp, yp, e2, h)
            fm = _central_difference(f, xm, ym, e2, h)
            return (fp - fm) / (2.0 * h)
    space = SeriesSpace.get(len(x), len(y), 0, 0)
    xs = [space.constant(v) for v in x]
    ys = [space.constant(v) for v in y]
    return _as_series(f(xs, ys), space).value


def fd_cross_check(
    f: ScalarField,
    x: Sequence[float],
    y: Sequence[float],
    multi_index: Sequence[int],
    h: float,
) -> float:
    """|jet partial - Richardson-extrapolated central difference|.

    Independent oracle for ``jet_eval``: shares no code path with the
    series arithmetic.
    """
    if h == 0:
        raise ArgumentError("step h must be nonzero")
    h = abs(float(h))
    e = list(int(k) for k in multi_index)
    nx, ny = len(x), len(y)
    if len(e) != nx + ny or any(k < 0 for k in e):
        raise ArgumentError("multi_index must hold one nonnegative exponent per variable")
    ox, oy = sum(e[:nx]), sum(e[nx:])
    if ox > MAX_ORDER_X or oy > MAX_ORDER_Y:
        raise ArgumentError("multi_index exceeds the supported differentiation orders")
    jet = jet_eval(f, x, y, ox, oy)
    d_h = _central_difference(f, list(map(float, x)), list(map(float, y)), e, h)
    d_h2 = _central_difference(f, list(map(float, x)), list(map(float, y)), e, h / 2.0)
    richardson = (4.0 * d_h2 - d_h) / 3.0
    return abs(jet.coeffs[tuple(e)] - richardson)
