"""Truncated Taylor (jet) arithmetic over complex scalars in two variables.

A jet stores the Taylor coefficients of a scalar field at a base point up to
a fixed total order K, i.e. ``coeffs[j1, j2] = d^(j1+j2) f / (j1! j2!)``.
Everything downstream (connection forms, curvature, root jets) is built on
top of this module, so operations are kept exact to the truncation order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

DEFAULT_ORDER = 6


class JetError(ValueError):
    pass


def _binom(n, k):
    return math.comb(n, k)


class Jet:
    """Truncated Taylor expansion at a base point, total order <= order.

    Immutable by convention: operations return new jets and never modify
    the coefficient array of an operand.
    """

    __slots__ = ("base", "order", "c")

    def __init__(self, base, order, coeffs=None):
        if order < 0:
            raise JetError("jet order must be >= 0")
        self.base = (complex(base[0]), complex(base[1]))
        self.order = int(order)
        if coeffs is None:
            self.c = np.zeros((order + 1, order + 1), dtype=complex)
        else:
            self.c = coeffs

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value, base, order):
        j = cls(base, order)
        j.c[0, 0] = complex(value)
        return j

    @classmethod
    def variable(cls, axis, base, order):
        """The coordinate function x (axis=0) or y (axis=1) as a jet."""
        j = cls(base, order)
        j.c[0, 0] = j.base[axis]
        if order >= 1:
            if axis == 0:
                j.c[1, 0] = 1.0
            else:
                j.c[0, 1] = 1.0
        return j

    # -- basic queries -------------------------------------------------

    @property
    def value(self):
        return self.c[0, 0]

    def extract(self, index):
        """Raw partial derivative d^J f at the base point (J! * coeff)."""
        j1, j2 = index
        if j1 + j2 > self.order:
            raise JetError(f"multi-index {index} exceeds jet order {self.order}")
        return self.c[j1, j2] * math.factorial(j1) * math.factorial(j2)

    def _check(self, other):
        if self.base != other.base:
            raise JetError("jet base points differ")
        if self.order != other.order:
            raise JetError("jet orders differ")

    # -- ring operations -----------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Jet):
            out = Jet(self.base, self.order, self.c.copy())
            out.c[0, 0] += complex(other)
            return out
        self._check(other)
        return Jet(self.base, self.order, self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base, self.order, -self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -complex(other))

    def __rsub__(self, other):
        return (-self) + complex(other)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.base, self.order, self.c * complex(other))
        self._check(other)
        K = self.order
        out = np.zeros((K + 1, K + 1), dtype=complex)
        a = self.c
        b = other.c
        idx = np.argwhere(a != 0)
        for j1, j2 in idx:
            if j1 + j2 > K:
                continue
            out[j1:, j2:] += a[j1, j2] * b[: K + 1 - j1, : K + 1 - j2]
        return Jet(self.base, self.order, _mask(out, K))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / complex(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * complex(other)

    def reciprocal(self):
        """Multiplicative inverse; requires a nonzero constant term."""
        c0 = self.c[0, 0]
        if c0 == 0 or not np.isfinite(c0):
            raise JetError("reciprocal of jet with zero constant term (pole)")
        # Newton iteration r <- r(2 - u r), quadratic convergence in order.
        r = Jet.constant(1.0 / c0, self.base, self.order)
        n = 1
        while n <= self.order:
            r = r * (2.0 - self * r)
            n *= 2
        return r

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise JetError("integer power only; use jet_pow for fractional")
        out = Jet.constant(1.0, self.base, self.order)
        p = self
        k = n
        while k:
            if k & 1:
                out = out * p
            p = p * p if k > 1 else p
            k >>= 1
        return out

    # -- calculus -------------------------------------------------------

    def deriv(self, axis):
        """Partial derivative; result has order reduced by one."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        K = self.order - 1
        out = np.zeros((K + 1, K + 1), dtype=complex)
        if axis == 0:
            for j1 in range(K + 1):
                out[j1, : K + 1 - j1] = (j1 + 1) * self.c[j1 + 1, : K + 1 - j1]
        else:
            for j1 in range(K + 1):
                for j2 in range(K + 1 - j1):
                    out[j1, j2] = (j2 + 1) * self.c[j1, j2 + 1]
        return Jet(self.base, K, out)

    def truncate(self, order):
        if order > self.order:
            raise JetError("cannot raise jet order by truncation")
        out = self.c[: order + 1, : order + 1].copy()
        return Jet(self.base, order, _mask(out, order))

    def swap_axes(self):
        """The same expansion with the two variables interchanged."""
        return Jet((self.base[1], self.base[0]), self.order,
                   self.c.T.copy())

    def nilpotent_part(self):
        out = self.c.copy()
        out[0, 0] = 0.0
        return Jet(self.base, self.order, out)

    def max_abs(self):
        return float(np.max(np.abs(self.c)))

    def __repr__(self):
        return f"Jet(base={self.base}, order={self.order}, value={self.value})"


def _mask(arr, K):
    n = arr.shape[0]
    for j1 in range(n):
        if j1 + 0 <= K:
            arr[j1, K - j1 + 1:] = 0.0
    return arr


def jets_same_frame(*jets):
    base = jets[0].base
    order = min(j.order for j in jets)
    return [j.truncate(order) if j.order != order else j for j in jets]


# -- series / elementary functions -------------------------------------


def compose_series(coeffs, u):
    """Sum_m coeffs[m] * (u - u0)^m where u0 is u's constant term.

    ``coeffs`` are Taylor coefficients of some univariate g at u0, so the
    result is the jet of g(u).
    """
    w = u.nilpotent_part()
    out = Jet.constant(0.0, u.base, u.order)
    # Horner from the top; w is nilpotent so terms beyond the order vanish.
    top = min(len(coeffs) - 1, u.order)
    for m in range(top, -1, -1):
        out = out * w + complex(coeffs[m])
    return out


def jet_pow(u, s):
    """u**s for arbitrary complex/fractional s, principal branch at u0."""
    c0 = u.value
    if c0 == 0:
        raise JetError("fractional power of jet with zero constant term")
    s = complex(s)
    head = np.exp(s * np.log(c0))
    w = u.nilpotent_part() * (1.0 / c0)
    out = Jet.constant(0.0, u.base, u.order)
    coeffs = [1.0 + 0j]
    for m in range(1, u.order + 1):
        coeffs.append(coeffs[-1] * (s - (m - 1)) / m)  # binomial series
    for m in range(u.order, -1, -1):
        out = out * w + coeffs[m]
    return out * head


def jet_log(u):
    """log(u), principal branch at the constant term."""
    c0 = u.value
    if c0 == 0:
        raise JetError("log of jet with zero constant term")
    w = u.nilpotent_part() * (1.0 / c0)
    out = Jet.constant(0.0, u.base, u.order)
    for m in range(u.order, 0, -1):
        out = out * w + ((-1) ** (m + 1)) / m
    out = out * w
    return out + np.log(c0)


def jet_cbrt(u, target=None):
    """A cube root of u; the branch whose constant term is nearest target."""
    c0 = u.value
    if c0 == 0:
        raise JetError("cube root of jet with zero constant term")
    r = jet_pow(u, Fraction(1, 3))
    if target is not None:
        omega = np.exp(2j * np.pi / 3)
        best = min((r.value, r.value * omega, r.value * omega**2),
                   key=lambda z: abs(z - target))
        r = r * (best / r.value)
    return r


def jet_tan(u):
    """tan(u) via the Taylor recursion w' = 1 + w^2 at u's constant term."""
    t0 = u.value
    K = u.order
    c = np.zeros(K + 1, dtype=complex)
    c[0] = np.tan(t0)
    if abs(np.cos(t0)) < 1e-12:
        raise JetError("tan evaluated at a pole")
    for m in range(K):
        sq = sum(c[i] * c[m - i] for i in range(m + 1))
        c[m + 1] = ((1.0 if m == 0 else 0.0) + sq) / (m + 1)
    return compose_series(c, u)


# -- polynomial expressions ---------------------------------------------


def _coerce_coef(coef):
    if isinstance(coef, str):
        return Fraction(coef)
    if isinstance(coef, (Fraction, int)):
        return Fraction(coef)
    return complex(coef)


@dataclass(frozen=True)
class PolyExpr:
    """Sparse polynomial with exact rational or complex coefficients.

    ``terms`` maps exponent tuples to coefficients; zero coefficients are
    dropped on construction.  Arity is free (2 for plane fields, 3 for full
    potentials) but jet lifting is defined for two variables only.
    """

    terms: tuple

    @classmethod
    def from_dict(cls, d):
        items = []
        seen = set()
        for exps, coef in d.items():
            exps = tuple(int(e) for e in exps)
            if exps in seen:
                raise ValueError(f"duplicate exponent tuple {exps}")
            seen.add(exps)
            coef = _coerce_coef(coef)
            if coef != 0:
                items.append((exps, coef))
        items.sort(key=lambda t: t[0])
        return cls(tuple(items))

    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def const(cls, value, nvars=2):
        return cls.from_dict({(0,) * nvars: value})

    @classmethod
    def var(cls, axis, nvars=2):
        e = [0] * nvars
        e[axis] = 1
        return cls.from_dict({tuple(e): 1})

    # arity of the exponent tuples (None for the zero polynomial)
    @property
    def nvars(self):
        return len(self.terms[0][0]) if self.terms else None

    def __add__(self, other):
        if not isinstance(other, PolyExpr):
            nv = self.nvars or 2
            other = PolyExpr.const(other, nv)
        d = {}
        for exps, coef in self.terms + other.terms:
            d[exps] = d.get(exps, 0) + coef
        return PolyExpr(tuple(sorted(
            (e, c) for e, c in d.items() if c != 0)))

    __radd__ = __add__

    def __neg__(self):
        return PolyExpr(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        if not isinstance(other, PolyExpr):
            nv = self.nvars or 2
            other = PolyExpr.const(other, nv)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, PolyExpr):
            other = _coerce_coef(other)
            return PolyExpr(tuple((e, c * other) for e, c in self.terms
                                  if c * other != 0))
        d = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, 0) + c1 * c2
        return PolyExpr(tuple(sorted(
            (e, c) for e, c in d.items() if c != 0)))

    __rmul__ = __mul__

    def diff(self, axis):
        d = {}
        for exps, coef in self.terms:
            if exps[axis] == 0:
                continue
            e = list(exps)
            n = e[axis]
            e[axis] = n - 1
            d[tuple(e)] = d.get(tuple(e), 0) + coef * n
        return PolyExpr(tuple(sorted(d.items())))

    def __call__(self, *point):
        total = 0j
        for exps, coef in self.terms:
            term = complex(coef)
            for e, p in zip(exps, point):
                term *= complex(p) ** e
            total += term
        return total

    def degree(self):
        return max((sum(e) for e, _ in self.terms), default=0)

    def jet(self, point, order):
        """Jet lift at a point; exact for polynomials (they are entire)."""
        if order < 0:
            raise JetError("jet order must be >= 0")
        if self.terms and self.nvars != 2:
            raise JetError("jet lifting is defined for 2-variable polynomials")
        out = Jet((point[0], point[1]), order)
        x0, y0 = out.base
        for (e1, e2), coef in self.terms:
            cc = complex(coef)
            for j1 in range(min(e1, order) + 1):
                fx = _binom(e1, j1) * x0 ** (e1 - j1)
                for j2 in range(min(e2, order - j1) + 1):
                    out.c[j1, j2] += cc * fx * _binom(e2, j2) * y0 ** (e2 - j2)
        return out


def jet_to_polyexpr(jet):
    """Expand a jet into an absolute-coordinate polynomial (Taylor shift)."""
    x0, y0 = jet.base
    x = PolyExpr.var(0)
    y = PolyExpr.var(1)
    dx = x - PolyExpr.const(x0)
    dy = y - PolyExpr.const(y0)
    out = PolyExpr.zero()
    dx_pows = [PolyExpr.const(1)]
    dy_pows = [PolyExpr.const(1)]
    for _ in range(jet.order):
        dx_pows.append(dx_pows[-1] * dx)
        dy_pows.append(dy_pows[-1] * dy)
    for j1 in range(jet.order + 1):
        for j2 in range(jet.order + 1 - j1):
            c = jet.c[j1, j2]
            if c != 0:
                out = out + dx_pows[j1] * dy_pows[j2] * c
    return out
