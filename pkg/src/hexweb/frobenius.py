"""WDVV potentials and the Frobenius-algebra structure they induce.

A potential is a scalar f(x, y) entering one of two normal forms of the
full potential F(t, x, y):

    case A:  F = t^2 y / 2 + t x^2 / 2 + f(x, y)
    case B:  F = t^3 / 6 + t x y + f(x, y)

Each case carries its own associativity equation, multiplication table,
and flat metric.  This module computes multiplication tables, idempotents,
Euler weights, canonical eigenvalues, booklet web directions on t-slices,
and Taylor-series solutions of the associativity equations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .cubic import (PolyCoeffField, characteristic_coeffs_from_f3,
                    proj_distance, roots)
from .jets import Jet, PolyExpr, jet_to_polyexpr


class NonSemisimpleError(ValueError):
    """Multiplication operator has (numerically) coinciding eigenvalues."""


class NotQuasiHomogeneousError(ValueError):
    """No weight assignment makes every monomial of F the same degree."""


# ---------------------------------------------------------------------------
# Potentials


def _as_two_var(p):
    """Coerce a PolyExpr in x alone into the (x, y) arity."""
    if not p.terms:
        return p
    if p.nvars == 2:
        return p
    if p.nvars == 1:
        return PolyExpr(tuple(((e[0], 0), c) for e, c in p.terms))
    raise ValueError("expected a polynomial in x or in (x, y)")


@dataclass
class Potential:
    """A solution candidate f(x, y) of one of the associativity equations.

    ``case`` selects the normal form of the full potential (see module
    docstring); f is a polynomial with rational or complex coefficients
    (series solutions arrive here as truncated polynomials).
    """

    case: str
    f: PolyExpr

    def __post_init__(self):
        if self.case not in ("A", "B"):
            raise ValueError(f"unknown case {self.case!r}")
        self.f = _as_two_var(self.f)

    # -- third derivatives of f, cached as polynomials -------------------

    @cached_property
    def f3(self):
        """Dict of the four third partials fxxx, fxxy, fxyy, fyyy."""
        fx = self.f.diff(0)
        fxx = fx.diff(0)
        fxy = fx.diff(1)
        fyy = self.f.diff(1).diff(1)
        return {
            "xxx": fxx.diff(0),
            "xxy": fxx.diff(1),
            "xyy": fxy.diff(1),
            "yyy": fyy.diff(1),
        }

    @cached_property
    def residual_poly(self):
        """The associativity equation's left-hand side as a polynomial."""
        d = self.f3
        if self.case == "A":
            return d["yyy"] - d["xxy"] * d["xxy"] + d["xxx"] * d["xyy"]
        return d["xxx"] * d["yyy"] - d["xxy"] * d["xyy"] - 1

    def associativity_residual(self, x, y):
        return self.residual_poly(x, y)

    def characteristic_field(self):
        """Cubic direction field of the characteristic curves of f."""
        d = self.f3
        one = PolyExpr.const(1)
        a, b, c, r = characteristic_coeffs_from_f3(
            self.case, d["xxx"], d["xxy"], d["xyy"], d["yyy"], one)
        return PolyCoeffField(a, b, c, r)

    def full_potential(self):
        """F(t, x, y) as a 3-variable polynomial (t = axis 0)."""
        t = PolyExpr.var(0, 3)
        x = PolyExpr.var(1, 3)
        y = PolyExpr.var(2, 3)
        f3v = PolyExpr(tuple(((0, e[0], e[1]), c) for e, c in self.f.terms))
        if self.case == "A":
            head = t * t * y * Fraction(1, 2) + t * x * x * Fraction(1, 2)
        else:
            head = t * t * t * Fraction(1, 6) + t * x * y
        return head + f3v

    def eta(self):
        """Flat metric eta_{ab} = F_{t t^a t^b} in the (t, x, y) basis."""
        if self.case == "A":
            return np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex)
        return np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)


def solution_potential(case):
    """The simplest polynomial solution of each associativity equation.

    Case A: f = x^2 y^2 / 4 + y^5 / 60; case B: f = x^3 / 6 + y^3 / 6.
    Both solve their equation identically (exact rational arithmetic).
    """
    if case == "A":
        f = PolyExpr.from_dict({(2, 2): Fraction(1, 4),
                                (0, 5): Fraction(1, 60)})
    elif case == "B":
        f = PolyExpr.from_dict({(3, 0): Fraction(1, 6),
                                (0, 3): Fraction(1, 6)})
    else:
        raise ValueError(f"unknown case {case!r}")
    return Potential(case=case, f=f)


# ---------------------------------------------------------------------------
# Algebra structure at a point


@dataclass
class FrobeniusPoint:
    """Structure constants of the tangent algebra at one point.

    ``c[al, be]`` is the product vector of basis vectors al and be in the
    (dt, dx, dy) basis; unity is e = dt.
    """

    point: tuple
    case: str
    c: np.ndarray
    eta: np.ndarray

    e = (1.0, 0.0, 0.0)


def multiplication_table(pot, point):
    """Structure constants at a point (t, x, y) from the case's table."""
    t, x, y = (complex(v) for v in point)
    d = {k: complex(p(x, y)) for k, p in pot.f3.items()}
    c = np.zeros((3, 3, 3), dtype=complex)
    # unity row/column
    for i in range(3):
        c[0, i, i] = 1.0
        c[i, 0, i] = 1.0
    if pot.case == "A":
        c[1, 1] = (d["xxy"], d["xxx"], 1.0)
        c[1, 2] = c[2, 1] = (d["xyy"], d["xxy"], 0.0)
        c[2, 2] = (d["yyy"], d["xyy"], 0.0)
    else:
        c[1, 1] = (0.0, d["xxy"], d["xxx"])
        c[1, 2] = c[2, 1] = (1.0, d["xyy"], d["xxy"])
        c[2, 2] = (0.0, d["yyy"], d["xyy"])
    return FrobeniusPoint(point=(t, x, y), case=pot.case, c=c, eta=pot.eta())


def multiply(u, v, fp):
    """Bilinear product of tangent vectors in the (dt, dx, dy) basis."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return np.einsum("a,b,abg->g", u, v, fp.c)


def mult_operator(w, fp):
    """Matrix of v -> w . v in the (dt, dx, dy) basis."""
    return np.einsum("a,abg->gb", np.asarray(w, dtype=complex), fp.c)


def associator_norm(fp, rng=None, samples=10):
    """Max |(u.v).w - u.(v.w)| over random unit triples (sanity probe)."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(samples):
        u, v, w = (rng.standard_normal(3) + 1j * rng.standard_normal(3)
                   for _ in range(3))
        lhs = multiply(multiply(u, v, fp), w, fp)
        rhs = multiply(u, multiply(v, w, fp), fp)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _canonical_sort(vectors):
    def key(v):
        return tuple((round(z.real, 9), round(z.imag, 9)) for z in v)
    return sorted(vectors, key=key)


def idempotents(fp, rng=None, tol=1e-8, max_tries=8):
    """The three idempotents e_i (e_i . e_j = delta_ij e_i, sum = e).

    Diagonalizes the multiplication operator of a randomized vector and
    rescales each eigenvector u (with u.u = kappa u) by 1/kappa; retries
    with a fresh vector on eigenvalue collision.
    """
    rng = np.random.default_rng(rng)
    last_gap = None
    for _ in range(max_tries):
        w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        M = mult_operator(w, fp)
        vals, vecs = np.linalg.eig(M)
        gap = min(abs(vals[i] - vals[j])
                  for i, j in itertools.combinations(range(3), 2))
        last_gap = gap
        if gap <= tol * (1.0 + np.max(np.abs(vals))):
            continue
        out = []
        ok = True
        for k in range(3):
            u = vecs[:, k]
            uu = multiply(u, u, fp)
            m = int(np.argmax(np.abs(u)))
            kappa = uu[m] / u[m]
            if abs(kappa) <= tol:
                ok = False
                break
            e = u / kappa
            if np.max(np.abs(multiply(e, e, fp) - e)) > 1e-7 * (
                    1.0 + np.max(np.abs(e)) ** 2):
                ok = False
                break
            out.append(e)
        if not ok:
            continue
        total = out[0] + out[1] + out[2]
        if np.max(np.abs(total - np.array([1.0, 0, 0]))) > 1e-6 * (
                1.0 + np.max(np.abs(out))):
            continue
        return _canonical_sort(out)
    raise NonSemisimpleError(
        f"algebra not semisimple at {fp.point}: eigenvalue gap {last_gap:.2e}")


# ---------------------------------------------------------------------------
# Euler data and canonical eigenvalues


@dataclass
class EulerData:
    """Quasi-homogeneity weights (w_t, w_x, w_y, w_F), normalized w_t = 1.

    The Euler field is E = w_t t dt + w_x x dx + w_y y dy and every
    monomial of the full potential F has weighted degree w_F.
    """

    weights: tuple

    @property
    def w_t(self):
        return self.weights[0]

    @property
    def w_x(self):
        return self.weights[1]

    @property
    def w_y(self):
        return self.weights[2]

    @property
    def w_F(self):
        return self.weights[3]

    def unity_rescaled(self):
        """True when L_E(e) is a nonzero multiple of e (w_t != 0)."""
        return self.w_t != 0

    def euler_vector(self, point):
        t, x, y = point
        return np.array([self.w_t * t, self.w_x * x, self.w_y * y],
                        dtype=complex)


def euler_data(pot):
    """Solve the linear weight system over the monomials of F."""
    F = pot.full_potential()
    exps = [e for e, _ in F.terms]
    if not exps:
        return EulerData(weights=(Fraction(1), Fraction(0), Fraction(0),
                                  Fraction(0)))
    # unknowns (w_x, w_y, w_F) with w_t = 1:  jx wx + jy wy - wF = -jt
    A = np.array([[jx, jy, -1.0] for (jt, jx, jy) in exps])
    b = np.array([-float(jt) for (jt, jx, jy) in exps])
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    weights = (Fraction(1),
               Fraction(sol[0]).limit_denominator(64),
               Fraction(sol[1]).limit_denominator(64),
               Fraction(sol[2]).limit_denominator(64))
    for (jt, jx, jy) in exps:
        if jt * weights[0] + jx * weights[1] + jy * weights[2] != weights[3]:
            raise NotQuasiHomogeneousError(
                f"monomial {(jt, jx, jy)} breaks the weight system")
    return EulerData(weights=weights)


@dataclass
class CanonicalValues:
    """Eigen-data of multiplication by the Euler field at a point."""

    lambdas: tuple
    semisimple: bool
    idempotents: tuple = dc_field(default=None)


def mu_E(pot, point, euler=None, gap_tol=1e-8):
    """Eigenvalues of v -> E . v, sorted lexicographically in (Re, Im)."""
    ed = euler if euler is not None else euler_data(pot)
    fp = multiplication_table(pot, point)
    E = ed.euler_vector(fp.point)
    vals = np.linalg.eigvals(mult_operator(E, fp))
    vals = sorted(vals, key=lambda z: (round(z.real, 10), round(z.imag, 10)))
    gap = min(abs(vals[i] - vals[j])
              for i, j in itertools.combinations(range(3), 2))
    semisimple = gap > gap_tol * (1.0 + max(abs(v) for v in vals))
    return CanonicalValues(lambdas=tuple(vals), semisimple=semisimple)


# ---------------------------------------------------------------------------
# Booklet webs on t-slices


def booklet_directions(pot, slice_point, t0=0.0, rng=None, table=None):
    """Projective directions [X : Y] of the idempotents on a t-slice.

    Each idempotent N = T dt + X dx + Y dy is projected along e = dt to
    the slice tangent plane; the web leaf through the point runs in the
    direction (X, Y).
    """
    x, y = slice_point
    fp = table if table is not None else multiplication_table(
        pot, (t0, x, y))
    out = []
    for e in idempotents(fp, rng=rng):
        X, Y = e[1], e[2]
        m = max(abs(X), abs(Y))
        if m == 0:
            raise NonSemisimpleError(
                f"idempotent parallel to unity at {(t0, x, y)}")
        out.append((X / m, Y / m))
    return out


def theorem2_residual(pot, point, rng=None, table=None):
    """Mismatch between booklet directions and characteristic leaf directions.

    Returns the max (over the optimal matching) projective distance between
    the idempotent slice directions and the leaf directions of the
    characteristic cubic at the same (x, y).
    """
    t0, x, y = point
    dirs = booklet_directions(pot, (x, y), t0=t0, rng=rng, table=table)
    field = pot.characteristic_field()
    leaf = [(q, -p) for p, q in roots(field, (x, y))]
    best = np.inf
    for perm in itertools.permutations(range(3)):
        worst = max(proj_distance(dirs[i], leaf[perm[i]]) for i in range(3))
        best = min(best, worst)
    return float(best)


# ---------------------------------------------------------------------------
# Series solutions of the associativity equations


def taylor_solve(case, data, order=8, x0=0.0):
    """Solve the associativity equation as a y-evolution from slice data.

    ``data`` are three polynomials in x giving f(., 0), f_y(., 0) and
    f_yy(., 0); the returned Potential's f is the unique Taylor polynomial
    of total order <= order matching the data and satisfying the equation
    to order (order - 3) at (x0, 0).  Case B requires f_xxx nonzero at the
    base point (the equation solves for f_yyy through division by f_xxx).
    """
    if case not in ("A", "B"):
        raise ValueError(f"unknown case {case!r}")
    base = (complex(x0), 0.0)
    g = [_as_two_var(p).jet(base, order) for p in data]
    U = np.zeros((order + 1, order + 1), dtype=complex)
    for k, fac in ((0, 1.0), (1, 1.0), (2, 0.5)):
        for j in range(order + 1 - k):
            U[j, k] = g[k].c[j, 0] * fac
    if case == "B" and abs(6.0 * U[3, 0]) < 1e-12:
        raise ValueError("f_xxx vanishes at the base point (case B)")
    one = Jet.constant(1.0, base, order - 3)
    for k in range(order - 2):
        f = Jet(base, order, U.copy())
        fxx = f.deriv(0).deriv(0)
        fxxx = fxx.deriv(0)
        fxxy = fxx.deriv(1)
        fxyy = f.deriv(0).deriv(1).deriv(1)
        if case == "A":
            R = fxxy * fxxy - fxxx * fxyy
        else:
            R = (one + fxxy * fxyy) * fxxx.reciprocal()
        fac = (k + 1) * (k + 2) * (k + 3)
        for j in range(order - 2 - k):
            U[j, k + 3] = R.c[j, k] / fac
    return Potential(case=case, f=jet_to_polyexpr(Jet(base, order, U)))


# ---------------------------------------------------------------------------
# Idempotent-coordinate parallel transport on a t-slice


def _match_idempotents(ref, new):
    best = None
    best_cost = np.inf
    for perm in itertools.permutations(range(3)):
        cost = sum(float(np.max(np.abs(ref[i] - new[perm[i]])))
                   for i in range(3))
        if cost < best_cost:
            best_cost = cost
            best = perm
    return [new[i] for i in best], best_cost


def continue_idempotents(pot, curve, t0=0.0, rng=None, max_step=0.05,
                         max_move=0.5):
    """Idempotent bases continued along a slice polyline.

    Returns the list of (point, [e1, e2, e3]) with a coherent labeling;
    subdivides steps whenever the idempotents move too much at once.
    """
    pts = [np.asarray(p, dtype=complex) for p in curve]
    here = idempotents(multiplication_table(pot, (t0, pts[0][0], pts[0][1])),
                       rng=rng)
    trail = [(pts[0], here)]
    for P0, P1 in zip(pts[:-1], pts[1:]):
        seg_len = abs(P1[0] - P0[0]) + abs(P1[1] - P0[1])
        n = max(1, int(np.ceil(seg_len / max_step)))
        stack = [(i / n, (i + 1) / n) for i in range(n - 1, -1, -1)]
        while stack:
            s0, s1 = stack.pop()
            pt = P0 + s1 * (P1 - P0)
            prev = trail[-1][1]
            new = idempotents(multiplication_table(pot, (t0, pt[0], pt[1])),
                              rng=rng)
            matched, cost = _match_idempotents(prev, new)
            if cost > max_move and (s1 - s0) > 1e-8:
                mid = 0.5 * (s0 + s1)
                stack.append((mid, s1))
                stack.append((s0, mid))
            else:
                trail.append((pt, matched))
    return trail


def frobenius_transport(pot, curve, v, t0=0.0, rng=None):
    """Transport a slice tangent vector by freezing idempotent coordinates.

    The vector (vx, vy) at the start of the curve is lifted to the 3-fold
    tangent space as (0, vx, vy), expanded in the idempotent basis there;
    the coordinates are held constant along the curve, and the resulting
    vector at the end point is projected back to the slice along e = dt.
    """
    trail = continue_idempotents(pot, curve, t0=t0, rng=rng)
    start = np.column_stack(trail[0][1])
    eta = np.linalg.solve(start, np.array([0.0, v[0], v[1]], dtype=complex))
    end = np.column_stack(trail[-1][1])
    w = end @ eta
    return (w[1], w[2])
