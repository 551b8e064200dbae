"""Chern connection of a cubic direction field, in three presentations.

1. gamma_cubic: closed formula in the coefficients (a, b, c, r) and their
   first partials, valid in the normalization sigma_1 + sigma_2 + sigma_3 = 0.
2. gamma_depressed: formula in the depressed slope cubic p^3 + A p + B.
3. gamma_from_definition: directly from normalized root jets via the area
   form and d(sigma_i) = h_i * Omega.

Curvature, the d(ln D) identity for characteristic webs, path integrals of
gamma, and Blaschke parallel transport live here too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .cubic import (DirectionField, SingularPointError, depress,
                    discriminant_of_coeffs, match_roots, normalize_roots,
                    regular_cutoff)
from .jets import Jet


@dataclass
class ConnectionValue:
    """gamma = gx dx + gy dy at a point; components kept as jets."""

    gx: Jet
    gy: Jet

    def values(self):
        return (self.gx.value, self.gy.value)

    def norm(self):
        return max(abs(self.gx.value), abs(self.gy.value))


@dataclass
class CurvatureValue:
    """Coefficient of d(gamma) against dx ^ dy."""

    K: complex


@dataclass
class FrameData:
    point: tuple
    triple: object
    omega0: complex
    h: tuple


# ---------------------------------------------------------------------------
# Closed formula in (a, b, c, r)


def _gamma12_jets(a, b, c, r):
    """(gamma_1, gamma_2, D) jets from coefficient jets of order >= 1."""
    ax, ay = a.deriv(0), a.deriv(1)
    bx, by = b.deriv(0), b.deriv(1)
    cx, cy = c.deriv(0), c.deriv(1)
    rx, ry = r.deriv(0), r.deriv(1)
    k = ax.order
    a, b, c, r = (j.truncate(k) for j in (a, b, c, r))

    g1 = ((15 * b * c * r - 27 * a * r * r - 4 * c * c * c) * ax
          + 6 * r * (3 * b * r - c * c) * ay
          + 2 * b * (c * c - 3 * b * r) * bx
          + 3 * r * (b * c - 9 * a * r) * by
          + b * (9 * a * r - b * c) * cx
          + 6 * r * (3 * a * c - b * b) * cy
          + 2 * b * (b * b - 3 * a * c) * rx
          + (9 * a * b * r - 12 * a * c * c + 3 * b * b * c) * ry)
    g2 = ((9 * a * c * r - 12 * b * b * r + 3 * b * c * c) * ax
          + 2 * c * (c * c - 3 * b * r) * ay
          + 6 * a * (3 * b * r - c * c) * bx
          + c * (9 * a * r - b * c) * by
          + 3 * a * (b * c - 9 * a * r) * cx
          + 2 * c * (b * b - 3 * a * c) * cy
          + 6 * a * (3 * a * c - b * b) * rx
          + (15 * a * b * c - 27 * a * a * r - 4 * b * b * b) * ry)
    D = discriminant_of_coeffs(a, b, c, r)
    return g1, g2, D


def gamma_cubic(field, point, order=0):
    """gamma = (gamma_1 dx + gamma_2 dy) / (3 D) as jets of given order."""
    x, y = point
    jets = field.coeff_jets(x, y, order + 1)
    co = np.array([j.value for j in jets])
    D0 = discriminant_of_coeffs(*co)
    if abs(D0) <= regular_cutoff(co):
        raise SingularPointError(
            f"discriminant ~ 0 at ({x}, {y}): |D| = {abs(D0):.3e}",
            disc=D0)
    g1, g2, D = _gamma12_jets(*jets)
    invD = (3 * D).reciprocal()
    return ConnectionValue(gx=g1 * invD, gy=g2 * invD)


# ---------------------------------------------------------------------------
# Depressed-form formula


def gamma_depressed_from_AB(A, B):
    """Connection components from (A, B) jets of order >= 1."""
    Ax, Ay = A.deriv(0), A.deriv(1)
    Bx, By = B.deriv(0), B.deriv(1)
    k = Ax.order
    A, B = A.truncate(k), B.truncate(k)
    den = 4 * A * A * A + 27 * B * B
    if abs(den.value) <= 1e-12 * (1.0 + max(abs(A.value), abs(B.value))) ** 3:
        raise SingularPointError(
            f"4A^3 + 27B^2 ~ 0: {abs(den.value):.3e}", disc=den.value)
    inv = den.reciprocal()
    gx = (2 * A * A * Ax - 4 * A * A * By + 6 * A * B * Ay + 9 * B * Bx) * inv
    gy = (4 * A * A * Ay + 6 * A * Bx + 18 * B * By - 9 * B * Ax) * inv
    return ConnectionValue(gx=gx, gy=gy)


def gamma_depressed(field, point, order=0, k2_tol=1e-9):
    """Connection of the depressed presentation of a field's web.

    On presentations whose slope cubic already lacks the quadratic term the
    printed (A, B) formula is used verbatim.  For general presentations
    that formula is reproduced exactly by gamma_cubic + (1/6) d(ln D) (the
    two differ by an exact form that cancels in the curvature), which stays
    holomorphic on characteristic webs; the quadratic root shift alone is
    not a web equivalence and is not used here.
    """
    x, y = point
    jets = field.coeff_jets(x, y, order + 1)
    co = np.array([j.value for j in jets])
    k3, k2, k0, k1 = -co[0], co[1], co[3], -co[2]
    lead, quad = (k3, k2) if abs(k3) >= abs(k0) else (k0, k1)
    scale = 1.0 + float(np.max(np.abs(co)))
    if abs(quad) <= k2_tol * scale * max(abs(lead) / scale, 1e-3):
        dep = depress(field, point, order=order + 1)
        if dep.chart == "yx":
            # the depressed cubic lives in swapped coordinates: transpose
            # the jets, apply the formula there, swap components back
            g = gamma_depressed_from_AB(dep.A.swap_axes(), dep.B.swap_axes())
            return ConnectionValue(gx=g.gy.swap_axes(), gy=g.gx.swap_axes())
        return gamma_depressed_from_AB(dep.A, dep.B)
    g = gamma_cubic(field, point, order=order)
    D = discriminant_of_coeffs(*(j.truncate(order + 1) for j in jets))
    invD = D.reciprocal() * (1.0 / 6.0)
    return ConnectionValue(gx=g.gx + D.deriv(0) * invD.truncate(order),
                           gy=g.gy + D.deriv(1) * invD.truncate(order))


# ---------------------------------------------------------------------------
# Definition via normalized roots


def frame_data(field, point, order=1):
    triple = normalize_roots(field, point, order=order)
    (p1, q1), (p2, q2), _ = triple.sigma
    omega0 = p1.value * q2.value - p2.value * q1.value
    h = []
    for p, q in triple.sigma:
        h.append((q.deriv(0) - p.deriv(1)).value / omega0)
    return FrameData(point=triple.point, triple=triple, omega0=omega0,
                     h=tuple(h))


def gamma_expressions_from_sigma(sigma):
    """The three defining expressions of gamma from sigma jets (order >= 1).

    Returns a list of three ConnectionValue candidates whose agreement is
    the content of the definition being well-posed.
    """
    (p1, q1), (p2, q2), (p3, q3) = sigma
    omega = p1 * q2 - p2 * q1
    inv = omega.reciprocal()
    hs = []
    for p, q in sigma:
        hs.append((q.deriv(0) - p.deriv(1)) * inv.truncate(p.order - 1))
    k = hs[0].order
    ps = [p.truncate(k) for p, _ in sigma]
    qs = [q.truncate(k) for _, q in sigma]
    h1, h2, h3 = hs
    exprs = [
        ConnectionValue(gx=h2 * ps[0] - h1 * ps[1],
                        gy=h2 * qs[0] - h1 * qs[1]),
        ConnectionValue(gx=h3 * ps[1] - h2 * ps[2],
                        gy=h3 * qs[1] - h2 * qs[2]),
        ConnectionValue(gx=h1 * ps[2] - h3 * ps[0],
                        gy=h1 * qs[2] - h3 * qs[0]),
    ]
    return exprs


def gamma_from_definition(field, point, order=0, agreement_tol=1e-9):
    """Chern connection straight from the definition.

    The three defining expressions must agree pairwise; their first one is
    returned (they are equal up to the stated tolerance).
    """
    triple = normalize_roots(field, point, order=order + 1)
    exprs = gamma_expressions_from_sigma(triple.sigma)
    scale = 1.0 + max(e.norm() for e in exprs)
    for i in range(3):
        j = (i + 1) % 3
        diff = max(abs(exprs[i].gx.value - exprs[j].gx.value),
                   abs(exprs[i].gy.value - exprs[j].gy.value))
        if diff / scale > agreement_tol:
            raise SingularPointError(
                f"defining expressions for gamma disagree by {diff:.2e}")
    return exprs[0]


# ---------------------------------------------------------------------------
# Curvature


def curvature(field, point, route="cubic"):
    """K = d(gamma)/(dx ^ dy) = d_x(gamma_dy) - d_y(gamma_dx)."""
    if route == "cubic":
        g = gamma_cubic(field, point, order=1)
    elif route == "depressed":
        g = gamma_depressed(field, point, order=1)
    elif route == "definition":
        g = gamma_from_definition(field, point, order=1)
    else:
        raise ValueError(f"unknown curvature route {route!r}")
    K = g.gy.deriv(0).value - g.gx.deriv(1).value
    return CurvatureValue(K=K)


def curvature_from_sigma(sigma):
    """Curvature from sigma jets (order >= 2); used by covariance checks."""
    g = gamma_expressions_from_sigma(sigma)[0]
    return CurvatureValue(K=g.gy.deriv(0).value - g.gx.deriv(1).value)


# ---------------------------------------------------------------------------
# Identity for characteristic webs, path integrals, transport


def corollary_residual(pot, point, assoc_tol=1e-8):
    """Deviation of gamma from -(1/6) d(ln D) for a WDVV potential.

    Only claimed (and only computed) for solutions of the associativity
    equation; refuses otherwise.
    """
    x, y = point
    res = abs(pot.associativity_residual(x, y))
    if res > assoc_tol:
        raise ValueError(
            f"associativity residual {res:.3e} too large; identity only "
            "holds on solutions")
    field = pot.characteristic_field()
    g = gamma_cubic(field, point, order=0)
    jets = field.coeff_jets(x, y, 1)
    D = discriminant_of_coeffs(*jets)
    co = np.array([j.value for j in jets])
    if abs(D.value) <= regular_cutoff(co):
        raise SingularPointError("discriminant ~ 0", disc=D.value)
    ref_x = -D.deriv(0).value / (6.0 * D.value)
    ref_y = -D.deriv(1).value / (6.0 * D.value)
    gx, gy = g.values()
    return max(abs(gx - ref_x), abs(gy - ref_y)) / (1.0 + g.norm())


def _polyline_segments(path):
    pts = [np.asarray(p, dtype=complex) for p in path]
    return list(zip(pts[:-1], pts[1:]))


def integrate_gamma(field, path, tol=1e-10, sing_tol=None):
    """Path integral of gamma along a polyline (adaptive quadrature)."""
    total = 0j
    for P0, P1 in _polyline_segments(path):
        dP = P1 - P0

        def integrand(t):
            pt = P0 + t * dP
            co = field.coeffs(pt[0], pt[1])
            D = discriminant_of_coeffs(*co)
            cutoff = sing_tol if sing_tol is not None else regular_cutoff(co)
            if abs(D) <= cutoff:
                raise SingularPointError(
                    f"path crosses the discriminant: |D| = {abs(D):.2e}")
            g = gamma_cubic(field, (pt[0], pt[1]), order=0)
            gx, gy = g.values()
            return gx * dP[0] + gy * dP[1]

        re, _ = quad(lambda t: integrand(t).real, 0.0, 1.0,
                     epsabs=tol, epsrel=tol, limit=200)
        im, _ = quad(lambda t: integrand(t).imag, 0.0, 1.0,
                     epsabs=tol, epsrel=tol, limit=200)
        total += re + 1j * im
    return total


def exactness_potential(field, base, target, path=None, tol=1e-10):
    """Integral of gamma from base to target; path-independent iff flat."""
    if path is None:
        path = [base, target]
    else:
        path = list(path)
        if not np.allclose(path[0], base) or not np.allclose(path[-1], target):
            raise ValueError("path must run from base to target")
    return integrate_gamma(field, path, tol=tol)


class PathFrame:
    """Continuation of the normalized root triple along a polyline.

    Keeps root labels and the cube-root branch coherent; checkpoints are
    refined until consecutive root matches move by < max_move in the
    projective metric.
    """

    def __init__(self, field, path, order=1, max_move=0.2):
        self.field = field
        self.order = order
        self.checkpoints = []  # (point, RootTriple)
        pts = [np.asarray(p, dtype=complex) for p in path]
        triple = normalize_roots(field, (pts[0][0], pts[0][1]), order=order)
        self.checkpoints.append((pts[0], triple))
        for P0, P1 in zip(pts[:-1], pts[1:]):
            self._walk(P0, P1, max_move)

    def _walk(self, P0, P1, max_move):
        stack = [(0.0, 1.0)]
        while stack:
            t0, t1 = stack.pop()
            prev_pt, prev = self.checkpoints[-1]
            pt = P0 + t1 * (P1 - P0)
            vals_ref = [(p.value, q.value) for p, q in prev.sigma]
            triple = normalize_roots(
                self.field, (pt[0], pt[1]), order=self.order,
                label_ref=vals_ref, lam_target=prev.lam)
            _, cost = match_roots(vals_ref,
                                  [(p.value, q.value) for p, q in triple.sigma])
            if cost > max_move and (t1 - t0) > 1e-8:
                mid = 0.5 * (t0 + t1)
                stack.append((mid, t1))
                stack.append((t0, mid))
            else:
                self.checkpoints.append((pt, triple))

    @property
    def start(self):
        return self.checkpoints[0][1]

    @property
    def end(self):
        return self.checkpoints[-1][1]


@dataclass
class TransportResult:
    components: tuple
    vector: tuple
    frame: object  # PathFrame used for the transport


def dual_frame(triple):
    """Tangent frame (e1, e2) dual to the covectors (sigma_1, sigma_2).

    With leaf vectors v_i and area coefficient Om0 = sigma_1 ^ sigma_2,
    the duality sigma_i(e_j) = delta_ij gives e1 = v2/Om0, e2 = -v1/Om0.
    """
    (p1, q1), (p2, q2), _ = triple.values()
    om0 = p1 * q2 - p2 * q1
    v1 = (q1, -p1)
    v2 = (q2, -p2)
    e1 = (v2[0] / om0, v2[1] / om0)
    e2 = (-v1[0] / om0, -v1[1] / om0)
    return e1, e2


def blaschke_transport(field, curve, xi, tol=1e-10):
    """Parallel transport of xi = (xi1, xi2) along a curve.

    The components live in the frame dual to the normalized root covectors
    (sigma_1, sigma_2); each satisfies d(xi^i) = gamma xi^i, so both pick
    up the common factor exp(int gamma).  The frame is continued along the
    curve and the transported tangent vector is rebuilt in it at the end
    (reconstruction in the raw leaf frame would miss the point-dependent
    area normalization and is not the connection's transport).
    """
    frame = PathFrame(field, curve, order=1)
    factor = np.exp(integrate_gamma(field, curve, tol=tol))
    comps = (xi[0] * factor, xi[1] * factor)
    e1, e2 = dual_frame(frame.end)
    vec = (comps[0] * e1[0] + comps[1] * e2[0],
           comps[0] * e1[1] + comps[1] * e2[1])
    return TransportResult(components=comps, vector=vec, frame=frame)


def frame_components(triple, v):
    """Components of a tangent vector in the dual frame of a root triple."""
    (p1, q1), (p2, q2), _ = triple.values()
    return (p1 * v[0] + q1 * v[1], p2 * v[0] + q2 * v[1])
