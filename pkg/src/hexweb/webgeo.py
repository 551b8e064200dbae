"""Real-plane web geometry: leaves, hexagon closure, first integrals, symmetry.

These routines work on regions of the real plane where the discriminant is
positive (three distinct real slopes), integrating actual leaf curves and
checking the classical geometric signatures of flatness: the Thomsen closure
figure and the abelian relation u1 + u2 + u3 = const of the web's first
integrals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chern import gamma_cubic
from .cubic import (SingularPointError, discriminant_of_coeffs, match_roots,
                    normalize_roots, proj_distance, regular_cutoff, roots)


class LeafIntegrationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Leaf integration


@dataclass
class Leaf:
    """An integrated leaf: unit-speed polyline with tangents for Hermite
    interpolation.  ``params`` is (approximate) arclength from the start."""

    branch: int
    points: np.ndarray        # (n, 2)
    tangents: np.ndarray      # (n, 2), unit vectors
    params: np.ndarray        # (n,)
    termination: str          # length | domain | discriminant-proximity

    def point_at(self, s):
        """Cubic Hermite interpolation at arclength s."""
        t = self.params
        if s <= t[0]:
            return self.points[0] + (s - t[0]) * self.tangents[0]
        if s >= t[-1]:
            return self.points[-1] + (s - t[-1]) * self.tangents[-1]
        i = int(np.searchsorted(t, s) - 1)
        h = t[i + 1] - t[i]
        u = (s - t[i]) / h
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        return (h00 * self.points[i] + h10 * h * self.tangents[i]
                + h01 * self.points[i + 1] + h11 * h * self.tangents[i + 1])

    @property
    def length(self):
        return float(self.params[-1] - self.params[0])


def real_directions(field, point, imag_tol=1e-7):
    """The three real leaf directions at a point as unit vectors.

    Each direction is normalized to the upper half plane (angle in [0, pi))
    and the list is sorted by angle; raises when any root is genuinely
    complex (D <= 0 region).
    """
    rts = roots(field, point)
    dirs = []
    for p, q in rts:
        v = np.array([q, -p])
        if np.max(np.abs(v.imag)) > imag_tol * np.max(np.abs(v)):
            raise LeafIntegrationError(
                f"complex leaf direction at {point} (D <= 0 region)")
        u = v.real / np.linalg.norm(v.real)
        if u[1] < 0 or (u[1] == 0 and u[0] < 0):
            u = -u
        dirs.append(u)
    dirs.sort(key=lambda u: np.arctan2(u[1], u[0]) % np.pi)
    return dirs


def _tracked_direction(field, pt, ref_root, ref_dir, imag_tol=1e-6):
    """Unit real direction of the root nearest ref_root, sign-aligned."""
    rts = roots(field, (pt[0], pt[1]))
    dists = [proj_distance(ref_root, r) for r in rts]
    k = int(np.argmin(dists))
    p, q = rts[k]
    v = np.array([q, -p])
    if np.max(np.abs(v.imag)) > imag_tol * np.max(np.abs(v)):
        raise LeafIntegrationError(f"leaf direction not real at {pt}")
    u = v.real / np.linalg.norm(v.real)
    if ref_dir is not None and np.dot(u, ref_dir) < 0:
        u = -u
    return u, rts[k], dists[k]


def integrate_leaf(field, start, branch, length, tol=1e-8, domain=None,
                   max_step=0.05, prox_factor=1e-6):
    """Integrate one web leaf from a regular real point.

    Embedded Runge-Kutta (third order with second-order error estimate) on
    the unit direction of the tracked root; the root branch is continued by
    nearest projective neighbor at every stage evaluation.  Branches are
    numbered 1..3 by ascending slope at the start; negative ``length``
    integrates in the reverse orientation.
    """
    pt = np.array([float(start[0]), float(start[1])])
    co = field.coeffs(pt[0], pt[1])
    D0 = discriminant_of_coeffs(*co)
    if abs(D0) <= regular_cutoff(co):
        raise SingularPointError(f"start on the discriminant: |D|={abs(D0):.2e}")
    dirs = real_directions(field, (pt[0], pt[1]))
    if branch not in (1, 2, 3):
        raise ValueError("branch must be 1, 2 or 3")
    u0 = dirs[branch - 1]
    # leaf vector (q, -p) = u0, so the tracked covector is (p, q) = (-uy, ux)
    ref_root = (-u0[1], u0[0])
    sign = 1.0 if length >= 0 else -1.0
    ref_dir = sign * u0
    total = abs(float(length))

    pts = [pt.copy()]
    tans = [ref_dir.copy()]
    params = [0.0]
    termination = "length"
    s_done = 0.0
    h = min(max_step, total / 4 if total > 0 else max_step)
    prox_scale = None

    def f(p, root, dire):
        return _tracked_direction(field, p, root, dire)

    while s_done < total - 1e-14:
        h = min(h, total - s_done)
        try:
            k1, r1, _ = f(pt, ref_root, ref_dir)
            k2, r2, _ = f(pt + 0.5 * h * k1, r1, k1)
            k3, r3, _ = f(pt + 0.75 * h * k2, r2, k2)
            y_new = pt + h * (2 * k1 + 3 * k2 + 4 * k3) / 9.0
            k4, r4, move = f(y_new, r3, k3)
            z_new = pt + h * (7 * k1 / 24 + k2 / 4 + k3 / 3 + k4 / 8)
        except (LeafIntegrationError, SingularPointError):
            if h > 1e-10:
                h *= 0.25
                continue
            termination = "discriminant-proximity"
            break
        err = float(np.max(np.abs(y_new - z_new)))
        if err > tol and h > 1e-12:
            h *= max(0.2, 0.9 * (tol / err) ** (1.0 / 3.0))
            continue
        # accepted
        pt = y_new
        ref_root, ref_dir = r4, k4
        s_done += h
        pts.append(pt.copy())
        tans.append(k4.copy())
        params.append(s_done)
        co = field.coeffs(pt[0], pt[1])
        if prox_scale is None:
            prox_scale = regular_cutoff(co) / 1e-12
        if abs(discriminant_of_coeffs(*co)) <= prox_factor * prox_scale:
            termination = "discriminant-proximity"
            break
        if domain is not None:
            (x0, x1), (y0, y1) = domain
            if not (x0 <= pt[0] <= x1 and y0 <= pt[1] <= y1):
                termination = "domain"
                break
        if err > 0:
            h *= min(4.0, max(0.2, 0.9 * (tol / err) ** (1.0 / 3.0)))
        else:
            h *= 2.0
        h = min(h, max_step)
    return Leaf(branch=branch, points=np.array(pts), tangents=np.array(tans),
                params=np.array(params), termination=termination)


def leaf_through(field, point, branch, half_length, tol=1e-8):
    """Leaf through a point, integrated in both orientations and merged
    into a single curve with arclength parameter in [-L, +L]."""
    fwd = integrate_leaf(field, point, branch, half_length, tol=tol)
    bwd = integrate_leaf(field, point, branch, -half_length, tol=tol)
    # the reverse half travels against the curve parameter: flip its
    # tangents and negate its arclengths when stitching
    pts = np.vstack([bwd.points[::-1], fwd.points[1:]])
    tans = np.vstack([-bwd.tangents[::-1], fwd.tangents[1:]])
    params = np.concatenate([-bwd.params[::-1], fwd.params[1:]])
    return Leaf(branch=branch, points=pts, tangents=tans, params=params,
                termination=fwd.termination)


# ---------------------------------------------------------------------------
# Thomsen closure figure


@dataclass
class HexagonReport:
    base: tuple
    eps: float
    vertices: list
    gap: float


def _signed_distance(curve, pt):
    """Signed distance from pt to a leaf curve (positive to the left of
    the curve's orientation); nearest parameter found by scan + refinement."""
    d = curve.points - pt
    i = int(np.argmin(np.einsum("ij,ij->i", d, d)))
    lo = curve.params[max(0, i - 1)]
    hi = curve.params[min(len(curve.params) - 1, i + 1)]
    # golden-section refine |curve(s) - pt|^2
    phi = 0.5 * (3 - np.sqrt(5.0))
    a, b = lo, hi
    c = a + phi * (b - a)
    e = b - phi * (b - a)
    fc = np.sum((curve.point_at(c) - pt) ** 2)
    fe = np.sum((curve.point_at(e) - pt) ** 2)
    for _ in range(60):
        if fc < fe:
            b, e, fe = e, c, fc
            c = a + phi * (b - a)
            fc = np.sum((curve.point_at(c) - pt) ** 2)
        else:
            a, c, fc = c, e, fe
            e = b - phi * (b - a)
            fe = np.sum((curve.point_at(e) - pt) ** 2)
    s = 0.5 * (a + b)
    q = curve.point_at(s)
    ds = 1e-7
    tan = (curve.point_at(s + ds) - curve.point_at(s - ds)) / (2 * ds)
    n = np.linalg.norm(tan)
    if n == 0:
        return float(np.linalg.norm(pt - q))
    tan = tan / n
    return float(tan[0] * (pt[1] - q[1]) - tan[1] * (pt[0] - q[0]))


def _first_crossing(moving, target, skip=0.0):
    """Smallest-|s| parameter where the moving leaf crosses the target."""
    ss = moving.params
    vals = np.array([_signed_distance(target, p) for p in moving.points])
    crossings = []
    for i in range(len(ss) - 1):
        if abs(ss[i]) < skip and abs(ss[i + 1]) < skip:
            continue
        if vals[i] == 0.0:
            crossings.append(ss[i])
        elif vals[i] * vals[i + 1] < 0:
            a, b = ss[i], ss[i + 1]
            fa = vals[i]
            for _ in range(80):
                m = 0.5 * (a + b)
                fm = _signed_distance(target, moving.point_at(m))
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
                if abs(b - a) < 1e-13:
                    break
            crossings.append(0.5 * (a + b))
    if not crossings:
        return None
    return min(crossings, key=abs)


def thomsen_closure(field, base, eps, tol=1e-10, reach=6.0):
    """Build the closure hexagon and return its gap.

    Starting at arclength eps along the branch-1 leaf through base, leaves
    of the foliations 2, 1, 3, 2, 1, 3 are followed in turn, each until it
    meets the base leaf of foliation 3, 2, 1, 3, 2, 1 respectively; for a
    hexagonal web the sixth vertex returns to the first.
    """
    base = (float(base[0]), float(base[1]))
    L = reach * eps
    C = {j: leaf_through(field, base, j, L, tol=tol) for j in (1, 2, 3)}
    X = np.asarray(C[1].point_at(eps), dtype=float)
    first = X.copy()
    vertices = [X.copy()]
    plan = [(2, 3), (1, 2), (3, 1), (2, 3), (1, 2), (3, 1)]
    for foliation, target in plan:
        moving = leaf_through(field, (X[0], X[1]), foliation, L, tol=tol)
        s = _first_crossing(moving, C[target], skip=1e-9)
        if s is None:
            raise LeafIntegrationError(
                f"hexagon construction lost the target leaf {target}")
        X = np.asarray(moving.point_at(s), dtype=float)
        vertices.append(X.copy())
    gap = float(np.linalg.norm(vertices[-1] - first))
    return HexagonReport(base=base, eps=float(eps), vertices=vertices,
                         gap=gap)


# ---------------------------------------------------------------------------
# First integrals and the abelian relation


@dataclass
class FirstIntegralState:
    """k and the first-integral triple sampled along a path."""

    nodes: np.ndarray         # (n, 2) real points
    k: np.ndarray             # (n,) complex, k[0] = 1
    u: np.ndarray             # (n, 3) complex, u[0] = 0
    abelian_residual: float   # max |u1 + u2 + u3| along the path

    @property
    def k_end(self):
        return self.k[-1]

    @property
    def u_end(self):
        return self.u[-1]


def first_integrals(field, base, path, step=0.004):
    """Integrate dk = -gamma k and du_i = k sigma_i along a polyline.

    k(base) = 1 and u_i(base) = 0; since all three sigma sum to zero the
    relation u1 + u2 + u3 = 0 holds along the path exactly up to quadrature
    error, which is what ``abelian_residual`` reports.
    """
    pts = [np.asarray(p, dtype=float) for p in path]
    if np.linalg.norm(pts[0] - np.asarray(base, dtype=float)) > 1e-12:
        raise ValueError("path must start at the base point")
    nodes = [pts[0]]
    for P0, P1 in zip(pts[:-1], pts[1:]):
        seg = np.linalg.norm(P1 - P0)
        n = max(2, int(np.ceil(seg / step)))
        n += n % 2  # even count for composite Simpson
        for i in range(1, n + 1):
            nodes.append(P0 + (i / n) * (P1 - P0))
    nodes = np.array(nodes)

    gam = []     # gamma . dP/ds at nodes (complex)
    sig = []     # sigma_i . dP/ds at nodes, (3,) complex
    triple = None
    for i, pt in enumerate(nodes):
        if i == 0:
            dP = nodes[1] - nodes[0]
        elif i == len(nodes) - 1:
            dP = nodes[-1] - nodes[-2]
        else:
            dP = 0.5 * (nodes[i + 1] - nodes[i - 1])
        g = gamma_cubic(field, (pt[0], pt[1]), order=0)
        gx, gy = g.values()
        ref = None if triple is None else [
            (p.value, q.value) for p, q in triple.sigma]
        lam = None if triple is None else triple.lam
        triple = normalize_roots(field, (pt[0], pt[1]), order=0,
                                 label_ref=ref, lam_target=lam)
        vals = triple.values()
        gam.append((gx, gy))
        sig.append(vals)

    n = len(nodes)
    k = np.ones(n, dtype=complex)
    u = np.zeros((n, 3), dtype=complex)
    I = 0j

    # integrate with composite Simpson over consecutive node pairs; node
    # spacing within a segment is uniform by construction
    def form_dot(val, dP):
        return val[0] * dP[0] + val[1] * dP[1]

    i = 0
    while i + 2 <= n - 1:
        P0, P1, P2 = nodes[i], nodes[i + 1], nodes[i + 2]
        if np.linalg.norm((P2 - P1) - (P1 - P0)) > 1e-9 * (
                1 + np.linalg.norm(P1 - P0)):
            # segment boundary: fall back to two trapezoid steps
            for j in (i, i + 1):
                dP = nodes[j + 1] - nodes[j]
                dI = 0.5 * (form_dot(gam[j], dP) + form_dot(gam[j + 1], dP))
                I += dI
                k[j + 1] = np.exp(-I)
                for m in range(3):
                    sm0 = k[j] * form_dot(sig[j][m], dP)
                    sm1 = k[j + 1] * form_dot(sig[j + 1][m], dP)
                    u[j + 1, m] = u[j, m] + 0.5 * (sm0 + sm1)
        else:
            dP = P1 - P0
            gv = [form_dot(gam[j], dP) for j in (i, i + 1, i + 2)]
            I_mid = I + (gv[0] * 5 + gv[1] * 8 - gv[2]) / 12.0
            I_end = I + (gv[0] + 4 * gv[1] + gv[2]) / 3.0
            k[i + 1] = np.exp(-I_mid)
            k[i + 2] = np.exp(-I_end)
            for m in range(3):
                sv = [k[j] * form_dot(sig[j][m], dP)
                      for j in (i, i + 1, i + 2)]
                u[i + 1, m] = u[i, m] + (sv[0] * 5 + sv[1] * 8 - sv[2]) / 12.0
                u[i + 2, m] = u[i, m] + (sv[0] + 4 * sv[1] + sv[2]) / 3.0
            I = I_end
        i += 2
    residual = float(np.max(np.abs(u.sum(axis=1))))
    return FirstIntegralState(nodes=nodes, k=k, u=u,
                              abelian_residual=residual)


# ---------------------------------------------------------------------------
# Infinitesimal diagonal symmetries


def symmetry_residual(field, weights, samples, a=0.1):
    """Deviation of the web from invariance under a diagonal scaling flow.

    The candidate symmetry is X = w1 x dx + w2 y dy with exact flow
    (x, y) -> (exp(w1 a) x, exp(w2 a) y); web directions at each sample are
    pushed forward and compared (optimal matching, projective metric) with
    the directions at the image point.
    """
    w1, w2 = weights
    s1, s2 = np.exp(w1 * a), np.exp(w2 * a)
    worst = 0.0
    for pt in samples:
        x, y = pt
        dirs = [(q, -p) for p, q in roots(field, (x, y))]
        pushed = [(s1 * vx, s2 * vy) for vx, vy in dirs]
        image_dirs = [(q, -p) for p, q in roots(field, (s1 * x, s2 * y))]
        matched, _ = match_roots(pushed, image_dirs)
        worst = max(worst, max(proj_distance(pushed[i], matched[i])
                               for i in range(3)))
    return float(worst)
