"""Cubic binary direction fields: discriminant, roots, normalization.

Convention: the field V = a (dx*)^3 + b (dx*)^2 dy* + c dx* (dy*)^2 + r (dy*)^3
acts on covectors sigma = p dx + q dy via C(p, q) = a p^3 + b p^2 q + c p q^2
+ r q^3.  A root sigma_i = (p_i, q_i) has leaf vector v_i = q_i dx - p_i dy,
hence leaf slope dy/dx = -p_i/q_i.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .jets import Jet, PolyExpr, JetError, jet_cbrt

COEF_VANISH_TOL = 1e-12


class DegenerateFieldError(ValueError):
    """All four coefficients vanish at the evaluated point."""


class SingularPointError(ValueError):
    """Repeated root / vanishing discriminant at the evaluated point."""

    def __init__(self, msg, multiplicity=None, disc=None):
        super().__init__(msg)
        self.multiplicity = multiplicity
        self.disc = disc


# ---------------------------------------------------------------------------
# Field representations


class DirectionField:
    """Base class: anything that yields jets of (a, b, c, r) at a point."""

    def coeff_jets(self, x, y, order):
        raise NotImplementedError

    def coeffs(self, x, y):
        return np.array([j.value for j in self.coeff_jets(x, y, 0)])

    def check_nondegenerate(self, x, y):
        co = self.coeffs(x, y)
        if np.max(np.abs(co)) <= COEF_VANISH_TOL:
            raise DegenerateFieldError(
                f"all cubic coefficients vanish at ({x}, {y})")
        return co


class PolyCoeffField(DirectionField):
    """Field with polynomial coefficient functions."""

    def __init__(self, a, b, c, r):
        self.abcr = (a, b, c, r)

    def coeff_jets(self, x, y, order):
        return tuple(p.jet((x, y), order) for p in self.abcr)

    def coeffs(self, x, y):
        return np.array([complex(p(x, y)) for p in self.abcr])


class CallableJetField(DirectionField):
    """Field whose coefficient jets come from an arbitrary closure."""

    def __init__(self, fn):
        self.fn = fn

    def coeff_jets(self, x, y, order):
        return self.fn(x, y, order)


class TranslatedField(DirectionField):
    """The same web seen from an origin shifted to (x0, y0)."""

    def __init__(self, base_field, x0, y0):
        self.base_field = base_field
        self.x0 = x0
        self.y0 = y0

    def coeff_jets(self, x, y, order):
        jets = self.base_field.coeff_jets(x + self.x0, y + self.y0, order)
        out = []
        for j in jets:
            out.append(Jet((x, y), order, j.c.copy()))
        return tuple(out)


@dataclass(frozen=True)
class KForm:
    """Binary form K3 dy^3 + K2 dy^2 dx + K1 dy dx^2 + K0 dx^3."""

    K3: PolyExpr
    K2: PolyExpr
    K1: PolyExpr
    K0: PolyExpr

    def coeffs(self, x, y):
        return np.array([complex(k(x, y)) for k in
                         (self.K3, self.K2, self.K1, self.K0)])

    def to_field(self):
        K3, K2, K1, K0 = self.K3, self.K2, self.K1, self.K0
        return PolyCoeffField(-K3, K2, -K1, K0)


def to_kform(field):
    """KForm of a polynomial-coefficient field: K = (-a, b, -c, r)."""
    a, b, c, r = field.abcr
    return KForm(K3=-a, K2=b, K1=-c, K0=r)


def field_from_kform_jets(kfun):
    """Direction field from a closure returning (K3, K2, K1, K0) jets."""

    def fn(x, y, order):
        K3, K2, K1, K0 = kfun(x, y, order)
        return (-K3, K2, -K1, K0)

    return CallableJetField(fn)


# ---------------------------------------------------------------------------
# Discriminant and roots


def discriminant_of_coeffs(a, b, c, r):
    """D = 18abcr - 27 a^2 r^2 - 4 a c^3 + b^2 c^2 - 4 b^3 r.

    Works for numbers and jets alike.
    """
    return (18 * a * b * c * r - 27 * a * a * r * r - 4 * a * c * c * c
            + b * b * c * c - 4 * b * b * b * r)


def discriminant(field, point):
    a, b, c, r = field.coeffs(point[0], point[1])
    return discriminant_of_coeffs(a, b, c, r)


def discriminant_scale(coeffs):
    """Scale-aware reference magnitude for |D| cutoffs (D is quartic)."""
    return (1.0 + float(np.max(np.abs(coeffs)))) ** 4


def regular_cutoff(coeffs):
    return 1e-12 * discriminant_scale(coeffs)


def roots_proj(coeffs):
    """Three projective roots [p_i : q_i] of C(p, q) = 0.

    Each root is returned as a complex pair normalized to unit max component.
    Solved on the affine chart with the better-conditioned leading
    coefficient (companion matrix via numpy.roots).
    """
    a, b, c, r = (complex(v) for v in coeffs)
    scale = max(abs(a), abs(b), abs(c), abs(r))
    if scale == 0:
        raise DegenerateFieldError("all cubic coefficients are zero")
    a, b, c, r = a / scale, b / scale, c / scale, r / scale
    out = []
    if abs(a) >= abs(r):
        # chart q = 1, slope s = p/q: a s^3 + b s^2 + c s + r = 0
        if abs(a) < 1e-14:
            raise DegenerateFieldError("cubic degenerate in both charts")
        for s in np.roots([a, b, c, r]):
            out.append(_unitize((s, 1.0)))
    else:
        # chart p = 1, v = q/p: r v^3 + c v^2 + b v + a = 0
        for v in np.roots([r, c, b, a]):
            out.append(_unitize((1.0, v)))
    out.sort(key=_root_sort_key)
    return out


def _root_sort_key(pq):
    """Fixed labeling rule: finite slopes first, lexicographic in (Re, Im)."""
    p, q = pq
    if abs(q) >= 1e-12 * abs(p):
        s = p / q
        return (0, round(s.real, 12), round(s.imag, 12))
    v = q / p
    return (1, round(v.real, 12), round(v.imag, 12))


def _unitize(pq):
    p, q = complex(pq[0]), complex(pq[1])
    m = max(abs(p), abs(q))
    return (p / m, q / m)


def proj_distance(u, v):
    """Chordal distance between projective points: |u x v| / (|u| |v|)."""
    cross = u[0] * v[1] - u[1] * v[0]
    nu = np.hypot(abs(u[0]), abs(u[1]))
    nv = np.hypot(abs(v[0]), abs(v[1]))
    return abs(cross) / (nu * nv)


def match_roots(ref, new):
    """Permutation of `new` minimizing total projective distance to `ref`."""
    best = None
    best_cost = np.inf
    for perm in itertools.permutations(range(len(new))):
        cost = sum(proj_distance(ref[i], new[perm[i]])
                   for i in range(len(ref)))
        if cost < best_cost:
            best_cost = cost
            best = perm
    return [new[i] for i in best], best_cost


def roots(field, point):
    """Projective roots of the field's cubic at a point."""
    field.check_nondegenerate(point[0], point[1])
    return roots_proj(field.coeffs(point[0], point[1]))


def root_jets(field, x, y, order, root_values=None):
    """Jets of the three projective roots by implicit differentiation.

    Each root is a pair of jets (p, q) with the chart component held at the
    constant 1.  Requires three pairwise distinct roots.
    """
    ja, jb, jc, jr = field.coeff_jets(x, y, order)
    vals = root_values if root_values is not None else roots_proj(
        [ja.value, jb.value, jc.value, jr.value])
    sep = min(proj_distance(u, v)
              for u, v in itertools.combinations(vals, 2))
    if sep < 1e-8:
        mult = _multiplicity_from_values(vals)
        raise SingularPointError(
            f"repeated root at ({x}, {y}), separation {sep:.2e}",
            multiplicity=mult)
    out = []
    one = Jet.constant(1.0, (x, y), order)
    for p0, q0 in vals:
        if abs(q0) >= abs(p0):
            s = _newton_root_jet([ja, jb, jc, jr], p0 / q0, order)
            out.append((s, one))
        else:
            v = _newton_root_jet([jr, jc, jb, ja], q0 / p0, order)
            out.append((one, v))
    return out


def _newton_root_jet(coeff_jets, s0, order):
    """Jet of a simple root of c3 s^3 + c2 s^2 + c1 s + c0 (jets c_i)."""
    c3, c2, c1, c0 = coeff_jets
    base = c3.base
    s = Jet.constant(s0, base, order)
    dP0 = 3 * c3.value * s0**2 + 2 * c2.value * s0 + c1.value
    if abs(dP0) < 1e-13 * (1 + max(abs(c.value) for c in coeff_jets)):
        raise SingularPointError("root is not simple (P'(s0) ~ 0)")
    for _ in range(max(1, order.bit_length()) + 2):
        P = ((c3 * s + c2) * s + c1) * s + c0
        dP = (3 * c3 * s + 2 * c2) * s + c1
        s = s - P * dP.reciprocal()
    return s


def _multiplicity_from_values(vals):
    d12 = proj_distance(vals[0], vals[1])
    d13 = proj_distance(vals[0], vals[2])
    d23 = proj_distance(vals[1], vals[2])
    close = sum(1 for d in (d12, d13, d23) if d < 1e-8)
    return 3 if close == 3 else 2


# ---------------------------------------------------------------------------
# Normalized root triples


@dataclass
class RootTriple:
    """Root covectors normalized so that sigma_1 + sigma_2 + sigma_3 = 0.

    ``sigma`` holds three (p_jet, q_jet) pairs; the common cube-root scale
    used to enforce exact factorization V1 V2 V3 = V is recorded in
    ``lam`` so branches can be continued along paths.
    """

    point: tuple
    sigma: list
    lam: complex
    order: int = dc_field(default=0)

    def values(self):
        return [(s[0].value, s[1].value) for s in self.sigma]

    def leaf_vectors(self):
        return [(q.value, -p.value) for p, q in self.sigma]


def normalize_roots(field, point, order=1, label_ref=None, lam_target=None):
    """Normalized, exactly-factorizing root triple with jets.

    label_ref: optional reference triple of projective pairs used to order
    the roots (path continuation); lam_target: preferred cube-root branch.
    """
    x, y = point
    vals = roots(field, point)
    if label_ref is not None:
        vals, _ = match_roots(label_ref, vals)
    rj = root_jets(field, x, y, order, root_values=vals)
    (p1, q1), (p2, q2), (p3, q3) = rj
    # kernel of the 2x3 matrix [sigma_1 sigma_2 sigma_3] via cross products
    t1 = p2 * q3 - p3 * q2
    t2 = p3 * q1 - p1 * q3
    t3 = p1 * q2 - p2 * q1
    sp = [(t1 * p1, t1 * q1), (t2 * p2, t2 * q2), (t3 * p3, t3 * q3)]
    # product form of the scaled roots, coefficient by coefficient
    P1, Q1 = sp[0]
    P2, Q2 = sp[1]
    P3, Q3 = sp[2]
    ahat = Q1 * Q2 * Q3
    bhat = -(Q1 * Q2 * P3 + Q1 * P2 * Q3 + P1 * Q2 * Q3)
    chat = Q1 * P2 * P3 + P1 * Q2 * P3 + P1 * P2 * Q3
    rhat = -(P1 * P2 * P3)
    ja, jb, jc, jr = field.coeff_jets(x, y, order)
    hats = [ahat, bhat, chat, rhat]
    target = [ja, jb, jc, jr]
    k = int(np.argmax([abs(h.value) for h in hats]))
    lam3 = target[k] * hats[k].reciprocal()
    lam = jet_cbrt(lam3, target=lam_target)
    sigma = [(lam * P, lam * Q) for P, Q in sp]
    return RootTriple(point=(complex(x), complex(y)), sigma=sigma,
                      lam=lam.value, order=order)


def factorization_residual(field, triple):
    """Relative residual of the (p, q)-system: V1 V2 V3 must expand to V."""
    x, y = triple.point
    a, b, c, r = field.coeffs(x, y)
    (p1, q1), (p2, q2), (p3, q3) = triple.values()
    got = np.array([
        q1 * q2 * q3,
        -(q1 * q2 * p3 + q1 * p2 * q3 + p1 * q2 * q3),
        q1 * p2 * p3 + p1 * q2 * p3 + p1 * p2 * q3,
        -(p1 * p2 * p3),
    ])
    want = np.array([a, b, c, r])
    return float(np.max(np.abs(got - want)) / (1.0 + np.max(np.abs(want))))


# ---------------------------------------------------------------------------
# Depressed form


@dataclass
class DepressedForm:
    """p^3 + A p + B = 0 with p = dy/dx (or dx/dy in the swapped chart)."""

    A: Jet
    B: Jet
    chart: str  # "xy" (p = dy/dx) or "yx" (axes swapped)


CHART_TOL = 1e-9


def depress(field, point, order=1):
    """Depressed (A, B) jets of the monic slope cubic at a point.

    Operates on the chart whose leading coefficient is larger; raises when
    both K3 and K0 are below tolerance (no valid affine chart).
    """
    x, y = point
    ja, jb, jc, jr = field.coeff_jets(x, y, order)
    # K-form coefficients: K3 = -a, K2 = b, K1 = -c, K0 = r
    K3, K2, K1, K0 = -ja, jb, -jc, jr
    scale = max(abs(K3.value), abs(K2.value), abs(K1.value), abs(K0.value))
    if scale == 0:
        raise DegenerateFieldError("all coefficients vanish")
    if abs(K3.value) >= abs(K0.value):
        lead, c2, c1, c0, chart = K3, K2, K1, K0, "xy"
    else:
        lead, c2, c1, c0, chart = K0, K1, K2, K3, "yx"
    if abs(lead.value) < CHART_TOL * scale:
        raise SingularPointError(
            f"no valid affine chart at ({x}, {y}): "
            "both leading coefficients vanish")
    inv = lead.reciprocal()
    k2 = c2 * inv
    k1 = c1 * inv
    k0 = c0 * inv
    A = k1 - k2 * k2 * (1.0 / 3.0)
    B = (k2 * k2 * k2) * (2.0 / 27.0) - k2 * k1 * (1.0 / 3.0) + k0
    return DepressedForm(A=A, B=B, chart=chart)


# ---------------------------------------------------------------------------
# Characteristic fields of WDVV potentials (coefficient recipe)


def characteristic_coeffs_from_f3(case, fxxx, fxxy, fxyy, fyyy, one):
    """(a, b, c, r) of the characteristic PDE from third-derivative values.

    Works uniformly for numbers and jets; ``one`` is the multiplicative unit
    of the operand type.
    """
    if case == "A":
        return (fxyy, -2 * fxxy, fxxx, one)
    if case == "B":
        return (fyyy, -fxyy, -fxxy, fxxx)
    raise ValueError(f"unknown case {case!r}")
