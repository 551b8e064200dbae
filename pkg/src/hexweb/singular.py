"""Discriminant geometry and the catalog of singular normal forms.

Covers tracing of the discriminant curve |D| = 0 in a real window,
classification of root multiplicity at a point, the six-entry catalog of
quasi-homogeneous normal forms (with the auxiliary F(t) ODE of the last
entry), and weight detection for singular germs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np
from scipy.integrate import solve_ivp

from .cubic import (CallableJetField, PolyCoeffField, SingularPointError,
                    depress, discriminant_of_coeffs, discriminant_scale)
from .jets import Jet, JetError, PolyExpr, compose_series, jet_pow, jet_tan
from .webgeo import symmetry_residual


# ---------------------------------------------------------------------------
# Discriminant tracing


@dataclass
class DiscriminantTrace:
    curves: list          # list of (n, 2) float arrays
    seeds: list           # polished seed points
    window: tuple         # ((xmin, xmax), (ymin, ymax))

    @property
    def empty(self):
        return not self.curves

    def all_points(self):
        if self.empty:
            return np.zeros((0, 2))
        return np.vstack(self.curves)


def _disc_and_grad(field, x, y):
    jets = field.coeff_jets(x, y, 1)
    D = discriminant_of_coeffs(*jets)
    co = np.array([j.value for j in jets])
    return (D.value, np.array([D.deriv(0).value, D.deriv(1).value]),
            discriminant_scale(co))


def _newton_polish(field, pt, tol, iters=60):
    z = np.array(pt, dtype=float)
    for _ in range(iters):
        D, g, scale = _disc_and_grad(field, z[0], z[1])
        if abs(D) <= tol * scale:
            return z, True
        g = g.real
        gg = float(g @ g)
        if gg < 1e-28:
            return z, False
        step = -D.real / gg * g
        if np.linalg.norm(step) > 1.0:
            step = step / np.linalg.norm(step)
        z = z + step
    D, _, scale = _disc_and_grad(field, z[0], z[1])
    return z, abs(D) <= tol * scale


def trace_discriminant(field, window, n=32, tol=1e-10, max_steps=None):
    """Trace the zero set of the discriminant inside a window.

    Grid sign changes seed a Newton polish; each polished seed is continued
    in both directions along the tangent (perpendicular to grad D) with a
    predictor-corrector loop.  An empty trace is a valid result.
    """
    (x0, x1), (y0, y1) = window
    if n < 8:
        raise ValueError("grid size n must be >= 8")
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    Dg = np.empty((n, n))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            co = field.coeffs(x, y)
            Dg[i, j] = discriminant_of_coeffs(*co).real
    raw = []
    for i in range(n):
        for j in range(n):
            if i + 1 < n and Dg[i, j] * Dg[i + 1, j] <= 0:
                raw.append((0.5 * (xs[i] + xs[i + 1]), ys[j]))
            if j + 1 < n and Dg[i, j] * Dg[i, j + 1] <= 0:
                raw.append((xs[i], 0.5 * (ys[j] + ys[j + 1])))
    h = max(x1 - x0, y1 - y0) / (2.0 * n)
    if max_steps is None:
        max_steps = 20 * n
    curves = []
    seeds = []

    def near_existing(pt):
        for c in curves:
            d = c - pt
            if np.min(np.einsum("ij,ij->i", d, d)) < (2 * h) ** 2:
                return True
        return False

    def in_window(pt, slack=0.02):
        sx = slack * (x1 - x0)
        sy = slack * (y1 - y0)
        return (x0 - sx <= pt[0] <= x1 + sx) and (y0 - sy <= pt[1] <= y1 + sy)

    for seed in raw:
        z, ok = _newton_polish(field, seed, tol)
        if not ok or not in_window(z) or near_existing(z):
            continue
        seeds.append(tuple(z))
        halves = []
        for direction in (1.0, -1.0):
            pts = [z.copy()]
            prev_t = None
            for _ in range(max_steps):
                cur = pts[-1]
                _, g, _ = _disc_and_grad(field, cur[0], cur[1])
                g = g.real
                ng = np.linalg.norm(g)
                if ng < 1e-12:
                    break  # singular point of the curve (e.g. a cusp)
                t = np.array([-g[1], g[0]]) / ng
                if prev_t is None:
                    t = direction * t
                elif np.dot(t, prev_t) < 0:
                    t = -t
                cand, ok = _newton_polish(field, cur + h * t, tol, iters=20)
                if not ok or not in_window(cand):
                    break
                if np.linalg.norm(cand - cur) < 0.01 * h:
                    break
                pts.append(cand)
                prev_t = t
                if len(pts) > 5 and np.linalg.norm(cand - z) < 0.5 * h:
                    break  # closed loop
            halves.append(pts)
        curve = np.array(halves[1][::-1] + halves[0][1:])
        if len(curve) >= 2:
            curves.append(curve)
        else:
            curves.append(np.array([z]))
    return DiscriminantTrace(curves=curves, seeds=seeds, window=window)


# ---------------------------------------------------------------------------
# Root multiplicity


def root_multiplicity(field, point, tol=1e-8):
    """Partition of the cubic's roots at a point: '1+1+1', '2+1' or '3'.

    The simple/multiple split uses |D| against tol * scale with the ratio
    rounded to a few significant digits, so that coefficient perturbations
    far below the tolerance can never flip the answer; the double/triple
    split uses the depressed invariants (triple root iff A and B both
    vanish in a valid chart).
    """
    co = field.check_nondegenerate(point[0], point[1])
    D = discriminant_of_coeffs(*co)
    scale = discriminant_scale(co)
    ratio = abs(D) / (tol * scale)
    if float(f"{ratio:.6g}") > 1.0:
        return "1+1+1"
    dep = depress(field, point, order=0)
    lead = 1.0 + float(np.max(np.abs(co)))
    ab_tol = 1e-6
    if (abs(dep.A.value) <= ab_tol * lead ** 2
            and abs(dep.B.value) <= ab_tol * lead ** 3):
        return "3"
    return "2+1"


# ---------------------------------------------------------------------------
# The auxiliary F(t) ODE


@dataclass
class FSolution:
    m0: int
    t_max: float
    sol: object            # scipy OdeSolution (dense output)
    bracket_ok: bool       # quasi-linear factor stayed away from zero

    def __call__(self, t):
        return float(self.sol.sol(t)[0])

    @property
    def slope0(self):
        return 2.0 * (self.m0 + 3) / (3.0 * (self.m0 + 1))


def _f_ode_constant(m0):
    return 2.0 * (m0 + 3) / (m0 + 1)


def solve_F(m0, t_max=1.0, tol=1e-12):
    """Solve [12 + 2t^2 - 9tF] F' = C (4 + 27 F^2), F(0) = 0, C as below.

    C = 2(m0+3)/(m0+1); the solver halts with a flag when the bracketed
    quasi-linear factor approaches zero.
    """
    if m0 < 0:
        raise ValueError("m0 must be >= 0")
    C = _f_ode_constant(m0)

    def rhs(t, F):
        return C * (4.0 + 27.0 * F[0] ** 2) / (12.0 + 2 * t * t - 9 * t * F[0])

    def bracket(t, F):
        return 12.0 + 2 * t * t - 9 * t * F[0] - 1e-6

    bracket.terminal = True
    bracket.direction = -1
    out = solve_ivp(rhs, (0.0, float(t_max)), [0.0], rtol=tol, atol=tol,
                    method="DOP853", dense_output=True, events=bracket)
    ok = out.status == 0
    return FSolution(m0=int(m0), t_max=float(out.t[-1]), sol=out,
                     bracket_ok=ok)


def f_ode_residual(fs, ts):
    """Relative residual of the implicit ODE at sample points.

    F' comes from a five-point difference of the dense output; since F'
    blows up at the quasi-linear degeneracy the residual is normalized by
    the magnitude of the terms it balances.
    """
    C = _f_ode_constant(fs.m0)
    worst = 0.0
    for t in ts:
        d = 1e-4 * (1 + abs(t))
        Fp = (fs(t - 2 * d) - 8 * fs(t - d) + 8 * fs(t + d)
              - fs(t + 2 * d)) / (12 * d)
        F = fs(t)
        lhs = (12 + 2 * t * t - 9 * t * F) * Fp
        res = lhs - C * (4 + 27 * F * F)
        worst = max(worst, abs(res) / (1.0 + abs(lhs)))
    return worst


def _univariate_F_jet(fs, t0, order):
    """Taylor coefficients of F at t0 from the ODE recursion."""
    C = _f_ode_constant(fs.m0)
    base = (t0, 0.0)
    coeffs = [complex(fs(t0))]
    for k in range(order):
        F = Jet(base, order, None)
        for m, c in enumerate(coeffs):
            F.c[m, 0] = c
        t = Jet.variable(0, base, order)
        num = C * (4.0 + 27.0 * F * F)
        den = 12.0 + 2 * t * t - 9.0 * t * F
        Fp = num * den.reciprocal()
        coeffs.append(Fp.c[k, 0] / (k + 1))
    return coeffs


# ---------------------------------------------------------------------------
# Normal-form catalog


@dataclass
class NormalForm:
    """One catalog entry: a field generator plus its printed symmetry."""

    id: int
    m0: int
    weights: tuple         # (w1, w2) of the symmetry X = w1 x dx + w2 y dy
    field: object          # DirectionField
    label: str


def _field_from_AB(A, B):
    """Field of the slope cubic m^3 + A m + B with polynomial A, B."""
    # K-form (K3, K2, K1, K0) = (1, 0, A, B) -> (a, b, c, r) = (-1, 0, -A, B)
    one = PolyExpr.const(1)
    return PolyCoeffField(-1 * one, PolyExpr.zero(), -1 * A, B)


def normal_form_field(form_id, m0=0, f_interp=None):
    """Catalog entry ``form_id`` in {1..6}; m0 parametrizes forms 1 and 6.

    Forms 1-4 are polynomial; form 5 uses tan jets; form 6 needs Re y > 0
    (principal fractional powers) and an F-interpolant, solved on demand
    when not supplied.
    """
    x = PolyExpr.var(0)
    y = PolyExpr.var(1)
    if form_id in (1, 6) and (int(m0) != m0 or m0 < 0):
        raise ValueError("m0 must be a nonnegative integer")
    m0 = int(m0)
    if form_id == 1:
        # y^m0 m^3 - m = 0: K = (y^m0, 0, -1, 0) -> field (-y^m0, 0, 1, 0)
        ym = PolyExpr.from_dict({(0, m0): 1})
        field = PolyCoeffField(-1 * ym, PolyExpr.zero(), PolyExpr.const(1),
                               PolyExpr.zero())
        return NormalForm(id=1, m0=m0, weights=(2 + m0, 2), field=field,
                          label=f"form1(m0={m0})")
    if form_id == 2:
        return NormalForm(id=2, m0=0, weights=(2, 3),
                          field=_field_from_AB(2 * x, y), label="form2")
    if form_id == 3:
        A = y - x * x * Fraction(2, 3)
        B = x * x * x * Fraction(4, 27) - x * y * Fraction(2, 3)
        return NormalForm(id=3, m0=0, weights=(1, 2),
                          field=_field_from_AB(A, B), label="form3")
    if form_id == 4:
        x3 = x * x * x
        A = 4 * x * (y - x3 * Fraction(4, 9))
        B = y * y + x3 * x3 * Fraction(64, 81) - y * x3 * Fraction(32, 9)
        return NormalForm(id=4, m0=0, weights=(1, 3),
                          field=_field_from_AB(A, B), label="form4")
    if form_id == 5:
        c_tan = 2.0 / np.sqrt(27.0)
        w_arg = 2.0 * np.sqrt(3.0)

        def kfun(px, py, order):
            base = (px, py)
            jx = Jet.variable(0, base, order)
            jy = Jet.variable(1, base, order)
            A = jy * jy
            B = -c_tan * (jy ** 3) * jet_tan(w_arg * jx)
            one = Jet.constant(1.0, base, order)
            zero = Jet.constant(0.0, base, order)
            return (-one, zero, -A, B)

        return NormalForm(id=5, m0=0, weights=(0, 1),
                          field=CallableJetField(kfun), label="form5")
    if form_id == 6:
        fs = f_interp if f_interp is not None else solve_F(m0, t_max=8.0)

        def kfun(px, py, order):
            if complex(py).real <= 0:
                raise JetError("form 6 requires Re y > 0 (fractional powers)")
            base = (px, py)
            jx = Jet.variable(0, base, order)
            jy = Jet.variable(1, base, order)
            A = jy ** (3 + m0)
            half = Fraction(1 + m0, 2)
            t_arg = (m0 + 1) * jx * jet_pow(jy, half)
            t0 = t_arg.value.real
            if not 0 <= t0 <= fs.t_max:
                raise JetError(
                    f"F-interpolant sampled outside [0, {fs.t_max}]")
            Fj = compose_series(_univariate_F_jet(fs, t0, order), t_arg)
            B = -jet_pow(jy, Fraction(9 + 3 * m0, 2)) * Fj
            one = Jet.constant(1.0, base, order)
            zero = Jet.constant(0.0, base, order)
            return (-one, zero, -A, B)

        return NormalForm(id=6, m0=m0, weights=(1 + m0, -2),
                          field=CallableJetField(kfun),
                          label=f"form6(m0={m0})")
    raise ValueError(f"unknown normal form id {form_id!r}")


def symmetry_losing_web():
    """A flat cubic web that is quasi-homogeneous nowhere near the origin.

    Slope form: dy^3 - 2 x^2 y (1 + x^2) dy dx^2 + 8 x^3 y^2 dx^3 = 0.
    Its connection is closed at regular points, yet no diagonal scaling
    flow preserves it at the origin.
    """
    x = PolyExpr.var(0)
    y = PolyExpr.var(1)
    K3 = PolyExpr.const(1)
    K1 = -2 * x * x * y * (PolyExpr.const(1) + x * x)
    K0 = 8 * x * x * x * y * y
    return PolyCoeffField(-1 * K3, PolyExpr.zero(), -1 * K1, K0)


# ---------------------------------------------------------------------------
# Weight detection / classification


_CATALOG_WEIGHTS = {(2, 3): 2, (1, 2): 3, (1, 3): 4}


@dataclass
class Classification:
    weights: tuple         # (w1, w2) or None
    matched_id: object     # catalog id, or None
    residual: float
    status: str            # matched | weights-only | unclassified


def classify_singularity(field, point=(0.0, 0.0), samples=None, a=0.08,
                         residual_tol=1e-6, max_weight=12):
    """Detect diagonal quasi-homogeneity weights of a singular germ.

    Searches coprime weight pairs (w1, w2) with 1 <= w1, w2 <= max_weight
    by the symmetry residual of the exact scaling flow about the singular
    point; a detected pair is matched against the catalog entries whose
    weights are parameter-free.
    """
    from .cubic import TranslatedField

    x0, y0 = point
    f = field if (x0 == 0 and y0 == 0) else TranslatedField(field, x0, y0)
    if samples is None:
        samples = [(0.31, 0.22), (-0.24, 0.18), (0.12, -0.27), (0.27, 0.33)]
    best = None
    for w1 in range(1, max_weight + 1):
        for w2 in range(1, max_weight + 1):
            if gcd(w1, w2) != 1:
                continue
            try:
                res = symmetry_residual(f, (w1, w2), samples, a=a)
            except Exception:
                continue
            if best is None or res < best[1]:
                best = ((w1, w2), res)
    if best is None or best[1] > residual_tol:
        res = np.inf if best is None else best[1]
        return Classification(weights=None, matched_id=None,
                              residual=float(res), status="unclassified")
    weights, res = best
    matched = _CATALOG_WEIGHTS.get(weights)
    status = "matched" if matched is not None else "weights-only"
    return Classification(weights=weights, matched_id=matched,
                          residual=float(res), status=status)
