"""Jet-based recognition of planar-map singularities.

A map germ R^2 -> R^2 is classified from its degree-4 jet by the structure
of the critical set (zero set of det J) and of the restriction of the map
to it: diffeomorphism, fold, cusp, lips, beaks, swallowtail, or Degenerate
when no decision quantity clears its margin. No normal-form reduction is
performed; the criteria are evaluated literally.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import IllConditionedError
from .jets import Jet2, compose, eval_along

JET_ORDER = 4
DECISION_TOL = 1e-6
MARGIN_CAP = 1e12


class SingularityClass(Enum):
    DIFFEOMORPHISM = "Diffeomorphism"
    FOLD = "Fold"
    CUSP = "Cusp"
    LIPS = "Lips"
    BEAKS = "Beaks"
    SWALLOWTAIL = "Swallowtail"
    DEGENERATE = "Degenerate"


class CriticalSetKind(Enum):
    EMPTY = "Empty"
    SMOOTH_CURVE = "SmoothCurve"
    ISOLATED_POINT = "IsolatedPoint"
    TRANSVERSE_CROSSING = "TransverseCrossing"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class PlanarMapJet:
    """Degree-4 Taylor jet of a map R^2 -> R^2 at a base point."""

    base: tuple
    comp1: Jet2
    comp2: Jet2
    coeff_error: float = 0.0

    @classmethod
    def from_terms(cls, terms1, terms2, base=(0.0, 0.0)):
        return cls(
            tuple(base),
            Jet2.from_terms(terms1, JET_ORDER),
            Jet2.from_terms(terms2, JET_ORDER),
        )

    @classmethod
    def from_callable(cls, f, base=(0.0, 0.0), h=1e-2):
        """Degree-4 jet by least squares on a local grid (testing helper)."""
        xs = np.arange(-4, 5) * h
        pts = [(x, y) for x in xs for y in xs]
        vals = np.array([f(base[0] + x, base[1] + y) for (x, y) in pts])
        monos = [(i, j) for i in range(JET_ORDER + 1) for j in range(JET_ORDER + 1 - i)]
        A = np.array([[x**i * y**j for (i, j) in monos] for (x, y) in pts])
        sol, *_ = np.linalg.lstsq(A, vals, rcond=None)
        t1 = {m: sol[k, 0] for k, m in enumerate(monos)}
        t2 = {m: sol[k, 1] for k, m in enumerate(monos)}
        return cls.from_terms(t1, t2, base)

    def det_jet(self):
        """Jet of det J = u_s v_t - u_t v_s (degree-3 coefficient data)."""
        return (
            self.comp1.dx() * self.comp2.dy() - self.comp1.dy() * self.comp2.dx()
        )

    def map_jets(self):
        return self.comp1, self.comp2


@dataclass(frozen=True)
class CriticalSet:
    kind: CriticalSetKind
    tangent: tuple = None  # unit tangent for a smooth curve
    margins: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Classification:
    klass: SingularityClass
    critical: CriticalSet
    margins: dict
    restriction: tuple = ()  # curve coefficients of g|Sigma when traced

    @property
    def min_margin(self):
        vals = [v for v in self.margins.values() if np.isfinite(v)]
        return min(vals) if vals else 0.0


def _margin_nonzero(value, tol):
    return min(abs(value) / tol, MARGIN_CAP)


def _margin_zero(value, tol):
    if value == 0.0:
        return MARGIN_CAP
    return min(tol / abs(value), MARGIN_CAP)


def _tol_for(tol, name):
    """Tolerance lookup: scalar applies everywhere, a dict is per quantity.

    Keys: 'det' (det J at the base), 'grad' (its gradient), 'hess' (its
    Hessian determinant), 'restrict' (restriction-curve coefficients).
    """
    if isinstance(tol, dict):
        return tol.get(name, tol.get("default", DECISION_TOL))
    return tol


def critical_set(jet, tol=DECISION_TOL):
    """Structure of {det J = 0} near the base from the 2-jet of det J."""
    d = jet.det_jet()
    d0 = d.value()
    grad = np.array([d.partial(1, 0), d.partial(0, 1)])
    gnorm = np.linalg.norm(grad)
    margins = {}
    if abs(d0) > _tol_for(tol, "det"):
        margins["detJ_nonzero"] = _margin_nonzero(d0, _tol_for(tol, "det"))
        return CriticalSet(CriticalSetKind.EMPTY, margins=margins)
    margins["detJ_zero"] = _margin_zero(d0, _tol_for(tol, "det"))
    if gnorm > _tol_for(tol, "grad"):
        margins["grad_detJ_nonzero"] = _margin_nonzero(gnorm, _tol_for(tol, "grad"))
        tangent = np.array([-grad[1], grad[0]]) / gnorm
        return CriticalSet(CriticalSetKind.SMOOTH_CURVE, tuple(tangent), margins)
    margins["grad_detJ_zero"] = _margin_zero(gnorm, _tol_for(tol, "grad"))
    H = np.array(
        [
            [d.partial(2, 0), d.partial(1, 1)],
            [d.partial(1, 1), d.partial(0, 2)],
        ]
    )
    deth = np.linalg.det(H)
    if abs(deth) <= _tol_for(tol, "hess"):
        margins["hess_detJ_degenerate"] = _margin_zero(deth, _tol_for(tol, "hess"))
        return CriticalSet(CriticalSetKind.DEGENERATE, margins=margins)
    margins["hess_detJ_nonzero"] = _margin_nonzero(deth, _tol_for(tol, "hess"))
    kind = (
        CriticalSetKind.ISOLATED_POINT if deth > 0 else CriticalSetKind.TRANSVERSE_CROSSING
    )
    return CriticalSet(kind, margins=margins)


def _restriction_curve(jet, tangent, order=JET_ORDER):
    """Taylor coefficients of g restricted to its critical curve.

    Parametrizes Sigma as a*tangent + b(a)*normal with b solving
    det J (curve(a)) = 0, then pushes the curve through both components.
    Returns (gamma1, gamma2) coefficient arrays (degree 0..order).
    """
    d = jet.det_jet()
    tau = np.asarray(tangent, dtype=float)
    nu = np.array([-tau[1], tau[0]])
    grad = np.array([d.partial(1, 0), d.partial(0, 1)])
    slope = grad @ nu
    b = np.zeros(order + 1)
    for _ in range(order + 1):
        px = tau[0] * _unit_poly(order) + nu[0] * b
        py = tau[1] * _unit_poly(order) + nu[1] * b
        vals = eval_along(d, px, py)
        b[1:] -= vals[1:] / slope
        b[0] = 0.0
    px = tau[0] * _unit_poly(order) + nu[0] * b
    py = tau[1] * _unit_poly(order) + nu[1] * b
    g1 = eval_along(jet.comp1, px, py)
    g2 = eval_along(jet.comp2, px, py)
    return g1, g2


def _unit_poly(order):
    p = np.zeros(order + 1)
    p[1] = 1.0
    return p


def classify(jet, tol=DECISION_TOL):
    """Singularity class of the map germ from its degree-4 jet."""
    cs = critical_set(jet, tol)
    margins = dict(cs.margins)
    if cs.kind is CriticalSetKind.EMPTY:
        return Classification(SingularityClass.DIFFEOMORPHISM, cs, margins)
    if cs.kind is CriticalSetKind.ISOLATED_POINT:
        return Classification(SingularityClass.LIPS, cs, margins)
    if cs.kind is CriticalSetKind.TRANSVERSE_CROSSING:
        return Classification(SingularityClass.BEAKS, cs, margins)
    if cs.kind is CriticalSetKind.DEGENERATE:
        return Classification(SingularityClass.DEGENERATE, cs, margins)

    rtol = _tol_for(tol, "restrict")
    g1, g2 = _restriction_curve(jet, cs.tangent)
    gam = np.stack([g1, g2])  # rows: components; columns: degree 0..4
    speed1 = np.linalg.norm(gam[:, 1])
    if speed1 > rtol:
        margins["restriction_immersive"] = _margin_nonzero(speed1, rtol)
        return Classification(
            SingularityClass.FOLD, cs, margins, restriction=(g1, g2)
        )
    margins["restriction_speed_zero"] = _margin_zero(speed1, rtol)
    quad = gam[:, 2]
    cubic = gam[:, 3]
    quartic = gam[:, 4] if gam.shape[1] > 4 else np.zeros(2)
    if np.linalg.norm(quad) > rtol:
        margins["restriction_quadratic"] = _margin_nonzero(np.linalg.norm(quad), rtol)
        indep = quad[0] * cubic[1] - quad[1] * cubic[0]
        if abs(indep) > rtol:
            margins["cusp_independence"] = _margin_nonzero(indep, rtol)
            return Classification(
                SingularityClass.CUSP, cs, margins, restriction=(g1, g2)
            )
        margins["cusp_independence_failed"] = _margin_zero(indep, rtol)
        return Classification(
            SingularityClass.DEGENERATE, cs, margins, restriction=(g1, g2)
        )
    margins["restriction_quadratic_zero"] = _margin_zero(np.linalg.norm(quad), rtol)
    if np.linalg.norm(cubic) > rtol:
        margins["restriction_cubic"] = _margin_nonzero(np.linalg.norm(cubic), rtol)
        indep = cubic[0] * quartic[1] - cubic[1] * quartic[0]
        if abs(indep) > rtol:
            margins["swallowtail_independence"] = _margin_nonzero(indep, rtol)
            return Classification(
                SingularityClass.SWALLOWTAIL, cs, margins, restriction=(g1, g2)
            )
        margins["swallowtail_independence_failed"] = _margin_zero(indep, rtol)
    return Classification(
        SingularityClass.DEGENERATE, cs, margins, restriction=(g1, g2)
    )


# -- normal forms and equivalence helpers ------------------------------------


def normal_form(klass):
    """Representative jets of the five standard classes."""
    x = {(1, 0): 1.0}
    forms = {
        SingularityClass.DIFFEOMORPHISM: (x, {(0, 1): 1.0}),
        SingularityClass.FOLD: (x, {(0, 2): 1.0}),
        SingularityClass.CUSP: (x, {(1, 1): 1.0, (0, 3): 1.0}),
        SingularityClass.LIPS: (x, {(2, 1): 1.0, (0, 3): 1.0}),
        SingularityClass.BEAKS: (x, {(2, 1): 1.0, (0, 3): -1.0}),
        SingularityClass.SWALLOWTAIL: (x, {(1, 1): 1.0, (0, 4): 1.0}),
    }
    t1, t2 = forms[klass]
    return PlanarMapJet.from_terms(t1, t2)


def random_near_identity(rng, max_coeff=0.2, degree=3):
    """Polynomial diffeomorphism germ: identity plus small terms to degree 3."""
    terms1 = {(1, 0): 1.0, (0, 1): 0.0}
    terms2 = {(1, 0): 0.0, (0, 1): 1.0}
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if i + j < 1 or i + j > degree:
                continue
            if (i, j) == (1, 0) or (i, j) == (0, 1):
                terms1[(i, j)] += rng.uniform(-max_coeff, max_coeff)
                terms2[(i, j)] += rng.uniform(-max_coeff, max_coeff)
            else:
                terms1[(i, j)] = rng.uniform(-max_coeff, max_coeff)
                terms2[(i, j)] = rng.uniform(-max_coeff, max_coeff)
    return PlanarMapJet.from_terms(terms1, terms2)


def compose_maps(outer, inner):
    """Jet of outer o inner (both PlanarMapJet, inner fixing the origin)."""
    q1, q2 = inner.comp1, inner.comp2
    q1 = q1 - q1.value()
    q2 = q2 - q2.value()
    return PlanarMapJet(
        inner.base,
        compose(outer.comp1, q1, q2),
        compose(outer.comp2, q1, q2),
    )


# -- numeric fields -> jets ---------------------------------------------------


def fit_field_jet(field, tol_cond=1e8):
    """PlanarMapJet of g : (s, t) -> (u, v) at the base node of a GraphField.

    Degrees 0..3 come from the implicit-function derivatives at the base
    node (exact, no differencing); only the quartic terms are fitted, by
    weighted least squares on the residual after removing the exact cubic
    part, with degree-5/6 nuisance monomials absorbing the truncation.
    """
    i0, j0 = field.base_index
    s0, t0 = field.s_axis[i0], field.t_axis[j0]
    f = field.first
    g = field.second
    b3 = field.base_third
    if b3 is None:
        raise IllConditionedError("field lacks base third derivatives")

    def exact_terms(key):
        k = {"u": 0, "v": 1}[key]
        return {
            (0, 0): {"u": field.U, "v": field.V}[key][i0, j0],
            (1, 0): f[f"{key}_s"][i0, j0],
            (0, 1): f[f"{key}_t"][i0, j0],
            (2, 0): 0.5 * g[f"{key}_ss"][i0, j0],
            (1, 1): g[f"{key}_st"][i0, j0],
            (0, 2): 0.5 * g[f"{key}_tt"][i0, j0],
            (3, 0): b3["W_sss"][k] / 6.0,
            (2, 1): b3["W_sst"][k] / 2.0,
            (1, 2): b3["W_stt"][k] / 2.0,
            (0, 3): b3["W_ttt"][k] / 6.0,
        }

    tu = exact_terms("u")
    tv = exact_terms("v")

    ii, jj = np.nonzero(field.ok)
    ss = field.s_axis[ii] - s0
    tt = field.t_axis[jj] - t0
    w = np.exp(-0.5 * (ss**2 + tt**2) / np.max(ss**2 + tt**2 + 1e-300))
    quartic = [(i, j) for i in range(5) for j in range(5 - i) if i + j == 4]
    nuisance = [(i, j) for i in range(7) for j in range(7 - i) if 5 <= i + j <= 6]
    monos = quartic + nuisance
    scale = max(np.max(np.abs(ss)), np.max(np.abs(tt)))
    A = np.array([(ss / scale) ** i * (tt / scale) ** j for (i, j) in monos]).T
    cond = np.linalg.cond(A * w[:, None])
    if cond > tol_cond:
        raise IllConditionedError(f"field jet fit condition number {cond:.2e}")

    def fit(vals, terms):
        cubic_part = sum(coeff * ss**i * tt**j for (i, j), coeff in terms.items())
        b = (vals - cubic_part) * w
        sol, *_ = np.linalg.lstsq(A * w[:, None], b, rcond=None)
        out = dict(terms)
        for k, (i, j) in enumerate(monos[: len(quartic)]):
            out[(i, j)] = sol[k] / scale ** (i + j)
        return out

    tu = fit(field.U[ii, jj], tu)
    tv = fit(field.V[ii, jj], tv)
    return PlanarMapJet.from_terms(tu, tv, base=(s0, t0)), cond


def classify_field(field, tol=DECISION_TOL):
    """Fit the graph-map jet at the base node, then classify."""
    jet, cond = fit_field_jet(field)
    result = classify(jet, tol)
    result.margins["fit_condition"] = cond
    return result
