"""Quasi-constant curvature detection.

A metric ``g`` with unit generator ``xi`` (dual 1-form ``eta``) has
quasi-constant curvature when

    R(X,Y)Z = a[g(Y,Z)X - g(X,Z)Y] + b[g(Y,Z)eta(X) - g(X,Z)eta(Y)]xi
              + b eta(Z)[eta(Y)X - eta(X)Y].

``a`` and ``b`` are recovered pointwise from the scalar curvature ``r`` and
``S(xi, xi)``; the curvature-form residual is then an independent verdict.
All residuals are measured in an orthonormal frame, relative to the
curvature scale ``max(1, max |R|)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import TOL_CLAIM, Geometry, MetricField, TensorField, scale

__all__ = [
    "TOL_REG", "TOL_UNIT", "NonUnitGeneratorError", "RegularityConsistencyError",
    "QCCFit", "ab_from_curvature", "curvature_from_ab", "fit_ab", "qcc_model",
    "qcc_residual", "fit_qcc", "check_derived_identities", "Regularity",
    "regularity", "regularity_equivalences", "local_symmetry_residual",
    "ricci_semisym_residual", "as_geometry", "generator_frame",
]

TOL_REG = 1e-6
TOL_UNIT = 1e-8


class NonUnitGeneratorError(ValueError):
    pass


class RegularityConsistencyError(RuntimeError):
    """The four regularity criteria disagree (engine bug or non-QCC input)."""


def as_geometry(g, points=None) -> Geometry:
    if isinstance(g, Geometry):
        if points is not None and not np.array_equal(np.atleast_2d(points), g.points):
            return Geometry(g.metric, points)
        return g
    if isinstance(g, MetricField):
        return Geometry(g, points)
    raise TypeError(f"expected a Geometry or MetricField, got {type(g).__name__}")


def generator_frame(geo: Geometry, xi: TensorField, tol: float = TOL_UNIT):
    """Return ``(xi, eta, eta_frame)`` pointwise, checking that xi is unit."""
    v = geo.values(xi)
    norm = geo.norm(v)
    defect = float(np.max(np.abs(norm - 1.0)))
    if defect > tol:
        worst = int(np.argmax(np.abs(norm - 1.0)))
        raise NonUnitGeneratorError(
            f"generator is not unit: |xi| = {norm[worst]!r} at {geo.points[worst].tolist()}"
        )
    eta = geo.lower(v)
    eta_f = np.einsum("pi,pia->pa", eta, geo.frame)
    return v, eta, eta_f


def ab_from_curvature(r, s_xixi, n: int):
    """(a, b) from scalar curvature and S(xi, xi); inverse of :func:`curvature_from_ab`."""
    n = np.asarray(n)
    if np.any(n < 3):
        raise ValueError(f"quasi-constant curvature needs n >= 3, got n={n}")
    d = (n - 1) * (n - 2)
    a = (np.asarray(r) - 2 * np.asarray(s_xixi)) / d
    b = (n * np.asarray(s_xixi) - np.asarray(r)) / d
    return a, b


def curvature_from_ab(a, b, n: int):
    """(r, S(xi, xi)) = ((n-1)(na+2b), (a+b)(n-1))."""
    return (n - 1) * (n * a + 2 * b), (a + b) * (n - 1)


def _s_xixi(geo: Geometry, v: np.ndarray) -> np.ndarray:
    return np.einsum("pi,pij,pj->p", v, geo.ricci, v)


def fit_ab(g, xi: TensorField, points=None):
    """Pointwise (a, b) from r and S(xi, xi); valid whether or not g is QCC."""
    geo = as_geometry(g, points)
    v, _, _ = generator_frame(geo, xi)
    return ab_from_curvature(geo.scalar, _s_xixi(geo, v), geo.n)


def qcc_model(eta_f: np.ndarray, a, b) -> np.ndarray:
    """Frame components ``M[p, l, k, i, j] = g(R(e_i, e_j) e_k, e_l)`` of the QCC form."""
    P, n = eta_f.shape
    a = np.broadcast_to(np.asarray(a, dtype=float), (P,))[:, None, None, None, None]
    b = np.broadcast_to(np.asarray(b, dtype=float), (P,))[:, None, None, None, None]
    I = np.eye(n)
    const = np.einsum("jk,il->lkij", I, I) - np.einsum("ik,jl->lkij", I, I)
    e = eta_f
    t1 = np.einsum("jk,pi,pl->plkij", I, e, e) - np.einsum("ik,pj,pl->plkij", I, e, e)
    t2 = np.einsum("pk,pj,il->plkij", e, e, I) - np.einsum("pk,pi,jl->plkij", e, e, I)
    return a * const[None] + b * (t1 + t2)


def _qcc_defect(geo: Geometry, eta_f, a, b):
    R = geo.to_frame(geo.riemann_low, "dddd")
    return R - qcc_model(eta_f, a, b), scale(R)


def qcc_residual(g, xi: TensorField, a, b, points=None) -> float:
    """Max frame defect of the QCC curvature form, relative to curvature scale."""
    geo = as_geometry(g, points)
    _, _, eta_f = generator_frame(geo, xi)
    D, s = _qcc_defect(geo, eta_f, a, b)
    return float(np.max(np.abs(D))) / s


@dataclass
class QCCFit:
    a: np.ndarray
    b: np.ndarray
    s_xixi: np.ndarray
    scalar: np.ndarray
    n: int
    xi_unit_residual: float
    qcc_residual: float
    pointwise_residual: np.ndarray = field(repr=False)
    tol_claim: float = TOL_CLAIM
    tol_reg: float = TOL_REG

    @property
    def is_qcc(self) -> bool:
        return self.qcc_residual <= self.tol_claim

    @property
    def regular_points(self) -> np.ndarray:
        return np.abs(self.a + self.b) > self.tol_reg

    @property
    def regular(self) -> bool:
        return regularity(self).status == "regular"

    @property
    def constant_curvature(self) -> bool:
        """b = 0 everywhere: the generator is not identifiable from curvature."""
        return bool(np.max(np.abs(self.b)) < self.tol_reg)

    @property
    def a_spread(self) -> float:
        return float(np.ptp(self.a))

    @property
    def b_spread(self) -> float:
        return float(np.ptp(self.b))

    def constant_ab(self, tol: float | None = None) -> bool:
        tol = self.tol_claim if tol is None else tol
        return (self.a_spread <= tol * (1 + np.max(np.abs(self.a)))
                and self.b_spread <= tol * (1 + np.max(np.abs(self.b))))


def fit_qcc(g, xi: TensorField, points=None, *, tol_claim=TOL_CLAIM, tol_reg=TOL_REG) -> QCCFit:
    geo = as_geometry(g, points)
    v, _, eta_f = generator_frame(geo, xi)
    s = _s_xixi(geo, v)
    a, b = ab_from_curvature(geo.scalar, s, geo.n)
    D, sc = _qcc_defect(geo, eta_f, a, b)
    per_point = np.max(np.abs(D.reshape(len(D), -1)), axis=1) / sc
    return QCCFit(
        a=a, b=b, s_xixi=s, scalar=geo.scalar.copy(), n=geo.n,
        xi_unit_residual=float(np.max(np.abs(geo.norm(v) - 1.0))),
        qcc_residual=float(np.max(per_point)),
        pointwise_residual=per_point,
        tol_claim=tol_claim, tol_reg=tol_reg,
    )


def check_derived_identities(g, xi: TensorField, a, b, points=None) -> dict[str, float]:
    """Residuals of the consequences of the QCC form.

    Keys: ``R(X,Y)xi``, ``R(X,xi)Z``, ``ricci`` (eta-Einstein form),
    ``scalar``, ``ricci_operator``, ``Q_xi`` (xi is an eigenvector with
    eigenvalue (a+b)(n-1)) and ``a+b`` (a+b = S(xi,xi)/(n-1)).
    Curvature residuals are relative to the curvature scale, Ricci ones to
    the Ricci scale.
    """
    geo = as_geometry(g, points)
    v, _, e = generator_frame(geo, xi)
    n = geo.n
    P = len(geo.points)
    a = np.broadcast_to(np.asarray(a, dtype=float), (P,))
    b = np.broadcast_to(np.asarray(b, dtype=float), (P,))
    ab = (a + b)[:, None, None, None]
    I = np.eye(n)
    R = geo.to_frame(geo.riemann_low, "dddd")
    sR = scale(R)
    S = geo.to_frame(geo.ricci, "dd")
    sS = scale(S)

    # g(R(e_i, e_j) xi, e_l) = (a+b)[eta_j delta_il - eta_i delta_jl]
    lhs = np.einsum("plkij,pk->plij", R, e)
    rhs = ab * (np.einsum("pj,il->plij", e, I) - np.einsum("pi,jl->plij", e, I))
    rxy_xi = float(np.max(np.abs(lhs - rhs))) / sR

    # g(R(e_i, xi) e_k, e_l) = (a+b)[eta_k delta_il - delta_ik eta_l]
    lhs = np.einsum("plkij,pj->plki", R, e)
    rhs = ab * (np.einsum("pk,il->plki", e, I) - np.einsum("ik,pl->plki", I, e))
    rx_xi_z = float(np.max(np.abs(lhs - rhs))) / sR

    alpha = (a * (n - 1) + b)[:, None, None]
    beta = (b * (n - 2))[:, None, None]
    S_model = alpha * I + beta * np.einsum("pi,pj->pij", e, e)
    ricci_form = float(np.max(np.abs(S - S_model))) / sS

    r_model = (n - 1) * (n * a + 2 * b)
    scalar_form = float(np.max(np.abs(geo.scalar - r_model) / (1 + np.abs(geo.scalar))))

    # Q as a (1,1) tensor in the frame: Q^a_b = S_ab there
    Q = geo.to_frame(geo.ricci_operator, "ud")
    q_form = float(np.max(np.abs(Q - S_model))) / sS

    xi_f = np.einsum("pai,pi->pa", geo.coframe, v)
    q_xi = np.einsum("pab,pb->pa", Q, xi_f)
    q_xi_defect = float(np.max(np.abs(q_xi - ((a + b) * (n - 1))[:, None] * xi_f))) / sS

    s = _s_xixi(geo, v)
    sum_ab = float(np.max(np.abs((a + b) - s / (n - 1)))) / sS
    return {
        "R(X,Y)xi": rxy_xi,
        "R(X,xi)Z": rx_xi_z,
        "ricci": ricci_form,
        "scalar": scalar_form,
        "ricci_operator": q_form,
        "Q_xi": q_xi_defect,
        "a+b": sum_ab,
    }


@dataclass
class Regularity:
    status: str  # "regular", "non-regular" or "indeterminate"
    min_abs_sum: float
    max_abs_sum: float
    regular_points: np.ndarray

    @property
    def regular(self) -> bool:
        return self.status == "regular"


def regularity(fit: QCCFit, tol_reg: float | None = None) -> Regularity:
    """Regular iff |a+b| > tol_reg at every sample.

    All samples at or below the threshold give "non-regular"; a mixture
    gives "indeterminate" rather than a silent classification.  So does a
    sign change of a+b between samples, since a+b then vanishes somewhere
    in the chart.
    """
    tol = fit.tol_reg if tol_reg is None else tol_reg
    signed = np.asarray(fit.a) + np.asarray(fit.b)
    s = np.abs(signed)
    pts = s > tol
    if np.all(pts):
        status = "regular" if np.all(signed > 0) or np.all(signed < 0) else "indeterminate"
    elif not np.any(pts):
        status = "non-regular"
    else:
        status = "indeterminate"
    return Regularity(status, float(np.min(s)), float(np.max(s)), pts)


def regularity_equivalences(g, xi: TensorField, fit: QCCFit, points=None, *, strict=True) -> dict:
    """Evaluate the four regularity criteria pointwise and check they agree.

    (i) a+b != 0; (ii) xi is not semi-torse-forming, i.e. R(X,xi)xi != 0
    for some frame X; (iii) S(xi,xi) != 0; (iv) Q xi != 0.
    """
    geo = as_geometry(g, points)
    v, _, e = generator_frame(geo, xi)
    n = geo.n
    tol = fit.tol_reg
    R = geo.to_frame(geo.riemann_low, "dddd")
    # column b holds R(e_b, xi) xi
    rxx = np.einsum("plkij,pk,pj->pli", R, e, e)
    r_norm = np.max(np.linalg.norm(rxx, axis=1), axis=1)
    s = _s_xixi(geo, v)
    q_norm = geo.norm(np.einsum("pij,pj->pi", geo.ricci_operator, v))
    crit = {
        "regular": np.abs(fit.a + fit.b) > tol,
        "not_semi_torse_forming": r_norm > tol,
        "S_xi_xi_nonzero": np.abs(s) > tol * (n - 1),
        "Q_xi_nonzero": q_norm > tol * (n - 1),
    }
    stacked = np.stack(list(crit.values()))
    agree_points = np.all(stacked == stacked[0], axis=0)
    report = {name: bool(np.all(val)) for name, val in crit.items()}
    report.update(
        consistent=bool(np.all(agree_points)),
        residuals={
            "a+b": float(np.min(np.abs(fit.a + fit.b))),
            "R(X,xi)xi": float(np.min(r_norm)),
            "S(xi,xi)": float(np.min(np.abs(s))),
            "Q xi": float(np.min(q_norm)),
        },
    )
    if strict and not report["consistent"]:
        bad = int(np.argmin(agree_points))
        raise RegularityConsistencyError(
            f"regularity criteria disagree at {geo.points[bad].tolist()}: "
            + ", ".join(f"{k}={bool(v[bad])}" for k, v in crit.items())
        )
    return report


def local_symmetry_residual(g, points=None) -> float:
    """max |nabla R| in an orthonormal frame (zero for locally symmetric metrics)."""
    geo = as_geometry(g, points)
    nR = np.einsum("plm,pamkij->palkij", geo.g, geo.nabla_riemann)
    return float(np.max(np.abs(geo.to_frame(nR, "ddddd"))))


def ricci_semisym_residual(g, points=None) -> float:
    """max |(R(X,Y).S)(Z,W)| = |-S(R(X,Y)Z, W) - S(Z, R(X,Y)W)| over a frame."""
    geo = as_geometry(g, points)
    R, S = geo.riemann, geo.ricci
    t = -np.einsum("pmzxy,pmw->pxyzw", R, S) - np.einsum("pmwxy,pzm->pxyzw", R, S)
    return float(np.max(np.abs(geo.to_frame(t, "dddd"))))
