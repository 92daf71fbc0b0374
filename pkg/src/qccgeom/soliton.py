"""Ricci and eta-Ricci solitons, and torse-forming generators.

A Ricci soliton is ``(g, V, lam)`` with ``L_V g + 2S + 2 lam g = 0``; it is
shrinking, steady or expanding as ``lam`` is negative, zero or positive.
The eta-variant adds ``2 mu eta (x) eta``.  Residuals are sampled in an
orthonormal frame and normalised by ``max(1, max |S|)``.

On a regular QCC manifold with ``V = xi`` the soliton constant is pinned:
``lam = -S(xi, xi)`` for Ricci solitons and ``lam + mu = -S(xi, xi)`` for
eta-Ricci solitons.  The reports below check these whenever they apply.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exprlang import as_expr, diff, evaluate_many
from .qcc import TOL_REG, QCCFit, as_geometry, fit_qcc, generator_frame, regularity
from .tensor import TOL_CLAIM, Geometry, TensorField, scale

__all__ = [
    "SHRINKING", "STEADY", "EXPANDING", "NOT_A_SOLITON",
    "SolitonReport", "TorseFormingFit", "PreconditionError", "SingularConditionError",
    "soliton_residual", "eta_soliton_residual", "soliton_loss", "best_lambda",
    "best_lambda_mu", "classify", "ricci_soliton_report", "eta_soliton_report",
    "geodesic_soliton_condition", "torse_forming_detect", "kenmotsu_type_check",
]

SHRINKING, STEADY, EXPANDING, NOT_A_SOLITON = "shrinking", "steady", "expanding", "not-a-soliton"


class PreconditionError(ValueError):
    pass


class SingularConditionError(PreconditionError):
    pass


def _soliton_parts(geo: Geometry, V: TensorField):
    """Frame components of ``L_V g + 2S`` and the Ricci scale."""
    A = geo.to_frame(geo.lie_derivative_metric(V) + 2 * geo.ricci, "dd")
    return A, scale(geo.to_frame(geo.ricci, "dd"))


def _eta_frame(geo, xi):
    if xi is None:
        return None
    return generator_frame(geo, xi)[2]


def _residual(A, lam, mu, e, s):
    n = A.shape[-1]
    T = A + 2 * lam * np.eye(n)
    if mu and e is not None:
        T = T + 2 * mu * np.einsum("pi,pj->pij", e, e)
    return float(np.max(np.abs(T))) / s


def soliton_residual(g, V: TensorField, lam: float, points=None) -> float:
    """max over samples of |L_V g + 2S + 2 lam g|, normalised."""
    geo = as_geometry(g, points)
    A, s = _soliton_parts(geo, V)
    return _residual(A, lam, 0.0, None, s)


def eta_soliton_residual(g, V: TensorField, lam: float, mu: float, xi: TensorField,
                         points=None) -> float:
    """As :func:`soliton_residual` with the extra ``2 mu eta (x) eta`` term."""
    geo = as_geometry(g, points)
    e = _eta_frame(geo, xi)
    A, s = _soliton_parts(geo, V)
    return _residual(A, lam, mu, e, s)


def soliton_loss(g, V: TensorField, lam: float, points=None) -> float:
    """Sum over samples of the squared frame norm of ``L_V g + 2S + 2 lam g``."""
    geo = as_geometry(g, points)
    A, _ = _soliton_parts(geo, V)
    T = A + 2 * lam * np.eye(geo.n)
    return float(np.sum(T * T))


def best_lambda(g, V: TensorField, points=None) -> tuple[float, float]:
    """Least-squares soliton constant and the residual there.

    ``lam* = -<L_V g + 2S, g> / (2 <g, g>)`` with the pairings summed over
    samples, i.e. the exact minimiser of :func:`soliton_loss`.
    """
    geo = as_geometry(g, points)
    A, s = _soliton_parts(geo, V)
    lam = -float(np.sum(np.trace(A, axis1=1, axis2=2))) / (2 * geo.n * len(A))
    return lam, _residual(A, lam, 0.0, None, s)


def best_lambda_mu(g, V: TensorField, xi: TensorField, points=None) -> tuple[float, float, float]:
    """Least-squares ``(lam, mu)`` for the eta-soliton equation and its residual."""
    geo = as_geometry(g, points)
    e = _eta_frame(geo, xi)
    A, s = _soliton_parts(geo, V)
    n, P = geo.n, len(A)
    # basis tensors 2I and 2 eta(x)eta; |eta| = 1 in the frame
    ee = np.einsum("pi,pj->pij", e, e)
    gram = np.array([[4.0 * n * P, 4.0 * np.sum(np.einsum("pii->p", ee))],
                     [0.0, 4.0 * np.sum(ee * ee)]])
    gram[1, 0] = gram[0, 1]
    rhs = -np.array([2.0 * np.sum(np.trace(A, axis1=1, axis2=2)), 2.0 * np.sum(A * ee)])
    lam, mu = np.linalg.solve(gram, rhs)
    return float(lam), float(mu), _residual(A, lam, mu, e, s)


def classify(lam: float, residual: float, tol: float = TOL_CLAIM) -> str:
    if not residual <= tol:
        return NOT_A_SOLITON
    if abs(lam) <= tol:
        return STEADY
    return SHRINKING if lam < 0 else EXPANDING


def _same_field(geo: Geometry, V: TensorField, xi: TensorField | None) -> bool:
    if xi is None:
        return False
    return bool(np.allclose(geo.values(V), geo.values(xi), rtol=0, atol=1e-12))


@dataclass
class SolitonReport:
    lam: float
    mu: float | None
    residual: float
    cls: str
    s_xixi: float | None = None
    lambda_predicted: float | None = None
    checks: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "fail" if any(v is False for v in self.checks.values()) else "pass"

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "mu": self.mu,
            "residual": self.residual,
            "class": self.cls,
            "S_xi_xi": self.s_xixi,
            "lambda_predicted": self.lambda_predicted,
            "checks": dict(self.checks),
        }


def _claim_context(geo, V, xi, fit):
    """Return (applies, S(xi,xi) mean, spread) for the generator-soliton claims."""
    if xi is None or not _same_field(geo, V, xi):
        return False, None, None
    if fit is None:
        fit = fit_qcc(geo, xi)
    if not (fit.is_qcc and regularity(fit).regular):
        return False, float(np.mean(fit.s_xixi)), float(np.ptp(fit.s_xixi))
    return True, float(np.mean(fit.s_xixi)), float(np.ptp(fit.s_xixi))


def ricci_soliton_report(g, V: TensorField, xi: TensorField | None = None, points=None, *,
                         fit: QCCFit | None = None, tol: float = TOL_CLAIM,
                         tol_reg: float = TOL_REG) -> SolitonReport:
    """Best soliton constant for ``V``, its class and the generator claims.

    With ``V = xi`` on a regular QCC manifold: a soliton must have
    ``lam = -S(xi, xi)``, so it cannot be steady.
    """
    geo = as_geometry(g, points)
    lam, res = best_lambda(geo, V)
    cls = classify(lam, res, tol)
    applies, s_mean, _ = _claim_context(geo, V, xi, fit)
    report = SolitonReport(lam, None, res, cls, s_xixi=s_mean)
    if applies:
        report.lambda_predicted = -s_mean
        if res <= tol:
            report.checks["lambda_equals_minus_S_xi_xi"] = abs(lam + s_mean) <= tol * (1 + abs(s_mean))
            report.checks["not_steady"] = abs(lam) > tol_reg * (geo.n - 1)
    return report


def eta_soliton_report(g, V: TensorField, xi: TensorField, points=None, *,
                       fit: QCCFit | None = None, tol: float = TOL_CLAIM) -> SolitonReport:
    """Best ``(lam, mu)``; with ``V = xi`` on regular QCC, ``lam + mu = -S(xi, xi)``."""
    geo = as_geometry(g, points)
    lam, mu, res = best_lambda_mu(geo, V, xi)
    cls = classify(lam, res, tol)
    applies, s_mean, _ = _claim_context(geo, V, xi, fit)
    report = SolitonReport(lam, mu, res, cls, s_xixi=s_mean)
    if applies:
        report.lambda_predicted = -s_mean
        if res <= tol:
            report.checks["lambda_plus_mu_equals_minus_S_xi_xi"] = (
                abs(lam + mu + s_mean) <= tol * (1 + abs(s_mean)))
    return report


def geodesic_soliton_condition(g, xi: TensorField, a, b, points=None, *,
                               tol_reg: float = TOL_REG) -> dict:
    """Geodesic test and the scalar condition for ``(g, xi, -S(xi,xi))``.

    ``a`` and ``b`` are expressions (numbers are promoted to constants).
    Reports ``|nabla_xi xi|``, the defect of
    ``xi(a+b)/(4b) + a(n-1) + b = (a+b)/(n-1)`` as stated, and the defect of
    ``xi(a+b)/(4b) + lam + a(n-1) + b = 0`` at ``lam = -S(xi, xi)``.
    """
    geo = as_geometry(g, points)
    n = geo.n
    if n < 4:
        raise PreconditionError(f"the geodesic soliton condition needs n >= 4, got n={n}")
    coords = geo.coords
    a_e, b_e = as_expr(a, coords), as_expr(b, coords)
    s_e = a_e + b_e
    env = {c: geo.points[:, i] for i, c in enumerate(coords)}
    grads = [diff(s_e, c) for c in coords]
    vals = evaluate_many([a_e, b_e] + grads, env)
    P = len(geo.points)
    a_v, b_v = (np.broadcast_to(np.asarray(x, dtype=float), (P,)) for x in vals[:2])
    grad = np.stack([np.broadcast_to(np.asarray(x, dtype=float), (P,)) for x in vals[2:]], axis=1)
    if np.min(np.abs(b_v)) <= tol_reg:
        raise SingularConditionError("geodesic soliton condition is singular: division by 4b with b = 0")

    v, _, _ = generator_frame(geo, xi)
    xi_s = np.einsum("pi,pi->p", v, grad)
    nxi = geo.covariant_derivative(xi)
    acc = np.einsum("pa,pai->pi", v, nxi)
    s_xixi = np.einsum("pi,pij,pj->p", v, geo.ricci, v)
    lhs = xi_s / (4 * b_v) + a_v * (n - 1) + b_v
    stated = lhs - (a_v + b_v) / (n - 1)
    with_lambda = lhs - s_xixi
    return {
        "geodesic_residual": float(np.max(geo.norm(acc))),
        "condition_defect": float(np.max(np.abs(stated))),
        "lambda_condition_defect": float(np.max(np.abs(with_lambda))),
        "xi_of_a_plus_b": xi_s,
        "S_xi_xi": s_xixi,
    }


# ---------------------------------------------------------------------------
# torse-forming generators

@dataclass
class TorseFormingFit:
    f: np.ndarray
    omega: np.ndarray  # coordinate components, [p, i]
    fit_residual: float
    subclass: str
    geodesic: bool
    kenmotsu: bool
    closed: bool | None
    f_plus_omega_xi: float
    kenmotsu_residual: float
    closedness_residual: float | None
    geodesic_residual: float
    tol: float = TOL_CLAIM

    @property
    def torse_forming(self) -> bool:
        return self.fit_residual <= self.tol

    @property
    def f_spread(self) -> float:
        return float(np.ptp(self.f))

    def as_dict(self) -> dict:
        return {
            "f_mean": float(np.mean(self.f)),
            "f_spread": self.f_spread,
            "fit_residual": self.fit_residual,
            "subclass": self.subclass,
            "geodesic": self.geodesic,
            "kenmotsu": self.kenmotsu,
            "closed": self.closed,
            "f_plus_omega_xi": self.f_plus_omega_xi,
            "kenmotsu_residual": self.kenmotsu_residual,
            "closedness_residual": self.closedness_residual,
            "geodesic_residual": self.geodesic_residual,
        }


def _divergence_jet(geo: Geometry, xi: TensorField):
    """``div xi`` and its coordinate gradient, from exact jets."""
    v, dv, d2v = geo.field_jets(xi, 2)
    G, dG = geo.gamma, geo.dgamma
    trace_g = np.einsum("pkkm->pm", G)
    div = np.einsum("pkk->p", dv) + np.einsum("pm,pm->p", trace_g, v)
    d_div = (np.einsum("pikk->pi", d2v)
             + np.einsum("pikkm,pm->pi", dG, v)
             + np.einsum("pm,pim->pi", trace_g, dv))
    return div, d_div


def _closedness(geo: Geometry, xi: TensorField) -> np.ndarray:
    """Exterior derivative of ``omega = -f eta`` with ``f = div(xi)/(n-1)``.

    For a unit torse-forming field, contracting ``nabla_X xi = fX + omega(X)xi``
    with ``eta`` gives ``omega = -f eta``, and tracing gives
    ``div xi = (n-1) f``; both sides are then exact functions of the
    metric and xi jets.
    """
    n = geo.n
    v, dv = geo.field_jets(xi, 1)
    div, d_div = _divergence_jet(geo, xi)
    f = div / (n - 1)
    df = d_div / (n - 1)
    eta = geo.lower(v)
    d_eta = np.einsum("pijm,pm->pij", geo.dg, v) + np.einsum("pjm,pim->pij", geo.g, dv)
    d_omega = -(np.einsum("pi,pj->pij", df, eta) + f[:, None, None] * d_eta)
    return d_omega - np.swapaxes(d_omega, 1, 2)


def torse_forming_detect(g, xi: TensorField, points=None, *, tol: float = TOL_CLAIM) -> TorseFormingFit:
    """Fit ``nabla_X xi = f X + omega(X) xi`` by least squares at each sample.

    Subclass, by priority: ``not-torse-forming``; ``geodesic`` when
    ``nabla xi = 0`` (f and omega vanish); ``kenmotsu-type`` when
    ``omega = -f eta``; ``concircular-candidate`` when ``d omega = 0``
    (exactness is not decided); otherwise ``generic``.
    """
    geo = as_geometry(g, points)
    v, eta, e = generator_frame(geo, xi)
    n = geo.n
    # N[p, c, b] = frame component b of nabla_{e_c} xi
    N = geo.to_frame(geo.covariant_derivative(xi), "du")
    P = len(N)
    I = np.eye(n)
    f = np.empty(P)
    omega_f = np.empty((P, n))
    model = np.empty_like(N)
    for p in range(P):
        # unknowns (f, omega_0..omega_{n-1}); rows indexed by (c, b)
        design = np.zeros((n, n, n + 1))
        design[:, :, 0] = I
        for c in range(n):
            design[c, :, 1 + c] = e[p]
        sol, *_ = np.linalg.lstsq(design.reshape(n * n, n + 1), N[p].reshape(-1), rcond=None)
        f[p] = sol[0]
        omega_f[p] = sol[1:]
        model[p] = (design.reshape(n * n, n + 1) @ sol).reshape(n, n)
    fit_res = float(np.max(np.abs(N - model))) / scale(N)
    omega = np.einsum("pc,pci->pi", omega_f, geo.coframe)
    f_plus = float(np.max(np.abs(f + np.einsum("pc,pc->p", omega_f, e))))
    ken = float(np.max(np.abs(omega_f + f[:, None] * e)))
    acc = np.einsum("pcb,pc->pb", N, e)
    geod = float(np.max(np.linalg.norm(acc, axis=1)))
    parallel = float(np.max(np.abs(N))) <= tol

    torse = fit_res <= tol
    closed = None
    closed_res = None
    if torse:
        d_omega = geo.to_frame(_closedness(geo, xi), "dd")
        closed_res = float(np.max(np.abs(d_omega)))
        closed = closed_res <= tol
    if not torse:
        subclass = "not-torse-forming"
    elif parallel:
        subclass = "geodesic"
    elif ken <= tol:
        subclass = "kenmotsu-type"
    elif closed:
        subclass = "concircular-candidate"
    else:
        subclass = "generic"
    return TorseFormingFit(
        f=f, omega=omega, fit_residual=fit_res, subclass=subclass,
        geodesic=geod <= tol, kenmotsu=torse and ken <= tol, closed=closed,
        f_plus_omega_xi=f_plus, kenmotsu_residual=ken, closedness_residual=closed_res,
        geodesic_residual=geod, tol=tol,
    )


def kenmotsu_type_check(g, xi: TensorField, tf: TorseFormingFit, fit: QCCFit, points=None, *,
                        tol: float = TOL_CLAIM) -> dict:
    """Consequences of a Kenmotsu-type generator on a QCC manifold.

    The claimed consequences are ``a + b = -f^2`` with ``f`` constant, so
    that on a regular manifold ``f != 0`` and a soliton ``(g, xi)`` would
    have ``lam = -S(xi, xi) = (n-1) f^2 > 0``, i.e. be expanding.

    Comparing ``R(X, Y) xi`` with the QCC form only forces
    ``df = xi(f) eta`` and ``a + b = -(f^2 + xi(f))``; that identity is
    checked separately.  When ``f`` is not constant the verdict comes from
    a direct soliton fit for ``V = xi`` instead of the sign argument.
    """
    if not tf.kenmotsu:
        raise PreconditionError(f"generator is not of Kenmotsu type (subclass {tf.subclass})")
    if not fit.is_qcc:
        raise PreconditionError("manifold is not verified to have quasi-constant curvature")
    geo = as_geometry(g, points)
    v, _, _ = generator_frame(geo, xi)
    n = geo.n
    f = tf.f
    _, d_div = _divergence_jet(geo, xi)
    xi_f = np.einsum("pi,pi->p", v, d_div) / (n - 1)
    sum_res = float(np.max(np.abs(fit.a + fit.b + f ** 2)))
    identity_res = float(np.max(np.abs(fit.a + fit.b + f ** 2 + xi_f)))
    spread = float(np.ptp(f))
    f_constant = spread <= tol * (1 + float(np.max(np.abs(f))))
    reg = regularity(fit)
    out = {
        "a_plus_b_plus_f2": sum_res,
        "a_plus_b_plus_f2_plus_xi_f": identity_res,
        "f_spread": spread,
        "f": float(np.mean(f)),
        "regularity": reg.status,
        "checks": {
            "curvature_identity": identity_res <= tol,
            "a_plus_b_equals_minus_f2": sum_res <= tol,
            "f_constant": f_constant,
        },
    }
    if not reg.regular:
        out["verdict"] = f"{reg.status}, no conclusion"
    elif f_constant:
        lam = (n - 1) * float(np.mean(f)) ** 2
        out["checks"]["f_nonzero"] = bool(np.min(np.abs(f)) > fit.tol_reg)
        out["lambda_predicted"] = lam
        out["lambda_from_S"] = -float(np.mean(fit.s_xixi))
        out["checks"]["lambda_matches_S"] = abs(lam + float(np.mean(fit.s_xixi))) <= tol * (1 + lam)
        out["verdict"] = classify(lam, 0.0, tol)
    else:
        lam, res = best_lambda(geo, xi)
        out["soliton_lambda"] = lam
        out["soliton_residual"] = res
        if res <= tol:
            out["verdict"] = classify(lam, res, tol)
            out["checks"]["soliton_expanding"] = out["verdict"] == EXPANDING
        else:
            out["verdict"] = "no Ricci soliton with V = xi"
    out["status"] = "pass" if all(out["checks"].values()) else "fail"
    return out
