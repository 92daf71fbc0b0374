"""Parallel symmetric 2-tensors on quasi-constant curvature manifolds.

On a regular QCC manifold a parallel symmetric covariant 2-tensor is a
constant multiple of the metric.  :func:`verify_parallel_tensor` checks that
implication on a supplied candidate tensor: it does not solve
``nabla alpha = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcc import QCCFit, as_geometry, fit_qcc, generator_frame, regularity
from .tensor import TOL_CLAIM, Geometry, TensorField, scale

__all__ = [
    "ParallelReport", "parallel_residual", "commutation_residual", "verify_parallel_tensor",
]


def _check_sym2(alpha: TensorField):
    if alpha.kinds != "dd":
        raise ValueError("alpha must be a covariant 2-tensor")


def parallel_residual(g, alpha: TensorField, points=None) -> float:
    """max |nabla_k alpha_ij| over samples (orthonormal frame), relative to |alpha|."""
    _check_sym2(alpha)
    geo = as_geometry(g, points)
    na = geo.to_frame(geo.covariant_derivative(alpha), "ddd")
    return float(np.max(np.abs(na))) / scale(geo.to_frame(geo.values(alpha), "dd"))


def _commutator(geo: Geometry, a: np.ndarray) -> np.ndarray:
    # alpha(R(X,Y)Z, W) + alpha(Z, R(X,Y)W), indexed [p, x, y, z, w]
    R = geo.riemann
    return (np.einsum("pmzxy,pmw->pxyzw", R, a)
            + np.einsum("pmwxy,pzm->pxyzw", R, a))


def commutation_residual(g, alpha: TensorField, points=None) -> float:
    """Frame max of ``alpha(R(X,Y)Z,W) + alpha(Z,R(X,Y)W)``, relative to |alpha||R|.

    It vanishes for any parallel alpha (Ricci identity with nabla^2 alpha = 0).
    """
    _check_sym2(alpha)
    geo = as_geometry(g, points)
    a = geo.values(alpha)
    c = geo.to_frame(_commutator(geo, a), "dddd")
    return float(np.max(np.abs(c))) / (
        scale(geo.to_frame(a, "dd")) * scale(geo.to_frame(geo.riemann_low, "dddd"))
    )


@dataclass
class ParallelReport:
    parallel_residual: float
    alpha_xi_xi: np.ndarray
    alpha_xi_xi_spread: float
    alpha_xi_residual: float
    proportionality_residual: float
    commutation_residual: float
    unit_derivative_residual: float
    regularity: str
    is_qcc: bool
    conclusion: str
    tol: float = TOL_CLAIM

    @property
    def parallel(self) -> bool:
        return self.parallel_residual <= self.tol

    @property
    def proportional(self) -> bool:
        return self.proportionality_residual <= self.tol

    @property
    def status(self) -> str:
        if self.conclusion == "verified":
            return "pass"
        if self.conclusion == "violated":
            return "fail"
        return "indeterminate"

    def as_dict(self) -> dict:
        return {
            "parallel_residual": self.parallel_residual,
            "alpha_xi_xi_mean": float(np.mean(self.alpha_xi_xi)),
            "alpha_xi_xi_spread": self.alpha_xi_xi_spread,
            "alpha_xi_residual": self.alpha_xi_residual,
            "proportionality_residual": self.proportionality_residual,
            "commutation_residual": self.commutation_residual,
            "unit_derivative_residual": self.unit_derivative_residual,
            "regularity": self.regularity,
            "is_qcc": self.is_qcc,
            "conclusion": self.conclusion,
        }


def verify_parallel_tensor(g, xi: TensorField, alpha: TensorField, points=None, *,
                           fit: QCCFit | None = None, tol: float = TOL_CLAIM) -> ParallelReport:
    """Check that a parallel alpha on a regular QCC manifold is alpha(xi,xi) g.

    The intermediate facts are reported too: ``alpha(Y, xi) =
    eta(Y) alpha(xi, xi)``, constancy of ``alpha(xi, xi)`` and
    ``g(nabla_X xi, xi) = 0`` (a consequence of |xi| = 1).  The report's
    conclusion is one of ``verified``, ``violated``,
    ``not applicable: alpha is not parallel``,
    ``not guaranteed: non-regular`` (or ``indeterminate``/``not QCC``).
    """
    _check_sym2(alpha)
    geo = as_geometry(g, points)
    v, eta, e = generator_frame(geo, xi)
    if fit is None:
        fit = fit_qcc(geo, xi, tol_claim=tol)
    reg = regularity(fit)

    a_f = geo.to_frame(geo.values(alpha), "dd")
    n = geo.n
    axx = np.einsum("pi,pij,pj->p", e, a_f, e)
    spread = float(np.ptp(axx))
    a_xi = np.einsum("pij,pj->pi", a_f, e)
    alpha_xi = float(np.max(np.abs(a_xi - axx[:, None] * e)))
    prop = float(np.max(np.abs(a_f - axx[:, None, None] * np.eye(n))))

    nxi = geo.covariant_derivative(xi)  # [p, a, i] = nabla_a xi^i
    unit_defect = float(np.max(np.abs(np.einsum("pai,pi->pa", nxi, eta))))

    par = parallel_residual(geo, alpha)
    comm = commutation_residual(geo, alpha)
    constant = spread <= tol * (1 + abs(float(np.mean(axx))))

    if par > tol:
        conclusion = "not applicable: alpha is not parallel"
    elif not fit.is_qcc:
        conclusion = "not guaranteed: not QCC"
    elif reg.status == "non-regular":
        conclusion = "not guaranteed: non-regular"
    elif reg.status == "indeterminate":
        conclusion = "not guaranteed: regularity indeterminate"
    elif alpha_xi <= tol and prop <= tol and constant:
        conclusion = "verified"
    else:
        conclusion = "violated"

    return ParallelReport(
        parallel_residual=par,
        alpha_xi_xi=axx,
        alpha_xi_xi_spread=spread,
        alpha_xi_residual=alpha_xi,
        proportionality_residual=prop,
        commutation_residual=comm,
        unit_derivative_residual=unit_defect,
        regularity=reg.status,
        is_qcc=fit.is_qcc,
        conclusion=conclusion,
        tol=tol,
    )
