"""Tensor calculus on a single coordinate chart.

Component functions are expressions; every derivative is taken
symbolically and then evaluated at a batch of sample points, so all
pointwise arrays below carry a leading sample axis ``P``.

Index conventions
-----------------
* ``dg[p, c, i, j]`` is ``d_c g_ij``; derivative axes always come first.
* ``gamma[p, k, i, j]`` is the Christoffel symbol ``Gamma^k_ij``.
* ``riemann[p, l, k, i, j]`` is ``R^l_kij`` with
  ``R(d_i, d_j) d_k = R^l_kij d_l`` and
  ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``, so the round sphere has
  ``R(X, Y)Z = g(Y, Z)X - g(X, Z)Y``.
* ``riemann_low[p, l, k, i, j] = g(R(d_i, d_j) d_k, d_l)``.
* ``ricci[p, i, j] = R^k_ikj``, the trace of ``Z -> R(Z, X)Y``.
"""
from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exprlang import Expr, as_expr, diff, evaluate_many, simplify

__all__ = [
    "Chart", "TensorField", "VectorField", "OneForm", "SymTensor2Field", "MetricField",
    "Geometry", "CurvatureAtPoint", "DegenerateMetricError", "TOL_CURV", "TOL_CLAIM",
    "metric_at", "christoffel", "riemann", "ricci", "scalar_curvature",
    "covariant_derivative", "second_covariant_derivative", "ricci_identity_residual",
    "lie_derivative_metric", "connection_terms", "scale", "dual_one_form", "sym_product",
]

TOL_CURV = 1e-9
TOL_CLAIM = 1e-6
DEFAULT_SAMPLES = 64


class DegenerateMetricError(ValueError):
    """The metric is not symmetric positive definite at a sample point."""

    def __init__(self, point):
        self.point = np.asarray(point, dtype=float)
        super().__init__(f"metric is not positive definite at point {self.point.tolist()}")


def scale(*arrays) -> float:
    """max(1, max |entry|): the normaliser used for relative residuals."""
    m = 1.0
    for a in arrays:
        a = np.asarray(a)
        if a.size:
            m = max(m, float(np.max(np.abs(a))))
    return m


@dataclass(frozen=True)
class Chart:
    """Coordinate patch with a deterministic sampling plan.

    Samples are the cell centres of a ``grid_per_axis``-per-axis grid plus
    ``random_count`` seeded uniform points; by default the two add up to 64.
    """

    coords: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]
    grid_per_axis: int = 2
    random_count: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "domain", tuple((float(lo), float(hi)) for lo, hi in self.domain))
        if len(self.coords) < 3:
            raise ValueError(f"chart dimension must be at least 3, got {len(self.coords)}")
        if len(set(self.coords)) != len(self.coords):
            raise ValueError(f"duplicate coordinate names in {self.coords}")
        if len(self.domain) != len(self.coords):
            raise ValueError("one domain interval per coordinate is required")
        for name, (lo, hi) in zip(self.coords, self.domain):
            if not lo < hi:
                raise ValueError(f"empty domain for {name}: [{lo}, {hi}]")
        if self.grid_per_axis < 0:
            raise ValueError("grid_per_axis must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def n_random(self) -> int:
        if self.random_count is not None:
            return int(self.random_count)
        return max(0, DEFAULT_SAMPLES - self.grid_per_axis ** self.dim)

    def with_sampling(self, *, grid_per_axis=None, random_count=None, seed=None) -> "Chart":
        return Chart(
            self.coords, self.domain,
            self.grid_per_axis if grid_per_axis is None else grid_per_axis,
            self.random_count if random_count is None else random_count,
            self.seed if seed is None else seed,
        )

    def sample_points(self) -> np.ndarray:
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        parts = []
        m = self.grid_per_axis
        if m > 0:
            axis = (np.arange(m) + 0.5) / m
            grid = np.array(list(itertools.product(axis, repeat=self.dim)))
            parts.append(lo + grid * (hi - lo))
        if self.n_random:
            rng = np.random.default_rng(self.seed)
            parts.append(rng.uniform(lo, hi, size=(self.n_random, self.dim)))
        if not parts:
            raise ValueError("sampling plan produces no points")
        return np.concatenate(parts, axis=0)

    def contains(self, points) -> bool:
        pts = np.atleast_2d(points)
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        return bool(np.all((pts >= lo) & (pts <= hi)))


# ---------------------------------------------------------------------------
# tensor fields with expression components

def _coerce(value, coords):
    e = as_expr(value, coords)
    return simplify(e)


class TensorField:
    """Tensor field with expression components.

    ``kinds`` has one letter per index: ``"u"`` (contravariant) or ``"d"``
    (covariant).  Components form an ``(n,)*rank`` object array of Exprs.
    """

    def __init__(self, components, kinds: str, coords: Sequence[str] | None = None):
        if any(k not in "ud" for k in kinds):
            raise ValueError(f"index kinds must be 'u' or 'd', got {kinds!r}")
        arr = np.empty(np.shape(np.asarray(components, dtype=object)), dtype=object)
        src = np.asarray(components, dtype=object)
        if arr.ndim != len(kinds):
            raise ValueError(f"components have rank {arr.ndim}, kinds {kinds!r} need {len(kinds)}")
        if len(set(arr.shape)) > 1:
            raise ValueError(f"components must be square, got shape {arr.shape}")
        cache: dict[int, Expr] = {}
        for idx in np.ndindex(arr.shape):
            v = src[idx]
            if isinstance(v, Expr):
                # keep shared entries (e.g. mirrored symmetric ones) shared
                arr[idx] = cache.setdefault(id(v), _coerce(v, coords))
            else:
                arr[idx] = _coerce(v, coords)
        self.components = arr
        self.kinds = kinds
        self.coords = None if coords is None else tuple(coords)

    @property
    def dim(self) -> int:
        return self.components.shape[0] if self.components.ndim else 0

    @property
    def rank(self) -> int:
        return len(self.kinds)

    def __getitem__(self, idx):
        return self.components[idx]

    def _combine(self, other, op):
        if not isinstance(other, TensorField) or other.kinds != self.kinds:
            return NotImplemented
        comps = np.empty_like(self.components)
        for idx in np.ndindex(comps.shape):
            comps[idx] = op(self.components[idx], other.components[idx])
        return self._like(comps)

    def _like(self, comps):
        return TensorField(comps, self.kinds, self.coords)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, c):
        if isinstance(c, TensorField):
            return NotImplemented
        c = as_expr(c, self.coords)
        comps = np.empty_like(self.components)
        for idx in np.ndindex(comps.shape):
            comps[idx] = c * self.components[idx]
        return self._like(comps)

    __rmul__ = __mul__

    def jets(self, coords: Sequence[str], points: np.ndarray, order: int = 1) -> list[np.ndarray]:
        """Values and partial derivatives up to ``order`` at ``points``.

        Entry ``k`` has shape ``(P,) + (n,)*k + component shape``.
        """
        return _jets(self.components, coords, points, order)


class VectorField(TensorField):
    def __init__(self, components, coords=None):
        super().__init__(list(components), "u", coords)

    def _like(self, comps):
        return VectorField(comps, self.coords)


class OneForm(TensorField):
    def __init__(self, components, coords=None):
        super().__init__(list(components), "d", coords)

    def _like(self, comps):
        return OneForm(comps, self.coords)


def _symmetric_matrix(components, n=None):
    """Accept a full matrix or an upper-triangle mapping {(i, j): expr}."""
    if isinstance(components, Mapping):
        if n is None:
            n = 1 + max(max(k) for k in components)
        mat = np.empty((n, n), dtype=object)
        mat[...] = 0.0
        for (i, j), v in components.items():
            mat[i, j] = v
            mat[j, i] = v
        return mat
    mat = np.asarray(components, dtype=object)
    out = np.empty_like(mat)
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            # only the upper triangle is read; the lower one mirrors it
            out[i, j] = mat[min(i, j), max(i, j)]
    return out


class SymTensor2Field(TensorField):
    """Symmetric covariant 2-tensor; symmetry is exact by storage."""

    def __init__(self, components, coords=None, n=None):
        mat = _symmetric_matrix(components, n if n is not None else (len(coords) if coords else None))
        super().__init__(mat, "dd", coords)
        for i in range(self.dim):
            for j in range(i):
                self.components[i, j] = self.components[j, i]

    def _like(self, comps):
        return SymTensor2Field(comps, self.coords)


class MetricField(SymTensor2Field):
    """Riemannian metric on a chart."""

    def __init__(self, chart: Chart, components):
        self.chart = chart
        super().__init__(components, chart.coords, n=chart.dim)
        if self.dim != chart.dim:
            raise ValueError(f"metric is {self.dim}x{self.dim} but chart has dimension {chart.dim}")

    def _like(self, comps):
        return SymTensor2Field(comps, self.coords)

    def as_tensor(self) -> SymTensor2Field:
        return SymTensor2Field(self.components, self.coords)


def _jets(components: np.ndarray, coords, points, order):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != len(coords):
        raise ValueError(f"points have {points.shape[1]} coordinates, chart has {len(coords)}")
    return [_jet_level(components, coords, points, k) for k in range(order + 1)]


# ---------------------------------------------------------------------------
# numeric connection algebra

_LETTERS = "bcefghopqrstuvwxyz"


def connection_terms(gamma: np.ndarray, T: np.ndarray, kinds: str) -> np.ndarray:
    """Christoffel corrections of a covariant derivative.

    Returns ``C[..., a, i1..ir] = sum_up Gamma^{i_s}_{a m} T[..m..]
    - sum_down Gamma^m_{a i_s} T[..m..]``; leading axes broadcast.
    """
    r = len(kinds)
    idx = _LETTERS[:r]
    out = None
    for s, kind in enumerate(kinds):
        t_in = idx[:s] + "m" + idx[s + 1:]
        if kind == "u":
            term = np.einsum(f"...{idx[s]}am,...{t_in}->...a{idx}", gamma, T)
        else:
            term = -np.einsum(f"...ma{idx[s]},...{t_in}->...a{idx}", gamma, T)
        out = term if out is None else out + term
    if out is None:
        # scalar: no corrections
        n = gamma.shape[-1]
        return np.zeros(np.broadcast_shapes(gamma.shape[:-3], T.shape) + (n,))
    return out


def _nabla(T, dT, gamma, kinds):
    return dT + connection_terms(gamma, T, kinds)


def _nabla2(T, dT, d2T, gamma, dgamma, kinds):
    """Components ``H[p, b, a, idx] = (nabla_b nabla T)_{a idx}``."""
    nT = _nabla(T, dT, gamma, kinds)
    # d_b (nabla_a T) by the product rule
    d_nT = (
        d2T
        + connection_terms(dgamma, T[:, None], kinds)
        + connection_terms(gamma[:, None], dT, kinds)
    )
    return d_nT + connection_terms(gamma, nT, "d" + kinds)


def _lowered_christoffel(dg):
    # last three axes (c, i, j) of d_c g_ij -> Gamma_{l i j}
    a = np.moveaxis(dg, -1, -3)
    return 0.5 * (a + np.swapaxes(a, -1, -2) - dg)


def _riemann_from(gamma, dgamma):
    lin = np.einsum("...iljk->...lkij", dgamma)
    quad = np.einsum("...lim,...mjk->...lkij", gamma, gamma)
    t = lin + quad
    return t - np.swapaxes(t, -1, -2)


# ---------------------------------------------------------------------------

class Geometry:
    """Pointwise geometry of a metric on a batch of sample points.

    Every quantity is computed once on first access and reused, so
    analyses that share a Geometry share the curvature work.
    """

    def __init__(self, metric: MetricField, points=None):
        self.metric = metric
        self.coords = metric.chart.coords
        if points is None:
            points = metric.chart.sample_points()
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.n = metric.dim

    def _metric_derivs(self, k):
        return _jet_level(self.metric.components, self.coords, self.points, k)

    @cached_property
    def g(self) -> np.ndarray:
        return self._metric_derivs(0)

    @cached_property
    def cholesky(self) -> np.ndarray:
        g = self.g
        for p in range(g.shape[0]):
            try:
                np.linalg.cholesky(g[p])
            except np.linalg.LinAlgError:
                raise DegenerateMetricError(self.points[p]) from None
        return np.linalg.cholesky(g)

    @cached_property
    def ginv(self) -> np.ndarray:
        self.cholesky
        return np.linalg.inv(self.g)

    @cached_property
    def frame(self) -> np.ndarray:
        """Orthonormal frame: columns ``E[:, a]`` with ``E^T g E = I``."""
        return np.swapaxes(np.linalg.inv(self.cholesky), -1, -2)

    @cached_property
    def coframe(self) -> np.ndarray:
        """Inverse of :attr:`frame` (maps vector components to frame components)."""
        return np.swapaxes(self.cholesky, -1, -2)

    @cached_property
    def dg(self):
        return self._metric_derivs(1)

    @cached_property
    def d2g(self):
        return self._metric_derivs(2)

    @cached_property
    def d3g(self):
        return self._metric_derivs(3)

    @cached_property
    def dginv(self):
        # d_b g^{-1} = -g^{-1} (d_b g) g^{-1}
        return -np.einsum("pkl,pblm,pmj->pbkj", self.ginv, self.dg, self.ginv)

    @cached_property
    def d2ginv(self):
        gi, dg = self.ginv, self.dg
        x = np.einsum("pkl,palm,pmn,pbnq,pqj->pabkj", gi, dg, gi, dg, gi)
        return x + np.swapaxes(x, 1, 2) - np.einsum("pkl,pablm,pmj->pabkj", gi, self.d2g, gi)

    @cached_property
    def gamma_low(self):
        return _lowered_christoffel(self.dg)

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.einsum("pkl,plij->pkij", self.ginv, self.gamma_low)

    @cached_property
    def dgamma(self) -> np.ndarray:
        """``dgamma[p, b, k, i, j] = d_b Gamma^k_ij``."""
        dlow = _lowered_christoffel(self.d2g)
        return (np.einsum("pbkl,plij->pbkij", self.dginv, self.gamma_low)
                + np.einsum("pkl,pblij->pbkij", self.ginv, dlow))

    @cached_property
    def d2gamma(self) -> np.ndarray:
        dlow = _lowered_christoffel(self.d2g)
        d2low = _lowered_christoffel(self.d3g)
        x = np.einsum("pbkl,palij->pabkij", self.dginv, dlow)
        return (np.einsum("pabkl,plij->pabkij", self.d2ginv, self.gamma_low)
                + x + np.swapaxes(x, 1, 2)
                + np.einsum("pkl,pablij->pabkij", self.ginv, d2low))

    @cached_property
    def riemann(self) -> np.ndarray:
        return _riemann_from(self.gamma, self.dgamma)

    @cached_property
    def riemann_low(self) -> np.ndarray:
        return np.einsum("plm,pmkij->plkij", self.g, self.riemann)

    @cached_property
    def ricci(self) -> np.ndarray:
        return np.einsum("pkikj->pij", self.riemann)

    @cached_property
    def scalar(self) -> np.ndarray:
        return np.einsum("pij,pij->p", self.ginv, self.ricci)

    @cached_property
    def ricci_operator(self) -> np.ndarray:
        """``Q[p, i, j]`` with ``S(X, Y) = g(QX, Y)``, i.e. ``Q^i_j``."""
        return np.einsum("pik,pkj->pij", self.ginv, self.ricci)

    @cached_property
    def driemann(self) -> np.ndarray:
        """``driemann[p, a, l, k, i, j] = d_a R^l_kij``."""
        d2 = self.d2gamma
        lin = np.einsum("...aiLjk->...aLkij", d2)
        quad = (np.einsum("paLim,pmjk->paLkij", self.dgamma, self.gamma)
                + np.einsum("pLim,pamjk->paLkij", self.gamma, self.dgamma))
        t = lin + quad
        return t - np.swapaxes(t, -1, -2)

    @cached_property
    def nabla_riemann(self) -> np.ndarray:
        return _nabla(self.riemann, self.driemann, self.gamma, "uddd")

    # -- frame helpers --------------------------------------------------
    def to_frame(self, T: np.ndarray, kinds: str) -> np.ndarray:
        """Components of a pointwise tensor in the orthonormal frame."""
        out = T
        r = len(kinds)
        for s, kind in enumerate(kinds):
            axis = 1 + s
            mat = self.frame if kind == "d" else np.swapaxes(self.coframe, -1, -2)
            # contract axis s with mat[p, i, a]
            out = np.moveaxis(np.einsum("pi...,pia->pa...", np.moveaxis(out, axis, 1), mat), 1, axis)
        assert out.ndim == T.ndim and r == T.ndim - 1
        return out

    def lower(self, V: np.ndarray) -> np.ndarray:
        return np.einsum("pij,pj->pi", self.g, V)

    def norm(self, V: np.ndarray) -> np.ndarray:
        return np.sqrt(np.einsum("pi,pij,pj->p", V, self.g, V))

    # -- fields ---------------------------------------------------------
    def field_jets(self, field: TensorField, order: int = 1):
        return field.jets(self.coords, self.points, order)

    def covariant_derivative(self, field: TensorField) -> np.ndarray:
        """``(nabla T)[p, a, idx] = nabla_a T_idx`` (derivative index first)."""
        if field.rank > 4:
            raise ValueError(f"covariant derivative supports rank <= 4, got {field.rank}")
        T, dT = self.field_jets(field, 1)
        return _nabla(T, dT, self.gamma, field.kinds)

    def second_covariant_derivative(self, field: TensorField) -> np.ndarray:
        """``H[p, b, a, idx] = (nabla^2 T)(idx; b, a) = (nabla_b nabla_a - nabla_{nabla_b d_a}) T``."""
        if field.rank > 3:
            raise ValueError(f"second covariant derivative supports rank <= 3, got {field.rank}")
        T, dT, d2T = self.field_jets(field, 2)
        return _nabla2(T, dT, d2T, self.gamma, self.dgamma, field.kinds)

    def lie_derivative_metric(self, V: TensorField) -> np.ndarray:
        """``(L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k``."""
        if V.kinds != "u":
            raise ValueError("Lie derivative needs a vector field")
        v, dv = self.field_jets(V, 1)
        t = np.einsum("pkj,pik->pij", self.g, dv)
        return np.einsum("pk,pkij->pij", v, self.dg) + t + np.swapaxes(t, -1, -2)

    def values(self, field: TensorField) -> np.ndarray:
        return self.field_jets(field, 0)[0]

    def curvature_at(self, index: int) -> "CurvatureAtPoint":
        return CurvatureAtPoint(
            point=self.points[index],
            gamma=self.gamma[index],
            riemann=self.riemann[index],
            riemann_low=self.riemann_low[index],
            ricci=self.ricci[index],
            scalar=float(self.scalar[index]),
        )

    # -- engine self-tests ----------------------------------------------
    def symmetry_residuals(self) -> dict[str, float]:
        """Relative defects of the algebraic curvature identities."""
        R = self.to_frame(self.riemann_low, "dddd")
        s = scale(R)
        bianchi = R + np.einsum("plijk->plkij", R) + np.einsum("pljki->plkij", R)
        return {
            "antisym_last": float(np.max(np.abs(R + np.swapaxes(R, 3, 4)))) / s,
            "antisym_first": float(np.max(np.abs(R + np.swapaxes(R, 1, 2)))) / s,
            "pair_symmetry": float(np.max(np.abs(R - np.einsum("plkij->pijlk", R)))) / s,
            "first_bianchi": float(np.max(np.abs(bianchi))) / s,
            "ricci_symmetry": float(np.max(np.abs(self.ricci - np.swapaxes(self.ricci, 1, 2)))) / scale(self.ricci),
        }

    def metricity_residual(self) -> float:
        return float(np.max(np.abs(self.covariant_derivative(self.metric.as_tensor()))))


def _jet_level(components, coords, points, k):
    """Only the k-th derivative level (avoids recomputing lower ones)."""
    points = np.atleast_2d(points)
    P, n = points.shape
    shape = components.shape
    flat = list(components.reshape(-1))
    env = {c: points[:, i] for i, c in enumerate(coords)}
    keys = list(itertools.combinations_with_replacement(range(n), k))
    exprs = []
    for key in keys:
        for e in flat:
            for a in key:
                e = diff(e, coords[a])
            exprs.append(e)
    values = evaluate_many(exprs, env)
    arr = np.empty((P,) + (n,) * k + (len(flat),))
    pos = 0
    for key in keys:
        block = np.stack([np.broadcast_to(np.asarray(v, dtype=float), (P,)) for v in values[pos:pos + len(flat)]], axis=-1)
        pos += len(flat)
        for perm in set(itertools.permutations(key)):
            arr[(slice(None),) + perm] = block
    return arr.reshape((P,) + (n,) * k + shape)


@dataclass
class CurvatureAtPoint:
    point: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray
    riemann_low: np.ndarray
    ricci: np.ndarray
    scalar: float


# ---------------------------------------------------------------------------
# functional front end; ``p`` is one point or a (P, n) batch

def _geometry(g: MetricField, p) -> tuple[Geometry, bool]:
    arr = np.asarray(p, dtype=float)
    return Geometry(g, np.atleast_2d(arr)), arr.ndim == 1


def _one(x, single):
    return x[0] if single else x


def metric_at(g: MetricField, p):
    geo, single = _geometry(g, p)
    geo.cholesky
    return _one(geo.g, single), _one(geo.ginv, single)


def christoffel(g: MetricField, p):
    geo, single = _geometry(g, p)
    return _one(geo.gamma, single)


def riemann(g: MetricField, p) -> CurvatureAtPoint | list[CurvatureAtPoint]:
    geo, single = _geometry(g, p)
    out = [geo.curvature_at(i) for i in range(len(geo.points))]
    return out[0] if single else out


def ricci(g: MetricField, p):
    geo, single = _geometry(g, p)
    return _one(geo.ricci, single)


def scalar_curvature(g: MetricField, p):
    geo, single = _geometry(g, p)
    r = geo.scalar
    return float(r[0]) if single else r


def covariant_derivative(T: TensorField, g: MetricField, p):
    geo, single = _geometry(g, p)
    return _one(geo.covariant_derivative(T), single)


def second_covariant_derivative(alpha: TensorField, g: MetricField, p):
    geo, single = _geometry(g, p)
    return _one(geo.second_covariant_derivative(alpha), single)


def ricci_identity_defect(geo: Geometry, alpha: TensorField) -> np.ndarray:
    """Pointwise defect of the Ricci identity for a covariant 2-tensor.

    ``H(X,Y;Z,W) - H(X,Y;W,Z) + alpha(R(Z,W)X, Y) + alpha(X, R(Z,W)Y)``,
    indexed ``[p, z, w, x, y]``.
    """
    if alpha.kinds != "dd":
        raise ValueError("Ricci identity check expects a covariant 2-tensor")
    H = geo.second_covariant_derivative(alpha)
    a = geo.values(alpha)
    R = geo.riemann
    return (H - np.swapaxes(H, 1, 2)
            + np.einsum("pmxzw,pmy->pzwxy", R, a)
            + np.einsum("pmyzw,pxm->pzwxy", R, a))


def ricci_identity_residual(alpha: TensorField, g: MetricField, p) -> float:
    """Max relative Ricci-identity defect over index choices and points."""
    geo, _ = _geometry(g, p)
    return _ricci_identity_residual(geo, alpha)


def _ricci_identity_residual(geo: Geometry, alpha: TensorField) -> float:
    D = geo.to_frame(ricci_identity_defect(geo, alpha), "dddd")
    H = geo.to_frame(geo.second_covariant_derivative(alpha), "dddd")
    a = geo.to_frame(geo.values(alpha), "dd")
    R = geo.to_frame(geo.riemann_low, "dddd")
    return float(np.max(np.abs(D))) / max(scale(H), scale(a) * scale(R))


def lie_derivative_metric(V: TensorField, g: MetricField, p):
    geo, single = _geometry(g, p)
    return _one(geo.lie_derivative_metric(V), single)


def dual_one_form(metric: MetricField, xi: TensorField) -> OneForm:
    """``eta_i = g_ij xi^j`` as expressions."""
    n = metric.dim
    comps = []
    for i in range(n):
        acc = as_expr(0.0)
        for j in range(n):
            acc = acc + metric.components[i, j] * xi.components[j]
        comps.append(acc)
    return OneForm(comps, metric.coords)


def sym_product(omega: TensorField, theta: TensorField | None = None) -> SymTensor2Field:
    """Symmetrised product; ``sym_product(eta)`` is ``eta (x) eta``."""
    theta = omega if theta is None else theta
    n = omega.dim
    comps = {}
    for i in range(n):
        for j in range(i, n):
            if theta is omega:
                comps[(i, j)] = omega.components[i] * omega.components[j]
            else:
                comps[(i, j)] = 0.5 * (omega.components[i] * theta.components[j]
                                       + omega.components[j] * theta.components[i])
    return SymTensor2Field(comps, omega.coords, n=n)
