"""Built-in manifolds and parameter-level example calculators.

Every entry is stored as expression text, so it can be emitted as a
manifest and re-read.  Expected values carry a provenance note and are
re-checked by the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational

from .tensor import Chart, MetricField, SymTensor2Field, VectorField

__all__ = [
    "ZooEntry", "builtin", "names", "QuasiUmbilicalParams", "HopfParams", "ExampleValues",
    "para_sasakian_values", "quasi_umbilical_values", "hopf_submanifold_values",
    "UnknownEntryError",
]


class UnknownEntryError(KeyError):
    def __str__(self):
        return self.args[0]


@dataclass(frozen=True)
class ZooEntry:
    name: str
    coords: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]
    metric_upper: dict
    xi: tuple[str, ...] | None = None
    V: tuple[str, ...] | None = None
    alpha_upper: dict | None = None
    expected: dict = field(default_factory=dict)
    description: str = ""

    @property
    def n(self) -> int:
        return len(self.coords)

    @cached_property
    def chart(self) -> Chart:
        return Chart(self.coords, self.domain)

    @cached_property
    def metric(self) -> MetricField:
        return MetricField(self.chart, dict(self.metric_upper))

    @cached_property
    def xi_field(self) -> VectorField | None:
        return None if self.xi is None else VectorField(self.xi, self.coords)

    @cached_property
    def V_field(self) -> VectorField | None:
        return None if self.V is None else VectorField(self.V, self.coords)

    @cached_property
    def alpha(self) -> SymTensor2Field | None:
        if self.alpha_upper is None:
            return None
        return SymTensor2Field(dict(self.alpha_upper), self.coords, n=self.n)

    def to_manifest(self) -> dict:
        m = {
            "name": self.name,
            "dim": self.n,
            "coords": list(self.coords),
            "domain": [list(d) for d in self.domain],
            "metric": {f"{i},{j}": s for (i, j), s in sorted(self.metric_upper.items())},
            "sampling": {"grid_per_axis": 2, "random_count": None, "seed": 0},
        }
        if self.xi is not None:
            m["xi"] = list(self.xi)
        if self.V is not None:
            m["V"] = list(self.V)
        if self.alpha_upper is not None:
            m["alpha"] = {f"{i},{j}": s for (i, j), s in sorted(self.alpha_upper.items())}
        return m


_CART = ("x", "y", "z", "w")
_WARPED = ("t", "x", "y", "z")


def _r2(names):
    return "+".join(f"{c}^2" for c in names)


def _diag(n, value, first=None):
    out = {(i, i): value for i in range(n)}
    if first is not None:
        out[(0, 0)] = first
    return out


def _unit_x(n):
    return ("1",) + ("0",) * (n - 1)


def _flat(n):
    c = _CART[:n]
    return dict(coords=c, domain=((-1.0, 1.0),) * n, metric_upper=_diag(n, "1"), xi=_unit_x(n))


def _entry_flat(n):
    return ZooEntry(
        "flat", **_flat(n),
        expected={"a": "0", "b": "0", "regular": False,
                  "provenance": "trivial: Euclidean metric has zero curvature"},
        description="Euclidean space with the parallel generator d/dx",
    )


def _entry_sphere(n):
    c = _CART[:n]
    r2 = _r2(c)
    return ZooEntry(
        "sphere", c, ((-1.0, 1.0),) * n, _diag(n, f"4/(1+{r2})^2"),
        xi=(f"(1+{r2})/2",) + ("0",) * (n - 1),
        expected={"a": "1", "b": "0", "regular": True,
                  "provenance": "derived: unit round sphere, constant curvature 1"},
        description="unit sphere in stereographic coordinates, xi = normalised d/dx",
    )


def _entry_hyperbolic(n):
    c = _CART[:n]
    r2 = _r2(c)
    return ZooEntry(
        "hyperbolic-ball", c, ((-0.4, 0.4),) * n, _diag(n, f"4/(1-({r2}))^2"),
        xi=(f"(1-({r2}))/2",) + ("0",) * (n - 1),
        expected={"a": "-1", "b": "0", "regular": True,
                  "provenance": "derived: Poincare ball, constant curvature -1"},
        description="Poincare ball model, xi = normalised d/dx",
    )


def _entry_warped_flat(n):
    c = _WARPED[:n]
    return ZooEntry(
        "warped-exp-flat", c, ((-1.0, 1.0),) * n, _diag(n, "exp(2*t)", first="1"),
        xi=_unit_x(n),
        expected={"a": "-1", "b": "0", "regular": True,
                  "torse_forming": {"f": 1.0, "subclass": "kenmotsu-type"},
                  "provenance": "derived: dt^2 + e^{2t} flat is hyperbolic space; "
                                "nabla_X d/dt = X - dt(X) d/dt"},
        description="hyperbolic space as dt^2 + e^{2t}(flat), xi = d/dt",
    )


def _entry_warped_sphere(n):
    c = _WARPED[:n]
    fib = _r2(c[1:])
    return ZooEntry(
        "warped-exp-sphere", c, ((-1.0, 1.0),) * n,
        _diag(n, f"exp(2*t)*4/(1+{fib})^2", first="1"),
        xi=_unit_x(n),
        expected={"a": "exp(-2*t)-1", "b": "-exp(-2*t)", "regular": True,
                  "provenance": "derived: warped product with f = e^t; fibre planes "
                                "have curvature (1-f'^2)/f^2, planes through d/dt -f''/f"},
        description="dt^2 + e^{2t}(round sphere), xi = d/dt; genuinely quasi-constant (b != 0)",
    )


def _entry_gaussian(n):
    c = _CART[:n]
    return ZooEntry(
        "gaussian-shrinker", **_flat(n), V=c,
        expected={"a": "0", "b": "0", "regular": False,
                  "soliton": {"lambda": -1.0, "class": "shrinking"},
                  "provenance": "derived: L_V g = 2g for the position field, S = 0"},
        description="flat space with the position field, the Gaussian shrinking soliton",
    )


def _entry_counterexample(n):
    alpha = _diag(n, "1", first="2")
    return ZooEntry(
        "flat-counterexample", **_flat(n), alpha_upper=alpha,
        expected={"a": "0", "b": "0", "regular": False,
                  "parallel": {"parallel": True, "proportional": False},
                  "provenance": "trivial: constant components on flat space are parallel; "
                                "alpha = g + dx dx is not a multiple of g"},
        description="flat space, xi = d/dx, parallel alpha = g + dx(x)dx not proportional to g",
    )


_BUILDERS = {
    "flat": _entry_flat,
    "sphere": _entry_sphere,
    "hyperbolic-ball": _entry_hyperbolic,
    "warped-exp-flat": _entry_warped_flat,
    "warped-exp-sphere": _entry_warped_sphere,
    "gaussian-shrinker": _entry_gaussian,
    "flat-counterexample": _entry_counterexample,
}


def names() -> list[str]:
    return list(_BUILDERS)


def builtin(name: str, n: int = 3) -> ZooEntry:
    try:
        build = _BUILDERS[name]
    except KeyError:
        raise UnknownEntryError(f"unknown zoo entry {name!r}; known: {', '.join(_BUILDERS)}") from None
    if n not in (3, 4):
        raise ValueError(f"zoo entries come in dimensions 3 and 4, got {n}")
    return build(n)


# ---------------------------------------------------------------------------
# parameter-level examples, in exact arithmetic

def _exact(x) -> Fraction:
    if isinstance(x, (Fraction, int, Rational)):
        return Fraction(x)
    return Fraction(float(x))


def _soliton_class(lam: Fraction) -> str:
    if lam < 0:
        return "shrinking"
    if lam > 0:
        return "expanding"
    return "steady"


@dataclass(frozen=True)
class ExampleValues:
    a: Fraction
    b: Fraction
    regular: bool
    lam: Fraction | None
    cls: str | None
    r: Fraction | None = None


def _finish(a, b, n, r=None) -> ExampleValues:
    s = a + b
    regular = s != 0
    if not regular:
        return ExampleValues(a, b, False, None, None, r)
    # lam = -S(xi, xi) = -(a+b)(n-1)
    lam = -(n - 1) * s
    return ExampleValues(a, b, True, lam, _soliton_class(lam), r)


def para_sasakian_values(n: int, r=None) -> ExampleValues:
    """Para-Sasakian manifold of constant scalar curvature ``r``.

    ``a = (r + 2(n-1)) / ((n-1)(n-2))``, ``b = (-r - n(n-1)) / ((n-1)(n-2))``;
    ``a + b = -1`` identically, so the generator soliton is expanding with
    ``lam = n - 1``.  With ``r=None`` the geodesic soliton condition is
    imposed, which forces ``r = -n``.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    if r is None:
        if n < 4:
            raise ValueError("the geodesic soliton condition needs n >= 4")
        r = -n
    r = _exact(r)
    d = (n - 1) * (n - 2)
    a = (r + 2 * (n - 1)) / d
    b = (-r - n * (n - 1)) / d
    return _finish(a, b, n, r)


@dataclass(frozen=True)
class QuasiUmbilicalParams:
    """Quasi-umbilical hypersurface ``h = alpha g + beta eta (x) eta`` in a space form of curvature ``c``."""

    c: float
    alpha: float
    beta: float
    n: int = 4

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"n must be at least 3, got {self.n}")


def quasi_umbilical_values(p: QuasiUmbilicalParams) -> ExampleValues:
    """``a = c + alpha^2``, ``b = alpha beta``; regular iff ``c + alpha^2 + alpha beta != 0``."""
    c, al, be = _exact(p.c), _exact(p.alpha), _exact(p.beta)
    return _finish(c + al * al, al * be, p.n)


@dataclass(frozen=True)
class HopfParams:
    """Anti-invariant totally geodesic submanifold of a generalized Hopf manifold."""

    omega0_norm: float
    n: int = 4

    def __post_init__(self):
        if self.omega0_norm < 0:
            raise ValueError("omega0_norm must be non-negative")
        if self.n < 3:
            raise ValueError(f"n must be at least 3, got {self.n}")


def hopf_submanifold_values(p: HopfParams) -> ExampleValues:
    """``c = |omega0|/2``, ``a = c^2``, ``b = -1/4``; regular iff ``|omega0| != 1``."""
    c = _exact(p.omega0_norm) / 2
    return _finish(c * c, Fraction(-1, 4), p.n)
