"""Command line front end.

    qccgeom analyze MANIFEST [--analyses qcc,soliton,parallel,torse]
                    [--out FILE] [--seed N] [--samples N] [--tol NAME=VALUE]
    qccgeom zoo list
    qccgeom zoo emit NAME [--dim 3|4] [--out FILE]

Exit codes: 0 when no analysis fails, 1 when one does, 2 on input errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .exprlang import ExprError, ExprSyntaxError, parse
from .parallel import verify_parallel_tensor
from .qcc import (
    TOL_REG, NonUnitGeneratorError, RegularityConsistencyError, check_derived_identities,
    fit_qcc, local_symmetry_residual, regularity, regularity_equivalences,
    ricci_semisym_residual,
)
from .soliton import (
    PreconditionError, eta_soliton_report, geodesic_soliton_condition,
    kenmotsu_type_check, ricci_soliton_report, torse_forming_detect,
)
from .tensor import (
    TOL_CLAIM, TOL_CURV, Chart, DegenerateMetricError, Geometry, MetricField,
    SymTensor2Field, VectorField, _ricci_identity_residual,
)
from . import zoo

SCHEMA_VERSION = 1
ANALYSES = ("curvature", "qcc", "parallel", "soliton", "torse")
_DEPENDS = {"curvature": (), "qcc": ("curvature",), "parallel": ("qcc",),
            "soliton": ("qcc",), "torse": ("qcc",)}
DEFAULT_TOLERANCES = {"tol_curv": TOL_CURV, "tol_claim": TOL_CLAIM, "tol_reg": TOL_REG}


class ManifestError(ValueError):
    pass


@dataclass
class Manifest:
    dim: int
    coords: list[str]
    domain: list[tuple[float, float]]
    metric: dict[tuple[int, int], str]
    xi: list[str] | None = None
    V: list[str] | None = None
    alpha: dict[tuple[int, int], str] | None = None
    params: dict[str, float] = field(default_factory=dict)
    sampling: dict[str, Any] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    name: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: dict) -> "Manifest":
        try:
            coords = [str(c) for c in d["coords"]]
            dim = int(d.get("dim", len(coords)))
            domain = [(float(lo), float(hi)) for lo, hi in d["domain"]]
            metric = _upper(d["metric"], "metric", dim)
        except KeyError as exc:
            raise ManifestError(f"manifest is missing required field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ManifestError(f"malformed manifest: {exc}") from None
        if dim != len(coords):
            raise ManifestError(f"dim is {dim} but {len(coords)} coordinates are declared")
        if len(domain) != dim:
            raise ManifestError(f"domain has {len(domain)} intervals, expected {dim}")
        m = cls(
            dim=dim, coords=coords, domain=domain, metric=metric,
            xi=_vector(d.get("xi"), "xi", dim),
            V=_vector(d.get("V"), "V", dim),
            alpha=_upper(d["alpha"], "alpha", dim) if d.get("alpha") is not None else None,
            params={str(k): float(v) for k, v in (d.get("params") or {}).items()},
            sampling=dict(d.get("sampling") or {}),
            tolerances={str(k): float(v) for k, v in (d.get("tolerances") or {}).items()},
            name=d.get("name"),
            raw=d,
        )
        unknown = set(m.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ManifestError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        m.check_expressions()
        return m

    def check_expressions(self):
        for label, text in self._expressions():
            try:
                parse(text, self.coords, self.params)
            except ExprSyntaxError as exc:
                raise ManifestError(f"{label}: {exc} in {text!r}") from None

    def _expressions(self):
        for (i, j), s in self.metric.items():
            yield f"metric[{i},{j}]", s
        for name in ("xi", "V"):
            for i, s in enumerate(getattr(self, name) or []):
                yield f"{name}[{i}]", s
        for (i, j), s in (self.alpha or {}).items():
            yield f"alpha[{i},{j}]", s

    def chart(self) -> Chart:
        s = self.sampling
        return Chart(self.coords, self.domain,
                     grid_per_axis=int(s.get("grid_per_axis", 2)),
                     random_count=None if s.get("random_count") is None else int(s["random_count"]),
                     seed=int(s.get("seed", 0)))

    def _parse(self, text):
        return parse(text, self.coords, self.params)

    def build(self):
        chart = self.chart()
        metric = MetricField(chart, {k: self._parse(v) for k, v in self.metric.items()})
        xi = None if self.xi is None else VectorField([self._parse(s) for s in self.xi], self.coords)
        V = None if self.V is None else VectorField([self._parse(s) for s in self.V], self.coords)
        alpha = None
        if self.alpha is not None:
            alpha = SymTensor2Field({k: self._parse(v) for k, v in self.alpha.items()}, self.coords, n=self.dim)
        return metric, xi, V, alpha

    def digest(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _to_text(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return repr(float(v))
    raise TypeError(f"expected an expression string or number, got {v!r}")


def _vector(v, label, dim):
    if v is None:
        return None
    if len(v) != dim:
        raise ManifestError(f"{label} has {len(v)} components, expected {dim}")
    return [_to_text(s) for s in v]


def _upper(d, label, dim) -> dict[tuple[int, int], str]:
    out = {}
    for key, val in d.items():
        try:
            i, j = (int(s) for s in str(key).split(","))
        except ValueError:
            raise ManifestError(f"{label} key {key!r} is not of the form 'i,j'") from None
        if not (0 <= i < dim and 0 <= j < dim):
            raise ManifestError(f"{label} index {key!r} out of range for dimension {dim}")
        i, j = min(i, j), max(i, j)
        if (i, j) in out:
            raise ManifestError(f"{label} entry {i},{j} given twice")
        out[(i, j)] = _to_text(val)
    return out


# ---------------------------------------------------------------------------
# analyses

def _summary(x) -> dict:
    x = np.asarray(x, dtype=float)
    return {"min": float(np.min(x)), "max": float(np.max(x)), "mean": float(np.mean(x))}


def _skipped(reason: str) -> dict:
    return {"status": "skipped", "reason": reason}


def _order(requested) -> list[str]:
    out: list[str] = []

    def visit(name):
        for dep in _DEPENDS[name]:
            visit(dep)
        if name not in out:
            out.append(name)

    for name in requested:
        visit(name)
    return out


def run(manifest: Manifest, analyses=("qcc", "soliton", "parallel", "torse")) -> dict:
    """Run the requested analyses (plus their dependencies) and build the report."""
    bad = set(analyses) - set(ANALYSES)
    if bad:
        raise ManifestError(f"unknown analyses: {', '.join(sorted(bad))}")
    tol = dict(DEFAULT_TOLERANCES, **manifest.tolerances)
    metric, xi, V, alpha = manifest.build()
    geo = Geometry(metric)
    blocks: dict[str, dict] = {}
    state: dict[str, Any] = {}
    for name in _order(analyses):
        blocks[name] = _ANALYSIS[name](geo, xi, V, alpha, tol, state)
    return {
        "schema_version": SCHEMA_VERSION,
        "engine_version": __version__,
        "manifest_sha256": manifest.digest(),
        "name": manifest.name,
        "dim": manifest.dim,
        "samples": int(len(geo.points)),
        "tolerances": tol,
        "analyses": blocks,
        "status": "fail" if any(b["status"] == "fail" for b in blocks.values()) else "pass",
    }


def _curvature(geo, xi, V, alpha, tol, state):
    sym = geo.symmetry_residuals()
    metricity = geo.metricity_residual()
    ricci_id = _ricci_identity_residual(geo, geo.metric.as_tensor())
    ok = max(sym.values()) <= tol["tol_curv"] and metricity <= tol["tol_curv"] and ricci_id <= tol["tol_claim"]
    return {
        "status": "pass" if ok else "fail",
        "symmetries": sym,
        "metricity": metricity,
        "ricci_identity_metric": ricci_id,
        "scalar_curvature": _summary(geo.scalar),
    }


def _qcc(geo, xi, V, alpha, tol, state):
    if xi is None:
        return _skipped("xi required")
    fit = fit_qcc(geo, xi, tol_claim=tol["tol_claim"], tol_reg=tol["tol_reg"])
    state["fit"] = fit
    reg = regularity(fit)
    ids = check_derived_identities(geo, xi, fit.a, fit.b)
    try:
        equiv = regularity_equivalences(geo, xi, fit)
        equiv_ok = True
    except RegularityConsistencyError as exc:
        equiv = {"error": str(exc)}
        equiv_ok = False
    ids_ok = all(v <= tol["tol_claim"] for v in ids.values())
    status = "pass" if fit.is_qcc and ids_ok and equiv_ok else "fail"
    return {
        "status": status,
        "is_qcc": fit.is_qcc,
        "qcc_residual": fit.qcc_residual,
        "xi_unit_residual": fit.xi_unit_residual,
        "a": _summary(fit.a),
        "b": _summary(fit.b),
        "a_spread": fit.a_spread,
        "b_spread": fit.b_spread,
        "S_xi_xi": _summary(fit.s_xixi),
        "constant_curvature": fit.constant_curvature,
        "regularity": reg.status,
        "regular": reg.regular,
        "min_abs_a_plus_b": reg.min_abs_sum,
        "identities": ids,
        "regularity_equivalences": equiv,
        "local_symmetry_residual": local_symmetry_residual(geo),
        "ricci_semisymmetry_residual": ricci_semisym_residual(geo),
    }


def _parallel(geo, xi, V, alpha, tol, state):
    if xi is None:
        return _skipped("xi required")
    if alpha is None:
        return _skipped("alpha required")
    rep = verify_parallel_tensor(geo, xi, alpha, fit=state.get("fit"), tol=tol["tol_claim"])
    return {"status": rep.status, **rep.as_dict()}


def _soliton(geo, xi, V, alpha, tol, state):
    if xi is None:
        return _skipped("xi required")
    fit = state.get("fit")
    field_ = V if V is not None else xi
    ricci_rep = ricci_soliton_report(geo, field_, xi, fit=fit, tol=tol["tol_claim"], tol_reg=tol["tol_reg"])
    eta_rep = eta_soliton_report(geo, field_, xi, fit=fit, tol=tol["tol_claim"])
    out = {
        "status": "fail" if "fail" in (ricci_rep.status, eta_rep.status) else "pass",
        "vector_field": "V" if V is not None else "xi",
        "ricci_soliton": ricci_rep.as_dict(),
        "eta_ricci_soliton": eta_rep.as_dict(),
    }
    if geo.n < 4:
        out["geodesic_condition"] = _skipped("needs n >= 4")
    elif fit is None or not fit.constant_ab():
        out["geodesic_condition"] = _skipped("fitted a, b are not constant")
    else:
        a, b = float(np.mean(fit.a)), float(np.mean(fit.b))
        try:
            cond = geodesic_soliton_condition(geo, xi, a, b, tol_reg=tol["tol_reg"])
            out["geodesic_condition"] = {
                "geodesic_residual": cond["geodesic_residual"],
                "condition_defect": cond["condition_defect"],
                "lambda_condition_defect": cond["lambda_condition_defect"],
            }
        except PreconditionError as exc:
            out["geodesic_condition"] = _skipped(str(exc))
    return out


def _torse(geo, xi, V, alpha, tol, state):
    if xi is None:
        return _skipped("xi required")
    tf = torse_forming_detect(geo, xi, tol=tol["tol_claim"])
    # not being torse-forming is a finding, not a failed claim
    out = {"status": "pass", **tf.as_dict()}
    fit = state.get("fit")
    if tf.kenmotsu and fit is not None and fit.is_qcc:
        check = kenmotsu_type_check(geo, xi, tf, fit, tol=tol["tol_claim"])
        out["kenmotsu_check"] = check
        if check["status"] == "fail":
            out["status"] = "fail"
    return out


_ANALYSIS = {"curvature": _curvature, "qcc": _qcc, "parallel": _parallel,
             "soliton": _soliton, "torse": _torse}


# ---------------------------------------------------------------------------
# deterministic JSON

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2) -> str:
    """JSON with floats at 17 significant digits and sorted keys."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None:
            return "null"
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _fmt_float(float(o))
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in sorted(o.items(), key=lambda kv: str(kv[0]))]
            return "{\n" + ",\n".join(items) + f"\n{end}}}"
        if isinstance(o, (list, tuple, np.ndarray)):
            seq = list(o)
            if not seq:
                return "[]"
            return "[\n" + ",\n".join(f"{pad}{enc(v, level + 1)}" for v in seq) + f"\n{end}]"
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return enc(obj, 0) + "\n"


# ---------------------------------------------------------------------------

def _write(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_tol(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ManifestError(f"--tol expects NAME=VALUE, got {item!r}")
        if name not in DEFAULT_TOLERANCES:
            raise ManifestError(f"unknown tolerance {name!r}; known: {', '.join(DEFAULT_TOLERANCES)}")
        out[name] = float(value)
    return out


def _cmd_analyze(args) -> int:
    with open(args.manifest) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from None
    if args.seed is not None or args.samples is not None:
        sampling = dict(raw.get("sampling") or {})
        if args.seed is not None:
            sampling["seed"] = args.seed
        if args.samples is not None:
            grid = int(sampling.get("grid_per_axis", 2))
            dim = len(raw.get("coords", []))
            if args.samples < grid ** dim:
                grid = 0
            sampling["grid_per_axis"] = grid
            sampling["random_count"] = args.samples - grid ** dim if grid else args.samples
        raw = dict(raw, sampling=sampling)
    if args.tol:
        raw = dict(raw, tolerances=dict(raw.get("tolerances") or {}, **_parse_tol(args.tol)))
    manifest = Manifest.from_dict(raw)
    analyses = [a.strip() for a in args.analyses.split(",") if a.strip()]
    report = run(manifest, analyses)
    _write(dumps(report), args.out)
    return 1 if report["status"] == "fail" else 0


def _cmd_zoo(args) -> int:
    if args.action == "list":
        lines = []
        for name in zoo.names():
            e = zoo.builtin(name)
            exp = e.expected
            lines.append(f"{name:20s} a={exp['a']:<14s} b={exp['b']:<12s} "
                         f"regular={str(exp['regular']).lower():5s} {exp['provenance']}")
        sys.stdout.write("\n".join(lines) + "\n")
        return 0
    if not args.name:
        raise ManifestError("zoo emit needs an entry name")
    entry = zoo.builtin(args.name, args.dim)
    _write(json.dumps(entry.to_manifest(), indent=2, sort_keys=True) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qccgeom", description="Quasi-constant curvature and Ricci soliton checks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyse a manifold manifest")
    p.add_argument("manifest")
    p.add_argument("--analyses", default="qcc,soliton,parallel,torse",
                   help="comma separated subset of: " + ",".join(ANALYSES))
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="total number of sample points")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE")
    p.set_defaults(func=_cmd_analyze)

    z = sub.add_parser("zoo", help="list or emit built-in manifolds")
    z.add_argument("action", choices=["list", "emit"])
    z.add_argument("name", nargs="?")
    z.add_argument("--dim", type=int, default=3, choices=[3, 4])
    z.add_argument("--out")
    z.set_defaults(func=_cmd_zoo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ManifestError, ExprError, DegenerateMetricError, NonUnitGeneratorError,
            zoo.UnknownEntryError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
