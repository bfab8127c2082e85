"""Command line front end: ``extremal <command> [options]``.

Every command takes an optional JSON config (``--config``) whose values are
overridden by flags.  Reports are JSON with a ``schema`` key; the exit code
is 0 exactly when every check the command ran passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from dataclasses import asdict, dataclass, field as dc_field, fields, is_dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import suite
from .extension import check_simple, extend, radical_of_form, sigma_checks
from .fields import Field, parse_field
from .geometry import build_geometry, classify_partition, flag_model, match_geometries, maximal_cliques
from .hermitian import SesquiForm, build_symplectic, build_unitary, skew_scalar
from .lie import (Extremality, LieAlgebra, TransvectionSpec, center, classify_pair, enumerate_extremal,
                  extremal_functional, is_simple, sl, transvection_functional, verify_identities)
from .local import local_cover_check

REPORT_SCHEMA = "extremal.report/1"
COMMANDS = ("construct", "verify", "geometry", "classify", "extend", "polarity", "local", "suite")
KINDS = ("sl", "su", "sp", "flag_model")


class ConfigError(ValueError):
    pass


# -- configuration -------------------------------------------------------------------

@dataclass
class Construction:
    kind: str = "sl"
    n: int = 3
    gram: Any = None          # "standard", "antidiag", "symplectic", rows "a,b;c,d", or nested lists
    pi: str = "dual"


@dataclass
class Bounds:
    enum_cap: int | None = None


@dataclass
class Output:
    json: str | None = None
    dot: str | None = None


@dataclass
class RunConfig:
    field: str = "GF(2)"
    construction: Construction = dc_field(default_factory=Construction)
    operation: str = "construct"
    bounds: Bounds = dc_field(default_factory=Bounds)
    output: Output = dc_field(default_factory=Output)
    mode: str = "parametric"
    extension: str | None = None
    seed: int = 0
    samples: int = 5
    terms: int = 3
    criteria: list[int] = dc_field(default_factory=list)
    corrupt: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return _strict(cls, data, "config")

    def validate(self) -> "RunConfig":
        if self.operation not in COMMANDS:
            raise ConfigError(f"unknown operation {self.operation!r}")
        if self.construction.kind not in KINDS:
            raise ConfigError(f"unknown construction {self.construction.kind!r}")
        if self.mode not in ("parametric", "brute"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        parse_field(self.field)
        return self


def _strict(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    known = {f.name: f for f in fields(cls)}
    extra = set(data) - set(known)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    kwargs = {}
    for name, value in data.items():
        default = known[name].default_factory() if callable(known[name].default_factory) else None
        if is_dataclass(default):
            kwargs[name] = _strict(type(default), value, f"{where}.{name}")
        else:
            kwargs[name] = value
    return cls(**kwargs)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        return RunConfig.from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# -- constructions -------------------------------------------------------------------

def parse_gram(K: Field, spec, n: int, kind: str) -> np.ndarray:
    if spec is None:
        spec = "symplectic" if kind == "sp" else "standard"
    if isinstance(spec, str):
        s = spec.strip()
        anti = K.asarray([[1 if i + j == n - 1 else 0 for j in range(n)] for i in range(n)])
        if s == "standard":
            return K.smul(skew_scalar(K), K.identity(n)) if kind == "su" else K.identity(n)
        if s == "antidiag":
            return K.smul(skew_scalar(K), anti) if kind == "su" else anti
        if s == "symplectic":
            return SesquiForm.standard_symplectic(K, n).gram
        spec = [[c.strip() for c in row.split(",")] for row in s.split(";")]
    G = K.asarray(spec)
    if G.shape[1:] != (n, n):
        raise ConfigError(f"gram must be {n}x{n}")
    return G


def build_form(cfg: RunConfig) -> SesquiForm:
    K = parse_field(cfg.field)
    c = cfg.construction
    G = parse_gram(K, c.gram, c.n, c.kind)
    if c.kind == "su":
        if K.degree != 2:
            raise ConfigError("su needs a quadratic field")
        return SesquiForm.skew_hermitian(K, G)
    return SesquiForm.alternating(K, G)


def build_algebra(cfg: RunConfig) -> LieAlgebra:
    F = parse_field(cfg.field)
    c = cfg.construction
    if c.kind in ("sl", "flag_model"):
        if c.pi != "dual":
            raise ConfigError("only Pi = V* is available in finite dimension")
        return sl(c.n, F)
    h = build_form(cfg)
    return (build_unitary(h) if c.kind == "su" else build_symplectic(h)).full


# -- commands ------------------------------------------------------------------------

def _summary(A: LieAlgebra) -> dict:
    return {"name": A.name, "dim": A.dim, "scalars": str(A.scalars), "center_dim": center(A).dim,
            "simple": is_simple(A)}


def cmd_construct(cfg: RunConfig) -> tuple[bool, dict]:
    A = build_algebra(cfg)
    rep = {"algebra": _summary(A)}
    if cfg.output.json:
        Path(cfg.output.json).write_text(json.dumps(A.to_json(), indent=1))
        rep["algebra_file"] = cfg.output.json
    return True, rep


def _point_functionals(A: LieAlgebra, pts) -> np.ndarray:
    """Closed form for flag-labelled points, otherwise a solve of the identities."""
    out = []
    for p in pts:
        if p.label is not None and p.label.v is not None:
            t = TransvectionSpec(A.field, p.label.v, p.label.phi)
            g = transvection_functional(A, t)
            # the point is stored canonically; rescale g to its coordinates
            ref = A.coords(t.element())
            lead = int(np.argmax(~A.scalars.is_zero(p.coords)))
            c = A.scalars.s_div(A.scalars.get(p.coords, (lead,)), A.scalars.get(ref, (lead,)))
            out.append(A.scalars.smul(c, g))
        else:
            status, g = extremal_functional(p.coords, A)
            out.append(g if g is not None else A.scalars.zeros(A.dim))
    return np.stack(out, axis=1)


def _exp_check(A: LieAlgebra, X: np.ndarray, G: np.ndarray, limit: int = 24) -> tuple[bool, dict | None]:
    """``y -> y + [x,y] + g(x,y) x`` preserves the structure constants."""
    F = A.scalars
    eye = F.identity(A.dim)
    for i in range(min(limit, X.shape[1])):
        x, g = X[:, i], G[:, i]
        ad = A.ad(x)                                               # rows [x, b_j]
        E = F.add(F.add(eye, ad), F.mul(g[:, :, None], x[:, None, :]))   # rows exp(b_j)
        lhs = F.einsum("jkl,lm->jkm", A.structure, E)              # exp([b_j, b_k])
        rhs = A.bracket_coords(E[:, :, None, :], E[:, None, :, :])
        if not F.equal(lhs, rhs):
            bad = np.argwhere(np.any(lhs != rhs, axis=(0, -1)))[0]
            return False, {"point": i, "basis_pair": [int(bad[0]), int(bad[1])]}
    return True, None


def cmd_verify(cfg: RunConfig) -> tuple[bool, dict]:
    A = build_algebra(cfg)
    pts = enumerate_extremal(A, cfg.mode, cfg.bounds.enum_cap)
    X = np.stack([p.coords for p in pts], axis=1)
    G = _point_functionals(A, pts)
    if cfg.corrupt:
        p = A.scalars.characteristic
        if not p or A.scalars.degree != 1:
            raise ConfigError("the corruption control needs a prime field of scalars")
        C = A.structure.copy()
        C[0, 0, 1, 2] = (C[0, 0, 1, 2] + 1) % p
        C[0, 1, 0, 2] = (C[0, 1, 0, 2] - 1) % p
        A = A.with_structure(C, name=A.name + " (corrupted)")
    F = A.scalars
    r = verify_identities(A, X, G)
    checks = {}

    def record(name, ok, witness=None):
        checks[name] = {"pass": bool(ok), **({"witness": witness} if witness and not ok else {})}

    def triple(w):
        return None if w is None else {"x": w["element"], "basis": list(w["basis_indices"])}

    record("eq1", r.eq1.all(), triple(r.witnesses.get("eq1")))
    record("P1", r.p1.all(), triple(r.witnesses.get("P1")))
    record("P2", r.p2.all(), triple(r.witnesses.get("P2")))
    gram = A.gram
    record("g_symmetric", F.equal(gram, np.swapaxes(gram, 1, 2)))
    lhs = F.einsum("abl,lc->abc", A.structure, gram)                  # g([a,b],c)
    rhs = F.einsum("al,bcl->abc", gram, A.structure)                  # g(a,[b,c])
    record("g_associative", F.equal(lhs, rhs))
    record("g_matches_form", F.equal(G, F.einsum("pi,ij->pj", X, gram)))
    ok_exp, w = _exp_check(A, X, G)
    record("exp_automorphism", ok_exp, w)
    if cfg.construction.kind in ("su", "sp"):
        geo = build_geometry(A, cfg.mode, cfg.bounds.enum_cap)
        record("no_extremal_lines", not geo.lines)
    rep = {"algebra": A.name, "points": len(pts), "checks": checks}
    return all(c["pass"] for c in checks.values()), rep


def cmd_geometry(cfg: RunConfig) -> tuple[bool, dict]:
    F = parse_field(cfg.field)
    c = cfg.construction
    if c.kind == "flag_model":
        G = flag_model(c.n, F)
        part = classify_partition(maximal_cliques(G), G)
    else:
        G = build_geometry(build_algebra(cfg), cfg.mode, cfg.bounds.enum_cap)
        part = None
    rep = {"geometry": G.to_json(part) if cfg.output.json else G.summary()}
    if cfg.output.dot:
        Path(cfg.output.dot).write_text(G.to_dot())
        rep["dot"] = cfg.output.dot
    if c.kind == "sl":
        rep["matches_flag_model"] = match_geometries(G, flag_model(c.n, F)) is not None
        return rep["matches_flag_model"], rep
    return True, rep


def cmd_classify(cfg: RunConfig) -> tuple[bool, dict]:
    A = build_algebra(cfg)
    pts = enumerate_extremal(A, cfg.mode, cfg.bounds.enum_cap)
    cases = Counter(classify_pair(p.element, q.element, A) for p in pts for q in pts)
    return set(cases) <= set("abcde"), {"points": len(pts), "cases": dict(sorted(cases.items()))}


def cmd_extend(cfg: RunConfig) -> tuple[bool, dict]:
    if not cfg.extension:
        raise ConfigError("extend needs --extension")
    K = parse_field(cfg.extension)
    E = extend(build_algebra(cfg), K)
    rad = radical_of_form(E).dim
    rep = {**E.summary(), "radical_dim": rad, "simple": check_simple(E), "sigma": sigma_checks(E)}
    if cfg.construction.kind in ("sl", "su") and K.is_finite:
        rep["matches_flag_model"] = match_geometries(build_geometry(E.lie), flag_model(E.lie.n, K)) is not None
    ok = all(E.checks.values()) and all(rep["sigma"].values()) and rep.get("matches_flag_model", True)
    return ok, rep


def cmd_polarity(cfg: RunConfig) -> tuple[bool, dict]:
    K = parse_field(cfg.field)
    if K.degree != 2 or not K.is_finite:
        raise ConfigError("polarity needs a finite quadratic field")
    G0 = parse_gram(K, cfg.construction.gram, cfg.construction.n, "su")
    rep = suite.polarity_case(K, G0)
    ok = (rep["proportional"] and rep["fixed_equals_unitary"] and all(rep["checks"].values()))
    return ok, rep


def cmd_local(cfg: RunConfig) -> tuple[bool, dict]:
    F = parse_field(cfg.field)
    rep = local_cover_check(cfg.construction.n, F, cfg.samples, cfg.terms, cfg.seed)
    return rep["ok"], rep


def cmd_suite(cfg: RunConfig) -> tuple[bool, dict]:
    results = suite.run_all(set(cfg.criteria) or None)
    for r in results:
        print(r.line())
    return all(r.passed for r in results), {"criteria": [r.to_json() for r in results]}


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# -- argument parsing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="extremal", description="Extremal elements of finitary Lie algebras.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run config; flags override it")
        s.add_argument("--field")
        s.add_argument("--kind", choices=KINDS)
        s.add_argument("-n", "--n", type=int)
        s.add_argument("--gram")
        s.add_argument("--mode", choices=("parametric", "brute"))
        s.add_argument("--extension")
        s.add_argument("--enum-cap", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--terms", type=int)
        s.add_argument("--criteria", help="comma separated criterion numbers")
        s.add_argument("--corrupt", action="store_true", default=None,
                       help="perturb one structure constant (negative control)")
        s.add_argument("--out", help="write the JSON report here")
        s.add_argument("--dot", help="write a DOT graph here")
        s.add_argument("--print-config", action="store_true")
    return p


def merge(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    cfg.operation = args.command
    c = cfg.construction
    for src, dst, attr in ((args.field, cfg, "field"), (args.kind, c, "kind"), (args.n, c, "n"),
                           (args.gram, c, "gram"), (args.mode, cfg, "mode"),
                           (args.extension, cfg, "extension"), (args.enum_cap, cfg.bounds, "enum_cap"),
                           (args.seed, cfg, "seed"), (args.samples, cfg, "samples"),
                           (args.terms, cfg, "terms"), (args.corrupt, cfg, "corrupt"),
                           (args.out, cfg.output, "json"), (args.dot, cfg.output, "dot")):
        if src is not None:
            setattr(dst, attr, src)
    if args.criteria:
        cfg.criteria = [int(x) for x in args.criteria.split(",") if x.strip()]
    return cfg.validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = merge(load_config(args.config), args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.print_config:
        print(json.dumps(cfg.to_dict(), indent=1))
    try:
        ok, rep = HANDLERS[cfg.operation](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {"schema": REPORT_SCHEMA, "command": cfg.operation, "config": cfg.to_dict(), "ok": bool(ok), **rep}
    text = json.dumps(report, indent=1, default=str)
    if cfg.output.json and cfg.operation != "construct":
        Path(cfg.output.json).write_text(text)
        print(json.dumps({"ok": report["ok"], "report": cfg.output.json}))
    else:
        print(text)
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
