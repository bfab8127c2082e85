"""The eleven acceptance checks, each returning a :class:`CriterionResult`.

The CLI ``suite`` command and the acceptance tests both call into this
module, so the numbers printed by one are the numbers asserted by the other.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .extension import extend, radical_of_form, check_simple, sigma_checks, coefficient_sigma_matches
from .fields import GF, QQ_sqrt
from .geometry import build_geometry, flag_model, match_geometries
from .hermitian import (SemilinearInvolution, SesquiForm, build_symplectic, build_unitary,
                        delta_graph, extract_polarity, fixed_subalgebra, hyperbolic_criterion,
                        induced_permutation, is_trace_valued, isotropic_span, proportional,
                        realize_form, spanning_reflection_basis, _same_space, skew_scalar,
                        NoIsotropicVectorError)
from .linalg import inverse
from .lie import (Extremality, LieAlgebra, is_extremal, TransvectionSpec, all_flags, classify_pair,
                  classify_transvection_pair, enumerate_extremal, exp_conjugation, exp_map,
                  sl, transvection_functional, verify_identities, bracket)
from .local import (compatibility_scalar, conjugation, index_defects, join, leq, random_index,
                    random_invertible, sl_of_index, trivial_center)

SCHEMA = "extremal.suite/1"


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    limit: float | None = None
    details: dict = dc_field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        t = f"{self.seconds:.2f}s" + (f" (limit {self.limit:g}s)" if self.limit else "")
        return f"[{status}] {self.number:2d}. {self.title} [{t}]"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "limit": self.limit, "details": self.details}


def _timed(number: int, title: str, limit: float | None = None):
    def wrap(fn: Callable[[], tuple[bool, dict]]):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            ok, details = fn()
            dt = time.perf_counter() - t0
            if limit is not None and dt > limit:
                details = {**details, "timeout": f"{dt:.2f}s > {limit}s"}
                ok = False
            return CriterionResult(number, title, bool(ok), dt, limit, details)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


# 1 -----------------------------------------------------------------------------------------

@_timed(1, "extremality identities for all transvections of sl(n,q)", 30)
def extremality_suite() -> tuple[bool, dict]:
    out, ok = {}, True
    for n in (3, 4):
        for q in (2, 3, 5):
            F = GF(q)
            A = sl(n, F)
            specs = [TransvectionSpec(F, fl.v, fl.phi) for fl in all_flags(F, n)]
            X = A.coords_of_matrices(np.stack([s.element().matrix for s in specs], axis=1))
            G = np.stack([transvection_functional(A, s) for s in specs], axis=1)
            r = verify_identities(A, X, G)
            fails = int((~r.ok).sum())
            ok &= fails == 0
            out[f"sl({n},{q})"] = {"transvections": len(specs), "failures": fails, "witnesses": r.witnesses}
    return ok, out


# 2 -----------------------------------------------------------------------------------------

@_timed(2, "brute and parametric extremal points of sl(3,2) agree", 5)
def brute_parametric() -> tuple[bool, dict]:
    A = sl(3, GF(2))
    brute = enumerate_extremal(A, "brute")
    par = enumerate_extremal(A, "parametric")
    same = {p.key for p in brute} == {p.key for p in par}
    return len(brute) == 21 and same, {"scanned": 2 ** A.dim - 1, "brute": len(brute),
                                       "parametric": len(par), "equal_sets": same}


# 3 -----------------------------------------------------------------------------------------

@_timed(3, "geometry counts and isomorphism with the flag model", 60)
def geometry_counts() -> tuple[bool, dict]:
    G = build_geometry(sl(3, GF(2)))
    s = G.summary()
    ok = (s["points"] == 21 and s["lines"] == 14 and s["line_sizes"] == {"3": 14}
          and s["lines_per_point"] == {"2": 21})
    M = flag_model(3, GF(4))
    m = M.summary()
    ok &= m["points"] == 105 and m["lines"] == 42 and m["line_sizes"] == {"5": 42}
    matches = {}
    for n, q in ((3, 2), (3, 3), (4, 2)):
        iso = match_geometries(build_geometry(sl(n, GF(q))), flag_model(n, GF(q)))
        matches[f"({n},{q})"] = iso is not None
        ok &= iso is not None
    return ok, {"sl(3,2)": s, "flag_model(3,4)": m, "isomorphic": matches}


# 4 -----------------------------------------------------------------------------------------

@_timed(4, "pair classification of sl(3,2) by two methods")
def pair_classification() -> tuple[bool, dict]:
    F = GF(2)
    A = sl(3, F)
    pts = enumerate_extremal(A)
    matrix_cases, formula_cases = Counter(), Counter()
    mismatch = None
    for p in pts:
        for r in pts:
            a = classify_pair(p.element, r.element, A)
            b = classify_transvection_pair(TransvectionSpec(F, p.label.v, p.label.phi),
                                           TransvectionSpec(F, r.label.v, r.label.phi))
            matrix_cases[a] += 1
            formula_cases[b] += 1
            if a != b and mismatch is None:
                mismatch = (p.key, r.key, a, b)
    ok = mismatch is None and set(matrix_cases) <= set("abcde") and matrix_cases == formula_cases
    return ok, {"pairs": len(pts) ** 2, "cases": dict(sorted(matrix_cases.items())),
                "formula_cases": dict(sorted(formula_cases.items())), "agree": mismatch is None}


# 5 -----------------------------------------------------------------------------------------

@_timed(5, "exp is an automorphism of sl(4,5) and equals conjugation")
def exp_automorphism(samples: int = 100, seed: int = 5) -> tuple[bool, dict]:
    F = GF(5)
    A = sl(4, F)
    flags = list(all_flags(F, 4))
    rng = np.random.default_rng(seed)
    basis = A.basis
    counts = Counter()
    for _ in range(samples):
        fl = flags[int(rng.integers(len(flags)))]
        x = TransvectionSpec(F, fl.v, fl.phi)
        lam, mu = int(rng.integers(1, 5)), int(rng.integers(0, 5))
        img = [exp_map(x, lam, b) for b in basis]
        conj = all(img[i] == exp_conjugation(x.element(), lam, b) for i, b in enumerate(basis))
        hom = all(exp_map(x, lam, bracket(basis[i], basis[j])) == bracket(img[i], img[j])
                  for i in range(len(basis)) for j in range(i + 1, len(basis)))
        comp = all(exp_map(x, mu, img[i]) == exp_map(x, (lam + mu) % 5, b) for i, b in enumerate(basis))
        counts["conjugation"] += conj
        counts["brackets"] += hom
        counts["composition"] += comp
    ok = all(counts[k] == samples for k in ("conjugation", "brackets", "composition"))
    return ok, {"samples": samples, "seed": seed, **counts}


# 6 -----------------------------------------------------------------------------------------

@_timed(6, "unitary algebras: dimension, transvection generation, no lines")
def unitary_construction() -> tuple[bool, dict]:
    out, ok = {}, True
    for q in (4, 9):
        K = GF(q)
        for n in (2, 3):
            h = SesquiForm.standard(K, n)
            U = build_unitary(h)
            A = U.full
            brute = build_geometry(A, "brute")
            par = build_geometry(A)
            with_sw = enumerate_extremal(A, "brute", include_sandwiches=True)
            par_keys = {p.key for p in par.points}
            pure_inside = {p.key for p in brute.points} <= par_keys
            par_extremal = all(is_extremal(p.coords, A) != Extremality.NOT_EXTREMAL for p in par.points)
            case = {"dim": A.dim, "expected": n * n - 1, "generated_equals_full": U.equal,
                    "pure_points": brute.num_points, "sandwich_points": len(with_sw) - brute.num_points,
                    "parametric_points": par.num_points, "lines": len(brute.lines) + len(par.lines),
                    "pure_within_parametric": pure_inside, "parametric_all_extremal": par_extremal}
            ok &= (A.dim == n * n - 1 and U.equal and not brute.lines and not par.lines
                   and pure_inside and par_extremal)
            out[f"su({n},{K})"] = case
    return ok, out


# 7 -----------------------------------------------------------------------------------------

@_timed(7, "scalar extension of su(3,9/3): isomorphism, radical, simplicity")
def scalar_extension() -> tuple[bool, dict]:
    K = GF(9)
    h = SesquiForm.standard(K, 3)
    E = extend(build_unitary(h).full, K)
    iso = match_geometries(build_geometry(E.lie), flag_model(3, K)) is not None
    rad = radical_of_form(E).dim
    simple = check_simple(E)
    sig = sigma_checks(E, enumerate_extremal(E.lie))
    theta = coefficient_sigma_matches(E, SemilinearInvolution(K, h.gram))
    details = {"dim": E.dim, **E.checks, "isomorphic_to_sl(3,9)": iso, "radical_dim": rad,
               "simple": simple, "sigma": sig, "sigma_equals_theta": theta}
    if rad:
        details["note"] = ("char 3 divides 3: the scalar matrices lie in su(3) and span the radical; "
                           "the base algebra is not simple")
    return iso and rad == 0 and simple and all(sig.values()) and theta and all(E.checks.values()), details


# 8 -----------------------------------------------------------------------------------------

def polarity_case(K, G0) -> dict:
    A = sl(3, K)
    G = build_geometry(A)
    theta = SemilinearInvolution(K, G0)
    P = extract_polarity(G, induced_permutation(G, A, theta), theta)
    R = realize_form(P)
    fixed = fixed_subalgebra(A, theta)
    U = build_unitary(SesquiForm.skew_hermitian(K, G0)).full
    rep = R.report()
    return {"tau": rep["tau"], "epsilon": rep["epsilon"], "checks": rep["checks"],
            "proportional": proportional(K, R.form.gram, K.asarray(G0)),
            "fixed_equals_unitary": fixed.dim == U.dim and _same_space(fixed, U)}


@_timed(8, "polarity round trip on sl(3,4)")
def polarity_round_trip() -> tuple[bool, dict]:
    K = GF(4)
    forms = {"delta*I": K.identity(3), "twisted": K.asarray([["0", "t", "0"], ["t+1", "0", "0"], ["0", "0", "1"]])}
    out, ok = {}, True
    for name, G0 in forms.items():
        c = polarity_case(K, G0)
        out[name] = c
        ok &= (c["proportional"] and c["fixed_equals_unitary"] and c["epsilon"] == "-1"
               and c["tau"] == "frobenius" and all(c["checks"].values()))
    return ok, out


# 9 -----------------------------------------------------------------------------------------

def trace_valued_forms() -> dict[str, SesquiForm]:
    forms = {}
    for q in (4, 9):
        K = GF(q)
        for n in (2, 3, 4):
            forms[f"delta*I on {K}^{n}"] = SesquiForm.standard(K, n)
        forms[f"delta*antidiag on {K}^3"] = SesquiForm.skew_hermitian(
            K, K.smul(skew_scalar(K), K.asarray([[0, 0, 1], [0, 1, 0], [1, 0, 0]])))
    forms["symplectic on GF(3)^4"] = SesquiForm.standard_symplectic(GF(3), 4)
    F2 = GF(2)
    forms["symmetric I on GF(2)^3"] = SesquiForm(F2, F2.identity(3), F2.one, "id")
    Qi = QQ_sqrt(-1)
    forms["delta*diag(1,-1,1) over Q(i)"] = SesquiForm.skew_hermitian(
        Qi, Qi.smul(skew_scalar(Qi), Qi.asarray([[1, 0, 0], [0, -1, 0], [0, 0, 1]])))
    Q2 = QQ_sqrt(2)
    forms["delta*antidiag over Q(sqrt2)"] = SesquiForm.skew_hermitian(
        Q2, Q2.smul(skew_scalar(Q2), Q2.asarray([[0, 0, 1], [0, 1, 0], [1, 0, 0]])))
    return forms


def three_way(h: SesquiForm) -> dict:
    tv = is_trace_valued(h)
    span = isotropic_span(h).dim
    try:
        hyp, _ = hyperbolic_criterion(h)
    except NoIsotropicVectorError:
        hyp = False
    return {"trace_valued": tv, "isotropic_span_dim": span, "n": h.n, "hyperbolic": hyp,
            "agree": tv == (span == h.n) == hyp}


@_timed(9, "trace-valued equivalence and connectivity of the anisotropic graph")
def trace_valued_equivalence() -> tuple[bool, dict]:
    ok = True
    equiv = {}
    for name, h in trace_valued_forms().items():
        r = three_way(h)
        equiv[name] = r
        ok &= r["agree"]
    delta = {}
    for q in (4, 9):
        K = GF(q)
        for n in (2, 3, 4):
            g = delta_graph(SesquiForm.standard(K, n))
            delta[f"{K}^{n}"] = {"vertices": int(g.vertices.shape[1]), "components": g.components,
                                 "connected": g.connected}
            ok &= g.connected
    return ok, {"equivalence": equiv, "delta_graph": delta}


# 10 ----------------------------------------------------------------------------------------

@_timed(10, "n^2 reflection elements span u(V,h)")
def spanning_set() -> tuple[bool, dict]:
    out, ok = {}, True
    for q in (4, 9):
        K = GF(q)
        for n in (2, 3):
            c = spanning_reflection_basis(SesquiForm.standard(K, n))
            out[f"{K}^{n}"] = {"elements": len(c.elements), "rank": c.rank, "u_dim": c.u_dim, "spans": c.spans}
            ok &= c.spans and len(c.elements) == n * n
    return ok, out


# 11 ----------------------------------------------------------------------------------------

@_timed(11, "local systems in GF(5)^8")
def local_systems(pairs: int = 50, seed: int = 11) -> tuple[bool, dict]:
    F = GF(5)
    n = 8
    rng = np.random.default_rng(seed)
    sl_cache: dict = {}

    def sl_for(I):
        if I not in sl_cache:
            sl_cache[I] = sl_of_index(I)
        return sl_cache[I]

    joins_ok = dims_ok = lam_ok = 0
    join_dims = Counter()
    for _ in range(pairs):
        I1 = random_index(F, n, int(rng.choice([3, 4])), rng)
        I2 = random_index(F, n, int(rng.choice([3, 4])), rng)
        J = join(I1, I2)
        join_dims[J.dim] += 1
        joins_ok += leq(I1, J) and leq(I2, J) and not index_defects(J.U, J.Phi)
        good = True
        for I in (I1, I2, J):
            A = sl_for(I)
            good &= A.dim == I.dim ** 2 - 1 and trivial_center(A)
        dims_ok += good
        # g_J is sl(J) transported by h; iso_I additionally conjugates by c, which centralises sl(I1)
        h = random_invertible(F, n, rng)
        hi = conjugation(F, inverse(F, h))
        gI = _transport(F, sl_for(I1), hi)
        Ub, Pb = I1.dual_basis()
        # c = identity on U1 plus 2 * (projection onto ann(Phi1))
        P = F.einsum("ja,jb->ab", Ub, Pb)                 # projection onto U1 along ann(Phi1)
        c = F.add(P, F.smul(F.scalar(2), F.sub(F.identity(n), P)))
        lam = compatibility_scalar(I1, J, gI, conjugation(F, F.matmul(c, h)), conjugation(F, h))
        lam_ok += lam == 1
    ok = joins_ok == pairs and dims_ok == pairs and lam_ok == pairs
    return ok, {"pairs": pairs, "seed": seed, "valid_joins": joins_ok, "sl_dims_and_centers": dims_ok,
                "lambda_one": lam_ok, "join_dims": dict(sorted(join_dims.items()))}


def _transport(F, A, act):
    return LieAlgebra(F, A.n, act(A.mats), F, name=f"transported {A.name}")


CRITERIA = (extremality_suite, brute_parametric, geometry_counts, pair_classification, exp_automorphism,
            unitary_construction, scalar_extension, polarity_round_trip, trace_valued_equivalence,
            spanning_set, local_systems)


def run_all(select: set[int] | None = None) -> list[CriterionResult]:
    out = []
    for i, fn in enumerate(CRITERIA, 1):
        if select and i not in select:
            continue
        out.append(fn())
    return out
