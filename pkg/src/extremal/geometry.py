"""Extremal geometries, the flag model, maximal cliques and isomorphism search."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .fields import Field
from .linalg import Subspace, _key, normalize_rows
from .lie import ExtremalPoint, Flag, LieAlgebra, all_flags, enumerate_extremal, point_key

POINT_PENCIL = "point_pencil"
HYPERPLANE_PENCIL = "hyperplane_pencil"


class GeometryError(ValueError):
    pass


@dataclass
class GeometryGraph:
    """Point-line geometry on indexed points.

    ``lines`` are sorted index tuples; ``line_types`` is filled for flag-shaped
    geometries.  ``sl2_edges`` lists the pairs with nonzero extremal form.
    """

    field: Field
    num_points: int
    lines: list[tuple[int, ...]]
    labels: list[Flag | None]
    line_types: list[str | None] = dc_field(default_factory=list)
    sl2_edges: list[tuple[int, int]] = dc_field(default_factory=list)
    points: list[ExtremalPoint] | None = None
    name: str = ""

    def __post_init__(self):
        if not self.line_types:
            self.line_types = [None] * len(self.lines)
        self.point_lines: list[list[int]] = [[] for _ in range(self.num_points)]
        seen = {}
        for li, line in enumerate(self.lines):
            if len(line) < 2:
                raise GeometryError("a line needs at least two points")
            for i in line:
                self.point_lines[i].append(li)
            for a in line:
                for b in line:
                    if a < b:
                        if (a, b) in seen:
                            raise GeometryError(f"points {a}, {b} lie on two lines")
                        seen[(a, b)] = li
        self._line_of = seen

    def line_through(self, a: int, b: int) -> int | None:
        return self._line_of.get((min(a, b), max(a, b)))

    def collinear(self, a: int, b: int) -> bool:
        return a != b and self.line_through(a, b) is not None

    @property
    def neighbours(self) -> list[set[int]]:
        out = [set() for _ in range(self.num_points)]
        for a, b in self._line_of:
            out[a].add(b)
            out[b].add(a)
        return out

    def line_sizes(self) -> dict[int, int]:
        sizes: dict[int, int] = defaultdict(int)
        for line in self.lines:
            sizes[len(line)] += 1
        return dict(sizes)

    def lines_per_point(self) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for ls in self.point_lines:
            out[len(ls)] += 1
        return dict(out)

    def summary(self) -> dict:
        return {"points": self.num_points, "lines": len(self.lines),
                "line_sizes": {str(k): v for k, v in sorted(self.line_sizes().items())},
                "lines_per_point": {str(k): v for k, v in sorted(self.lines_per_point().items())},
                "sl2_edges": len(self.sl2_edges)}

    def to_json(self, partition: "CliquePartition | None" = None) -> dict:
        pts = []
        for i in range(self.num_points):
            entry: dict = {"index": i}
            if self.labels[i] is not None:
                entry.update(self.labels[i].to_json())
            if self.points is not None:
                entry["coords"] = self.points[i].element.field.format_array(self.points[i].element.matrix)
            pts.append(entry)
        out = {"schema": "extremal.geometry/1", "name": self.name, "field": str(self.field),
               "summary": self.summary(), "points": pts,
               "lines": [{"points": list(l), "type": t} for l, t in zip(self.lines, self.line_types)],
               "sl2_edges": [list(e) for e in self.sl2_edges]}
        if partition is not None:
            out["partition"] = partition.to_json()
        return out

    def to_dot(self) -> str:
        rows = [f'graph "{self.name or "geometry"}" {{', "  node [shape=point];"]
        for i in range(self.num_points):
            lab = self.labels[i]
            text = f"{i}" if lab is None else \
                f"{i}: {lab.field.format_array(lab.v)} | {lab.field.format_array(lab.phi)}"
            rows.append(f'  p{i} [label="{text}"];')
        for li, line in enumerate(self.lines):
            style = "dashed" if self.line_types[li] == POINT_PENCIL else "solid"
            rows.append(f'  l{li} [shape=box, label="L{li}", style={style}];')
            rows.extend(f"  l{li} -- p{i};" for i in line)
        rows.append("}")
        return "\n".join(rows) + "\n"


def build_geometry(A: LieAlgebra, mode: str = "parametric", bound: int | None = None,
                   chunk: int = 128) -> GeometryGraph:
    """Points, extremal lines and sl2-edges of ``A`` over a finite scalar field."""
    F = A.scalars
    if not F.is_finite:
        raise GeometryError("geometries are only materialised over finite fields")
    pts = enumerate_extremal(A, mode, bound)
    P = len(pts)
    index = {p.key: i for i, p in enumerate(pts)}
    X = np.stack([p.coords for p in pts], axis=1) if P else F.zeros((0, A.dim))
    lines: dict[tuple, None] = {}
    covered: set[tuple[int, int]] = set()
    scal = F.elements()
    for s in range(0, P, chunk):
        Z = A.bracket_coords(X[:, s:s + chunk, None, :], X[:, None, :, :])
        comm = F.is_zero(Z).all(axis=-1)
        for a, b in zip(*np.nonzero(comm)):
            i, j = s + int(a), int(b)
            if j <= i or (i, j) in covered:
                continue
            xs = F.add(X[:, i], X[:, j])
            if point_key(F, normalize_rows(F, xs[:, None])[:, 0]) not in index:
                continue  # case (c)
            combos = F.add(X[:, i][:, None], F.mul(scal[:, :, None], X[:, j][:, None]))
            keys = normalize_rows(F, combos)
            members = {j}
            for t in range(keys.shape[1]):
                k = point_key(F, keys[:, t])
                if k not in index:
                    raise GeometryError("a case-(b) pair spans a 2-space with a non-extremal point")
                members.add(index[k])
            line = tuple(sorted(members))
            lines[line] = None
            covered.update((u, v) for u in line for v in line if u < v)
    G = F.einsum("pi,ij->pj", X, A.gram)
    gram = F.einsum("pj,qj->pq", G, X)
    nz = ~F.is_zero(gram)
    edges = [(int(a), int(b)) for a, b in zip(*np.nonzero(nz)) if a < b]
    labels = [p.label for p in pts]
    types = [_pencil_type(labels, l) for l in lines]
    return GeometryGraph(F, P, list(lines), labels, types, edges, pts, name=A.name)


def _pencil_type(labels, line) -> str | None:
    labs = [labels[i] for i in line]
    if any(l is None for l in labs):
        return None
    if len({l.point_key for l in labs}) == 1:
        return POINT_PENCIL
    if len({l.hyperplane_key for l in labs}) == 1:
        return HYPERPLANE_PENCIL
    return None


def projective_lines(field: Field, n: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Points of PG(n-1, q) and its lines as sorted index tuples."""
    pts = field.projective_points(n)
    index = {_key(field, pts[:, i]): i for i in range(pts.shape[1])}
    scal = field.elements()
    lines: dict[tuple, None] = {}
    covered: set[tuple[int, int]] = set()
    for a in range(pts.shape[1]):
        for b in range(a + 1, pts.shape[1]):
            if (a, b) in covered:
                continue
            combos = normalize_rows(field, field.add(pts[:, a][:, None],
                                                     field.mul(scal[:, :, None], pts[:, b][:, None])))
            members = {b} | {index[_key(field, combos[:, t])] for t in range(combos.shape[1])}
            line = tuple(sorted(members))
            lines[line] = None
            covered.update((u, v) for u in line for v in line if u < v)
    return pts, list(lines)


def flag_model(n: int, field: Field, Pi: Subspace | None = None) -> GeometryGraph:
    """The geometry of incident point-hyperplane pairs with both pencil families."""
    if not field.is_finite:
        raise GeometryError("the flag model is only materialised over finite fields")
    if Pi is not None and (Pi.n != n or Pi.dim != n):
        raise GeometryError("ann_V(Pi) is nonzero: degenerate Pi")
    pts, plines = projective_lines(field, n)
    m = pts.shape[1]
    inc = field.is_zero(field.einsum("hi,pi->hp", pts, pts))     # inc[h, p]: p in ker phi_h
    flags = list(all_flags(field, n))
    fidx = {}
    for i, fl in enumerate(flags):
        fidx[(fl.point_key, fl.hyperplane_key)] = i
    keys = [_key(field, pts[:, i]) for i in range(m)]
    lines, types = [], []
    for line in plines:
        members = list(line)
        # hyperplanes containing the projective line
        for h in np.nonzero(inc[:, members].all(axis=1))[0]:
            lines.append(tuple(sorted(fidx[(keys[p], keys[h])] for p in members)))
            types.append(HYPERPLANE_PENCIL)
        # the same index set read in the dual space: a pencil of hyperplanes through p
        for p in np.nonzero(inc[members, :].all(axis=0))[0]:
            lines.append(tuple(sorted(fidx[(keys[p], keys[h])] for h in members)))
            types.append(POINT_PENCIL)
    return GeometryGraph(field, len(flags), lines, flags, types, name=f"flags({n},{field})")


# -- isomorphism search ---------------------------------------------------------

def _incidence(G: GeometryGraph) -> list[list[int]]:
    P = G.num_points
    adj = [[] for _ in range(P + len(G.lines))]
    for li, line in enumerate(G.lines):
        for i in line:
            adj[i].append(P + li)
            adj[P + li].append(i)
    return adj


def _refine(adj1, adj2, c1: list, c2: list):
    """Joint colour refinement; returns ``None`` if the colour class sizes diverge."""
    while True:
        s1 = [(c1[v], tuple(sorted(c1[u] for u in adj1[v]))) for v in range(len(adj1))]
        s2 = [(c2[v], tuple(sorted(c2[u] for u in adj2[v]))) for v in range(len(adj2))]
        table = {s: i for i, s in enumerate(sorted(set(s1) | set(s2)))}
        n1 = [table[s] for s in s1]
        n2 = [table[s] for s in s2]
        h1, h2 = defaultdict(int), defaultdict(int)
        for c in n1:
            h1[c] += 1
        for c in n2:
            h2[c] += 1
        if h1 != h2:
            return None
        if len(h1) == len(set(c1)):
            return n1, n2
        c1, c2 = n1, n2


def match_geometries(G1: GeometryGraph, G2: GeometryGraph) -> dict[int, int] | None:
    """A point bijection mapping lines onto lines, or ``None`` if none exists.

    Individualisation-refinement on the point-line incidence graphs with
    backtracking; any candidate map is verified before it is returned.
    """
    if G1.num_points != G2.num_points or len(G1.lines) != len(G2.lines):
        return None
    if sorted(map(len, G1.lines)) != sorted(map(len, G2.lines)):
        return None
    adj1, adj2 = _incidence(G1), _incidence(G2)
    P = G1.num_points
    init1 = [(0, len(adj1[v])) if v < P else (1, len(adj1[v])) for v in range(len(adj1))]
    init2 = [(0, len(adj2[v])) if v < P else (1, len(adj2[v])) for v in range(len(adj2))]
    table = {s: i for i, s in enumerate(sorted(set(init1) | set(init2)))}
    start = _refine(adj1, adj2, [table[s] for s in init1], [table[s] for s in init2])
    if start is None:
        return None
    lines2 = set(G2.lines)

    def verify(c1, c2):
        inv = {c: v for v, c in enumerate(c2)}
        mapping = {v: inv[c1[v]] for v in range(P)}
        if all(tuple(sorted(mapping[i] for i in l)) in lines2 for l in G1.lines):
            return mapping
        return None

    def search(c1, c2):
        classes = defaultdict(list)
        for v, c in enumerate(c1):
            classes[c].append(v)
        open_ = [(len(vs), c) for c, vs in classes.items() if len(vs) > 1]
        if not open_:
            return verify(c1, c2)
        # the largest cell: individualising inside small cells (points of one line, say)
        # tends to fix configurations that refinement cannot see through
        _, colour = max(open_)
        v = classes[colour][0]
        fresh = max(c1) + 1
        for w in (u for u, c in enumerate(c2) if c == colour):
            d1, d2 = list(c1), list(c2)
            d1[v] = fresh
            d2[w] = fresh
            refined = _refine(adj1, adj2, d1, d2)
            if refined is None:
                continue
            found = search(*refined)
            if found is not None:
                return found
        return None

    return search(*start)


# -- cliques -----------------------------------------------------------------------

@dataclass(frozen=True)
class Clique:
    members: frozenset[int]
    kind: str | None = None            # "p_bar" or "H_bar" when labels are available
    anchor: tuple | None = None        # key of the common point or hyperplane

    def __len__(self):
        return len(self.members)


def maximal_cliques(G: GeometryGraph) -> list[Clique]:
    """Maximal cliques through edges of the collinearity graph, grown greedily and checked maximal."""
    nb = G.neighbours
    found: dict[frozenset, None] = {}
    covered: set[tuple[int, int]] = set()
    for a, b in sorted(G._line_of):
        if (a, b) in covered:
            continue
        clique = {a, b}
        cand = nb[a] & nb[b]
        while cand:
            c = min(cand)
            clique.add(c)
            cand &= nb[c]
        common = set.intersection(*(nb[i] for i in clique)) - clique
        if common:
            raise GeometryError("greedy clique is not maximal")  # pragma: no cover
        fs = frozenset(clique)
        found[fs] = None
        covered.update((u, v) for u in fs for v in fs if u < v)
    return [_label_clique(G, c) for c in found]


def _label_clique(G: GeometryGraph, members: frozenset) -> Clique:
    labs = [G.labels[i] for i in members]
    if any(l is None for l in labs):
        return Clique(members)
    pk = {l.point_key for l in labs}
    hk = {l.hyperplane_key for l in labs}
    if len(pk) == 1:
        return Clique(members, "p_bar", next(iter(pk)))
    if len(hk) == 1:
        return Clique(members, "H_bar", next(iter(hk)))
    return Clique(members)


@dataclass
class CliquePartition:
    parts: tuple[list[Clique], list[Clique]]
    names: tuple[str, str]
    part_of: dict[frozenset, int]
    witnesses: dict

    def to_json(self) -> dict:
        return {name: [sorted(c.members) for c in part] for name, part in zip(self.names, self.parts)}


def classify_partition(cliques: Sequence[Clique], G: GeometryGraph) -> CliquePartition:
    """Split the cliques with the third-clique criterion and check both parts partition the points.

    Two disjoint cliques are put in the same part when some third clique meets
    both; each edge must lie in exactly one clique.
    """
    cl = list(cliques)
    m = len(cl)
    for a, b in G._line_of:
        hits = sum(1 for c in cl if a in c.members and b in c.members)
        if hits != 1:
            raise GeometryError(f"edge ({a},{b}) lies in {hits} cliques")
    member = np.zeros((m, G.num_points), dtype=bool)
    for i, c in enumerate(cl):
        member[i, list(c.members)] = True
    meets = (member.astype(np.int64) @ member.T.astype(np.int64)) > 0
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    witnesses = {}
    for i in range(m):
        for j in range(i + 1, m):
            if meets[i, j]:
                continue
            third = np.nonzero(meets[:, i] & meets[:, j])[0]
            if len(third):
                witnesses[(i, j)] = int(third[0])
                parent[find(i)] = find(j)
    roots = sorted({find(i) for i in range(m)})
    if len(roots) != 2:
        raise GeometryError(f"third-clique relation gives {len(roots)} classes, expected 2")
    parts = tuple([cl[i] for i in range(m) if find(i) == r] for r in roots)
    for part in parts:
        cover = np.zeros(G.num_points, dtype=np.int64)
        for c in part:
            cover[list(c.members)] += 1
        if not np.all(cover == 1):
            raise GeometryError("a part does not partition the point set")
    names = ("part0", "part1")
    kinds = [{c.kind for c in part} for part in parts]
    if kinds[0] == {"H_bar"} and kinds[1] == {"p_bar"}:
        parts = (parts[1], parts[0])
        kinds.reverse()
    if kinds[0] == {"p_bar"} and kinds[1] == {"H_bar"}:
        names = ("P_bar", "H_bar")
    part_of = {c.members: k for k, part in enumerate(parts) for c in part}
    return CliquePartition(parts, names, part_of, witnesses)


def incidence_via_cliques(c1: Clique, c2: Clique, partition: CliquePartition) -> bool:
    """``p`` on ``H`` exactly when the cliques meet; the cliques must come from opposite parts."""
    if partition.part_of[c1.members] == partition.part_of[c2.members]:
        raise GeometryError("cliques from the same part")
    return bool(c1.members & c2.members)
