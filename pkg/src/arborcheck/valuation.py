"""Semivaluations on explicit models via their dual divisors.

Divisorial, rational-weight quasi-monomial and curve semivaluations are
represented by the coefficients of their dual divisor in the dual basis
of a model.  Brackets are exact on any model where the two centers differ;
a same-edge quasi-monomial pair is separated first by Euclidean descent
(satellite blow-ups mirroring the continued-fraction expansion of the
weight ratio), after which the bracket stabilises.  The module also hosts
the quadruple reports, the non-arborescent counterexample constructor and
the finite-shadow hypothesis check.
"""

from __future__ import annotations

import re
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .bricks import HullValencyReport, hull_valency_report
from .dualgraph import (
    BlowupSpec,
    DualGraph,
    GenericGraph,
    GraphError,
    UnknownVertex,
    blowup,
    fresh_id,
    is_arborescent,
    separates,
)
from .lattice import BracketTable, branch_intersection, brackets, dual_basis
from .rational import INFINITE, format_rational, parse_rational


class UnknownEdge(GraphError):
    pass


class GraphIsArborescent(GraphError):
    pass


class InternalVerificationFailed(AssertionError):
    """The theorems guarantee success; failure signals a bug."""


class ValuationSyntaxError(GraphError):
    pass


@dataclass(frozen=True)
class Divisorial:
    vertex: str
    scale: Fraction = Fraction(1)

    def __str__(self):
        if self.scale == 1:
            return f"div({self.vertex})"
        return f"div({self.vertex})*{format_rational(self.scale)}"


@dataclass(frozen=True)
class QuasiMonomial:
    """Monomial valuation at an intersection point of two primes, with
    rational weights aligned to the (u, v) order; `copy` picks the parallel
    edge the point lies on."""

    u: str
    v: str
    weights: tuple[Fraction, Fraction]
    copy: int = 0

    def __str__(self):
        r, s = self.weights
        return f"qm({self.u},{self.v};{format_rational(r)},{format_rational(s)})"


@dataclass(frozen=True)
class Curve:
    """Curve semivaluation of a branch given by its strict-transform
    intersection numbers.  Distinct Curve values are assumed to come from
    branches with disjoint strict transforms."""

    branch: tuple[tuple[str, int], ...]
    scale: Fraction = Fraction(1)

    @staticmethod
    def of(spec: dict[str, int], scale: Fraction = Fraction(1)) -> "Curve":
        items = tuple(sorted((v, int(k)) for v, k in spec.items() if int(k) != 0))
        return Curve(items, scale)

    def spec(self) -> dict[str, int]:
        return dict(self.branch)

    def __str__(self):
        body = ",".join(f"{v}:{k}" for v, k in self.branch)
        if self.scale == 1:
            return f"curve({body})"
        return f"curve({body})*{format_rational(self.scale)}"


Valuation = Union[Divisorial, QuasiMonomial, Curve]


def normalize(g: DualGraph, val: Valuation) -> Valuation:
    """Canonicalise a valuation on g: check references, sort the edge of a
    quasi-monomial valuation, and collapse a zero weight to a divisorial."""
    if isinstance(val, Divisorial):
        if val.vertex not in g.vertex_set:
            raise UnknownVertex(val.vertex)
        if val.scale <= 0:
            raise GraphError("scale must be positive")
        return val
    if isinstance(val, QuasiMonomial):
        u, v, (r, s) = val.u, val.v, val.weights
        if u not in g.vertex_set or v not in g.vertex_set:
            raise UnknownVertex(f"{u} or {v}")
        if r < 0 or s < 0 or (r == 0 and s == 0):
            raise GraphError("weights must be nonnegative and not both zero")
        if s == 0:
            return Divisorial(u, r)
        if r == 0:
            return Divisorial(v, s)
        if v < u:
            u, v, r, s = v, u, s, r
        mult = g.edge_multiplicity(u, v)
        if mult == 0:
            raise UnknownEdge(f"no edge between {u} and {v}")
        if not (0 <= val.copy < mult):
            raise UnknownEdge(f"edge ({u},{v}) has multiplicity {mult}, copy {val.copy} missing")
        return QuasiMonomial(u, v, (Fraction(r), Fraction(s)), val.copy)
    if isinstance(val, Curve):
        if not val.branch:
            raise GraphError("curve needs a nonempty branch spec")
        for v, k in val.branch:
            if v not in g.vertex_set:
                raise UnknownVertex(v)
            if k <= 0:
                raise GraphError("strict-transform numbers must be positive")
        if val.scale <= 0:
            raise GraphError("scale must be positive")
        return val
    raise GraphError(f"not a valuation: {val!r}")


def proportional(a: Valuation, b: Valuation) -> bool:
    """Same semivaluation up to positive rescaling (after normalisation)."""
    if isinstance(a, Divisorial) and isinstance(b, Divisorial):
        return a.vertex == b.vertex
    if isinstance(a, QuasiMonomial) and isinstance(b, QuasiMonomial):
        if (a.u, a.v, a.copy) != (b.u, b.v, b.copy):
            return False
        (r1, s1), (r2, s2) = a.weights, b.weights
        return r1 * s2 == r2 * s1
    if isinstance(a, Curve) and isinstance(b, Curve):
        if len(a.branch) != len(b.branch):
            return False
        ka, kb = dict(a.branch), dict(b.branch)
        if set(ka) != set(kb):
            return False
        ratios = {Fraction(ka[v], kb[v]) for v in ka}
        return len(ratios) == 1
    return False


def dual_coefficients(g: DualGraph, val: Valuation) -> dict[str, Fraction]:
    """Coefficients of the dual divisor in the dual basis of the model:
    Z = sum_u alpha_u E*_u."""
    val = normalize(g, val)
    if isinstance(val, Divisorial):
        return {val.vertex: val.scale}
    if isinstance(val, QuasiMonomial):
        r, s = val.weights
        return {val.u: r, val.v: s}
    return {v: val.scale * k for v, k in val.branch}


def z_divisor(g: DualGraph, val: Valuation) -> dict[str, Fraction]:
    """Dual divisor of the valuation on g, in the basis of the exceptional
    primes (a combination of dual divisors with the coefficients above)."""
    duals = dual_basis(g)
    out = {v: Fraction(0) for v in g.vertex_ids}
    for u, alpha in dual_coefficients(g, val).items():
        for v, c in duals[u].items():
            out[v] += alpha * c
    return out


def _bilinear_bracket(t: BracketTable, a: dict[str, Fraction], b: dict[str, Fraction]) -> Fraction:
    total = Fraction(0)
    for u, au in a.items():
        for v, bv in b.items():
            total += au * bv * t.get(u, v)
    return total


def _qm(a: str, b: str, wa: Fraction, wb: Fraction) -> QuasiMonomial:
    if b < a:
        a, b, wa, wb = b, a, wb, wa
    return QuasiMonomial(a, b, (wa, wb), 0)


def _relocate(val: QuasiMonomial, w: str) -> Valuation:
    """Relocation rule when the edge (u,v) of the valuation has just been
    subdivided at w: (r,s) goes to (r-s,s) on (u,w) if r > s, to (r,s-r)
    on (w,v) if s > r, and to the divisorial at w with scale r if r = s."""
    r, s = val.weights
    if r == s:
        return Divisorial(w, r)
    if r > s:
        return _qm(val.u, w, r - s, s)
    return _qm(w, val.v, r, s - r)


def _descend_step(g: DualGraph, val: QuasiMonomial) -> tuple[DualGraph, Valuation, str]:
    """One satellite blow-up of the valuation's edge, with the valuation
    relocated on the refined model."""
    w = fresh_id(g.vertex_ids, "W")
    g2 = blowup(g, BlowupSpec.satellite(val.u, val.v), w)
    return g2, _relocate(val, w), w


def _same_point(a: Valuation, b: Valuation) -> bool:
    return (
        isinstance(a, QuasiMonomial)
        and isinstance(b, QuasiMonomial)
        and (a.u, a.v, a.copy) == (b.u, b.v, b.copy)
    )


def val_bracket(g: DualGraph, v1: Valuation, v2: Valuation):
    """Bracket of two semivaluations: -Z(v1).Z(v2), computed on the first
    model where the centers differ.

    Returns a Fraction, or the symbolic infinity for the self-bracket of a
    curve semivaluation.
    """
    v1 = normalize(g, v1)
    v2 = normalize(g, v2)
    if proportional(v1, v2):
        if isinstance(v1, Curve):
            return INFINITE
        if isinstance(v1, Divisorial):
            t = brackets(g)
            return v1.scale * v2.scale * t.get(v1.vertex, v1.vertex)
        # proportional quasi-monomial pair: descend one to its divisorial
        model, val = g, v1
        ratio = v2.weights[0] / v1.weights[0]
        while isinstance(val, QuasiMonomial):
            model, val, _ = _descend_step(model, val)
        t = brackets(model)
        alpha = val.scale * val.scale * t.get(val.vertex, val.vertex)
        return ratio * alpha
    model = g
    while _same_point(v1, v2):
        w = fresh_id(model.vertex_ids, "W")
        model = blowup(model, BlowupSpec.satellite(v1.u, v1.v), w)
        v1, v2 = _relocate(v1, w), _relocate(v2, w)
    t = brackets(model)
    return _bilinear_bracket(t, dual_coefficients(model, v1), dual_coefficients(model, v2))


def u_lambda(g: DualGraph, lam: Valuation, v1: Valuation, v2: Valuation):
    """u_lambda(v1,v2) = <lam,v1><lam,v2>/<v1,v2>; zero on proportional
    pairs, infinite only when lam is one of the arguments and its skewness
    is infinite (same curve)."""
    v1 = normalize(g, v1)
    v2 = normalize(g, v2)
    if proportional(v1, v2):
        return Fraction(0)
    b1 = val_bracket(g, lam, v1)
    b2 = val_bracket(g, lam, v2)
    b12 = val_bracket(g, v1, v2)
    if b1 == INFINITE or b2 == INFINITE:
        return INFINITE
    return b1 * b2 / b12


@dataclass(frozen=True)
class FourPointReport:
    i1: object
    i2: object
    i3: object
    verdict: Optional[bool]
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "I1": format_rational(self.i1),
            "I2": format_rational(self.i2),
            "I3": format_rational(self.i3),
            "verdict": self.verdict,
            "degenerate": self.degenerate,
        }


def val_fourpoint(g: DualGraph, quad: Sequence[Valuation], scale: Fraction = Fraction(1)) -> FourPointReport:
    """Scaled products I1 = s<a,b><c,d>, I2 = s<a,c><b,d>, I3 = s<a,d><b,c>
    for a quadruple of pairwise distinct valuations; the 4-point condition
    holds iff two of the three coincide and the third is at least them."""
    if len(quad) != 4:
        raise GraphError("need exactly four valuations")
    a, b, c, d = (normalize(g, v) for v in quad)
    for i, x in enumerate((a, b, c, d)):
        for y in (a, b, c, d)[i + 1:]:
            if proportional(x, y):
                raise GraphError("valuations must be pairwise distinct")
    pairs = [(a, b), (c, d), (a, c), (b, d), (a, d), (b, c)]
    vals = [val_bracket(g, x, y) for x, y in pairs]
    if INFINITE in vals:
        return FourPointReport(INFINITE, INFINITE, INFINITE, None, degenerate=True)
    i1 = scale * vals[0] * vals[1]
    i2 = scale * vals[2] * vals[3]
    i3 = scale * vals[4] * vals[5]
    # two of the three coincide and the third is >= them: since brackets
    # carry inverse distances, the two smallest products must be equal
    low = sorted([i1, i2, i3])
    verdict = low[0] == low[1]
    return FourPointReport(i1, i2, i3, verdict)


# ---------------------------------------------------------------------------
# the counterexample of the arborescence characterisation

@dataclass(frozen=True)
class NoudWitness:
    model: DualGraph
    a: str
    m: str
    p: str
    l: str
    s: int
    t: int
    products: tuple[Fraction, Fraction, Fraction]

    @property
    def branches(self) -> dict[str, dict[str, int]]:
        return {
            "A": {self.a: 1},
            "B": {self.l: 1},
            "C_m": {self.m: 1, self.a: self.s},
            "C_p": {self.p: 1, self.a: self.t},
        }

    def to_json(self) -> dict:
        return {
            "vertices": {"a": self.a, "m": self.m, "p": self.p, "l": self.l},
            "s": self.s,
            "t": self.t,
            "products": [format_rational(x) for x in self.products],
            "model": {
                "vertices": [
                    {"id": v, "self": s} for v, s in zip(self.model.vertex_ids, self.model.self_ints)
                ],
                "edges": [[u, v] for u, v in self.model.edges],
            },
        }


def _fundamental_cycles(g: DualGraph) -> list[list[str]]:
    """All fundamental cycles of the lexicographic DFS spanning tree, as
    vertex sequences."""
    adj = g.adjacency()
    start = min(g.vertex_ids)
    parent: dict[str, Optional[str]] = {}
    order = []
    stack: list[tuple[str, Optional[str]]] = [(start, None)]
    seen_tree_edges: set[tuple[str, str]] = set()
    while stack:
        x, via = stack.pop()
        if x in parent:
            continue
        parent[x] = via
        order.append(x)
        if via is not None:
            seen_tree_edges.add((x, via) if x <= via else (via, x))
        for y in sorted(set(adj[x]), reverse=True):
            if y not in parent:
                stack.append((y, x))
    depth: dict[str, int] = {}
    for v in order:
        depth[v] = 0 if parent[v] is None else depth[parent[v]] + 1

    def tree_path(a: str, b: str) -> list[str]:
        pa, pb = [a], [b]
        x, y = a, b
        while depth[x] > depth[y]:
            x = parent[x]
            pa.append(x)
        while depth[y] > depth[x]:
            y = parent[y]
            pb.append(y)
        while x != y:
            x, y = parent[x], parent[y]
            pa.append(x)
            pb.append(y)
        return pa[:-1] + pb[::-1]

    cycles = []
    seen_pairs: set[tuple[str, str]] = set()
    for u, v in g.edges:
        e = (u, v)
        if e in seen_tree_edges:
            seen_tree_edges.discard(e)  # extra parallel copies are back edges
            continue
        if u == v:
            continue
        if e in seen_pairs:
            continue
        seen_pairs.add(e)
        cycles.append(tree_path(u, v))
    # parallel pairs give 2-cycles
    mult = Counter(g.edges)
    for (u, v), n in mult.items():
        if n >= 2 and u != v:
            cycles.append([u, v])
    return cycles


def _canonical_cycle(cycle: list[str]) -> list[str]:
    """Rotate/reflect a cycle to its lexicographically least form."""
    n = len(cycle)
    best = None
    for seq in (cycle, cycle[::-1]):
        for i in range(n):
            cand = seq[i:] + seq[:i]
            if best is None or cand < best:
                best = cand
    return best


def noud_counterexample(g: DualGraph, l: str) -> NoudWitness:
    """Construct four branches violating the ultrametric inequality for u_L
    on a non-arborescent graph, with minimal tangency exponents.

    A longest fundamental cycle is extended by satellite blow-ups until it
    has at least four vertices; three consecutive vertices m, a, p avoiding
    the root's access vertex are selected; the minimal integers s, then t,
    making the two linear inequalities strict are computed; the strict
    chain of the three products is verified exactly before returning.
    """
    if l not in g.vertex_set:
        raise UnknownVertex(l)
    if is_arborescent(g):
        raise GraphIsArborescent("the dual graph is a tree")
    cycles = _fundamental_cycles(g)
    cycles = [_canonical_cycle(c) for c in cycles]
    best_len = max(len(c) for c in cycles)
    cycle = min(c for c in cycles if len(c) == best_len)

    model = g
    while len(cycle) < 4:
        # subdivide the lexicographically least cycle edge
        pairs = [tuple(sorted((cycle[i], cycle[(i + 1) % len(cycle)]))) for i in range(len(cycle))]
        u, v = min(pairs)
        w = fresh_id(model.vertex_ids, "N")
        model = blowup(model, BlowupSpec.satellite(u, v), w)
        i = next(
            i for i in range(len(cycle))
            if tuple(sorted((cycle[i], cycle[(i + 1) % len(cycle)]))) == (u, v)
        )
        cycle = cycle[: i + 1] + [w] + cycle[i + 1:]
        cycle = _canonical_cycle(cycle)

    n = len(cycle)
    if l in cycle:
        avoid = l
    else:
        # lexicographic BFS from l; the first cycle vertex reached is the
        # access vertex d, and the path interior misses the cycle entirely
        adj = model.adjacency()
        parent: dict[str, Optional[str]] = {l: None}
        queue = deque([l])
        avoid = None
        while queue:
            x = queue.popleft()
            if x in cycle:
                avoid = x
                break
            for y in sorted(set(adj[x])):
                if y not in parent:
                    parent[y] = x
                    queue.append(y)
        if avoid is None:
            raise InternalVerificationFailed("connected graph must reach its cycle")
    j = cycle.index(avoid)
    m, a, p = (cycle[(j + 1) % n], cycle[(j + 2) % n], cycle[(j + 3) % n])
    if separates(model, a, l, m) or separates(model, a, l, p):
        raise InternalVerificationFailed("selected center separates the root branch")

    t = brackets(model)
    b = l
    # minimal s >= 1 with  (aa*bp - ab*ap)*s + (am*bp - ab*mp) > 0
    c1 = t.get(a, a) * t.get(b, p) - t.get(a, b) * t.get(a, p)
    c0 = t.get(a, m) * t.get(b, p) - t.get(a, b) * t.get(m, p)
    if c1 <= 0:
        raise InternalVerificationFailed("leading coefficient must be positive")
    s = max(1, _min_strict(c1, c0))
    # minimal tt >= 1 with  (aa*bm - ab*am)*tt - c1*s + (ap*bm - am*bp) > 0
    d1 = t.get(a, a) * t.get(b, m) - t.get(a, b) * t.get(a, m)
    d0 = t.get(a, p) * t.get(b, m) - t.get(a, m) * t.get(b, p) - c1 * s
    if d1 <= 0:
        raise InternalVerificationFailed("leading coefficient must be positive")
    tt = max(1, _min_strict(d1, d0))

    spec_a = {a: 1}
    spec_b = {b: 1}
    spec_cm = {m: 1, a: s}
    spec_cp = {p: 1, a: tt}
    p1 = branch_intersection(model, spec_a, spec_b) * branch_intersection(model, spec_cm, spec_cp)
    p2 = branch_intersection(model, spec_cm, spec_a) * branch_intersection(model, spec_cp, spec_b)
    p3 = branch_intersection(model, spec_cm, spec_b) * branch_intersection(model, spec_cp, spec_a)
    if not (p1 < p2 < p3):
        raise InternalVerificationFailed(f"product chain failed: {p1}, {p2}, {p3}")
    return NoudWitness(model, a, m, p, l, s, tt, (p1, p2, p3))


def _min_strict(coeff: Fraction, const: Fraction) -> int:
    """Least integer n with coeff*n + const > 0, for coeff > 0."""
    bound = -const / coeff
    return bound.numerator // bound.denominator + 1


# ---------------------------------------------------------------------------
# hypothesis check on the finite shadow

@dataclass(frozen=True)
class HypothesisReport:
    ok: bool
    offenders: tuple[tuple[str, int], ...]
    ambiguous: bool
    j_vertices: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "offenders": [{"brick": b, "hull_valency": k} for b, k in self.offenders],
            "attachment_ambiguous": self.ambiguous,
            "family_vertices": list(self.j_vertices),
        }


def udbv_hypothesis_check(g: DualGraph, family: Sequence[Valuation]) -> HypothesisReport:
    """Build the finite graph carrying the family (edges subdivided at the
    interior quasi-monomial members, curve members attached as pendants at
    their center primes) and run the hull-valency check there.

    A curve whose strict transform meets several primes has an ambiguous
    pendant attachment in the finite shadow; every choice is evaluated and
    disagreements are reported.
    """
    vals = [normalize(g, v) for v in family]
    base_nodes = list(g.vertex_ids)
    base_edges = list(g.edges)
    j_vertices: list[str] = []
    taken = set(base_nodes)

    def fresh(stem: str) -> str:
        name = fresh_id(taken, stem)
        taken.add(name)
        return name

    # subdivide edges at interior quasi-monomial members, ordered along the
    # edge by the parameter s/(r+s)
    per_edge: dict[tuple[str, str, int], list[tuple[Fraction, int]]] = {}
    slots: dict[int, Optional[str]] = {}
    curve_choices: list[list[str]] = []
    for i, val in enumerate(vals):
        if isinstance(val, Divisorial):
            j_vertices.append(val.vertex)
            slots[i] = val.vertex
        elif isinstance(val, QuasiMonomial):
            r, s = val.weights
            per_edge.setdefault((val.u, val.v, val.copy), []).append((s / (r + s), i))
            slots[i] = None
        else:
            slots[i] = None
            curve_choices.append(sorted({v for v, _ in val.branch}))

    for (u, v, copy), members in sorted(per_edge.items()):
        members.sort()
        e = (u, v) if u <= v else (v, u)
        base_edges.remove(e)
        prev = u
        for _, i in members:
            node = fresh("J")
            slots[i] = node
            base_nodes.append(node)
            base_edges.append(tuple(sorted((prev, node))))
            prev = node
        base_edges.append(tuple(sorted((prev, v))))
    for i, val in enumerate(vals):
        if isinstance(val, QuasiMonomial):
            j_vertices.append(slots[i])

    # pendant vertices for curve members; enumerate attachment choices
    curve_indices = [i for i, val in enumerate(vals) if isinstance(val, Curve)]
    pendant_names = {i: fresh("C") for i in curve_indices}

    def build(choice: dict[int, str]) -> HullValencyReport:
        nodes = list(base_nodes) + [pendant_names[i] for i in curve_indices]
        edges = list(base_edges) + [
            tuple(sorted((pendant_names[i], choice[i]))) for i in curve_indices
        ]
        fam = list(j_vertices) + [pendant_names[i] for i in curve_indices]
        return hull_valency_report(GenericGraph.make(nodes, edges), fam)

    def all_choices(idx: int, current: dict[int, str], out: list[dict[int, str]]):
        if idx == len(curve_indices):
            out.append(dict(current))
            return
        i = curve_indices[idx]
        for v in sorted({v for v, _ in vals[i].branch}):
            current[i] = v
            all_choices(idx + 1, current, out)
        del current[i]

    choices: list[dict[int, str]] = []
    all_choices(0, {}, choices)
    reports = [build(c) for c in choices]
    main = reports[0]
    ambiguous = len({r.ok for r in reports}) > 1
    fam = tuple(list(j_vertices) + [pendant_names[i] for i in curve_indices])
    return HypothesisReport(main.ok, main.offenders, ambiguous, fam)


# ---------------------------------------------------------------------------
# CLI valuation syntax

_DIV_RE = re.compile(r"^div\(([^)]+)\)(?:\*(.+))?$")
_QM_RE = re.compile(r"^qm\(([^,;]+),([^,;]+);([^,;]+),([^,;)]+)\)$")
_CURVE_RE = re.compile(r"^curve\(([^)]+)\)(?:\*(.+))?$")


def parse_valuation(text: str) -> Valuation:
    """Parse "div(E1)", "div(E1)*3/2", "qm(E1,E2;2/3,1/3)",
    "curve(E3:1,E1:2)" (curve scale via a trailing *p/q)."""
    text = text.strip()
    m = _DIV_RE.match(text)
    if m:
        scale = parse_rational(m.group(2)) if m.group(2) else Fraction(1)
        return Divisorial(m.group(1).strip(), scale)
    m = _QM_RE.match(text)
    if m:
        try:
            r, s = parse_rational(m.group(3)), parse_rational(m.group(4))
        except ValueError as exc:
            raise ValuationSyntaxError(f"bad weights in {text!r}: {exc}") from exc
        return QuasiMonomial(m.group(1).strip(), m.group(2).strip(), (r, s))
    m = _CURVE_RE.match(text)
    if m:
        scale = parse_rational(m.group(2)) if m.group(2) else Fraction(1)
        spec = {}
        for part in m.group(1).split(","):
            v, _, k = part.partition(":")
            if not k:
                raise ValuationSyntaxError(f"curve entries look like E3:1, got {part!r}")
            spec[v.strip()] = int(k)
        return Curve.of(spec, scale)
    raise ValuationSyntaxError(f"cannot parse valuation {text!r}")
