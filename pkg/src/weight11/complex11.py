"""First two maps of the weight-11 complex for a fixed (g, n).

Level-1 and level-2 terms sum det-twisted automorphism invariants of the
per-graph weight-11 spaces over one- and two-edge stable graphs.  The first
map restricts the genus-1 generator space to the one-edge boundary; the
second map takes signed differences of edge-contraction pullbacks.  Its rank
certifies the induction step, either by direct elimination or through the
block-triangular ordering of the one-edge classes.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import h11, ratlin, specht
from .graphs import (StableGraph, canonicalize, contract_edge, enumerate_one_edge,
                     enumerate_two_edge_support, one_edge_vertex_types,
                     stable_type, two_edge_vertex_types, _format_key)
from .h11 import GraphH11Basis, LedgerLike, UnknownStatusError

EDGE_ORDER_CONVENTION = "canonical-key"
DIRECT_DOMAIN_LIMIT = 4000  # above this the block-order route is used


class OrderingFailed(RuntimeError):
    """The documented block ordering did not verify."""


@dataclass
class TermSummand:
    graph: StableGraph
    key: str
    dim: int
    offset: int
    _gbasis: GraphH11Basis | None = None
    _vectors: list[dict[int, Fraction]] | None = None

    def gbasis(self, ledger) -> GraphH11Basis:
        if self._gbasis is None:
            self._gbasis = h11.graph_basis(self.graph, ledger, self.key)
        return self._gbasis

    def vectors(self, ledger) -> list[dict[int, Fraction]]:
        if self._vectors is None:
            gb = self.gbasis(ledger)
            self._vectors = h11.twisted_invariants(self.graph, ledger, gb)
            if len(self._vectors) != self.dim:
                raise AssertionError("twisted basis size mismatch")
        return self._vectors

    def labels(self) -> list[str]:
        return [f"{self.key}#inv{j}" for j in range(self.dim)]


@dataclass
class ComplexTerm:
    g: int
    n: int
    level: int
    summands: list[TermSummand]
    total_dim: int

    def by_key(self) -> dict[str, TermSummand]:
        return {s.key: s for s in self.summands}

    def labels(self) -> list[str]:
        out = []
        for s in self.summands:
            out.extend(s.labels())
        return out


def _consult_vertex_types(g: int, n: int, level: int, ledger: LedgerLike | None) -> None:
    """Resolve every realizable genus >= 2 vertex type before building a term."""
    types = one_edge_vertex_types(g, n) if level == 1 else two_edge_vertex_types(g, n)
    for g_v, m in sorted(types):
        if g_v >= 2:
            h11.vertex_h11_dim(g_v, m, ledger)


def build_term(g: int, n: int, level: int, ledger: LedgerLike | None = None) -> ComplexTerm:
    """Term of the weight-11 complex at the given edge count (level 1 or 2)."""
    if level not in (1, 2):
        raise ValueError("level must be 1 or 2")
    if not stable_type(g, n):
        raise ValueError(f"({g},{n}) is not stable")
    _consult_vertex_types(g, n, level, ledger)
    if level == 1:
        graphs_ = enumerate_one_edge(g, n)
    else:
        graphs_ = enumerate_two_edge_support(g, n)
    summands = []
    offset = 0
    for G in graphs_:
        key = _format_key(G)
        gb = h11.graph_basis(G, ledger, key)
        dim = h11.twisted_dim(G, ledger, gb) if gb.total_dim else 0
        if dim == 0:
            continue
        s = TermSummand(G, key, dim, offset, _gbasis=gb)
        summands.append(s)
        offset += dim
    return ComplexTerm(g, n, level, summands, offset)


def level_one_zero_keys(g: int, n: int, ledger) -> list[str]:
    """Canonical keys of one-edge classes whose twisted summand vanishes."""
    out = []
    for G in enumerate_one_edge(g, n):
        key = _format_key(G)
        gb = h11.graph_basis(G, ledger, key)
        dim = h11.twisted_dim(G, ledger, gb) if gb.total_dim else 0
        if dim == 0:
            out.append(key)
    return out


class _InvariantIndex:
    """Row-side access to a twisted-invariant basis.

    Basis vectors returned by the averaging construction have pairwise
    disjoint supports (one group orbit each), so projecting amounts to one
    dot product per touched vector: coeff_k = <u_k, z> / <u_k, u_k>.
    """

    def __init__(self, vectors: list[dict[int, Fraction]]):
        self.vectors = vectors
        self.norms = [sum(v * v for v in vec.values()) for vec in vectors]
        self.owner: dict[int, tuple[int, Fraction]] = {}
        for k, vec in enumerate(vectors):
            for idx, val in vec.items():
                if idx in self.owner:
                    raise AssertionError("invariant supports not disjoint")
                self.owner[idx] = (k, val)

    def project(self, z: dict[int, Fraction]) -> dict[int, Fraction]:
        acc: dict[int, Fraction] = {}
        for idx, zv in z.items():
            hit = self.owner.get(idx)
            if hit is None:
                continue
            k, uval = hit
            acc[k] = acc.get(k, Fraction(0)) + uval * zv
        return {k: v / self.norms[k] for k, v in acc.items() if v}


def _composed_columns(G2: StableGraph, e: int, basis2: GraphH11Basis,
                      dom: TermSummand, ledger) -> list[list[tuple[int, int]]]:
    """Pullback columns indexed by the canonical domain representative's flat
    generators, routed through the canonical isomorphism onto the contraction."""
    phi, vmap, emap = contract_edge(G2, e)
    canon, iso = canonicalize(phi)
    if _format_key(canon) != dom.key:
        raise AssertionError("contraction does not match the domain summand")
    basisP, _, colsP = h11.pullback_columns(G2, e, ledger, basis2)
    Rgb = dom.gbasis(ledger)
    inv_vertex = [0] * len(iso.vertex_map)
    for src, dst in enumerate(iso.vertex_map):
        inv_vertex[dst] = src
    hed_inv = {dst: src for src, dst in iso.half_edge_map}
    out: list[list[tuple[int, int]]] = [None] * Rgb.total_dim  # type: ignore
    for sR in Rgb.summands:
        v_phi = inv_vertex[sR.vertex]
        sP = basisP.summand_of_vertex(v_phi)
        if sP is None:
            raise AssertionError("canonical iso lost a summand")
        translate = {}
        for m in sR.alphabet:
            if specht.mark_is_node(m):
                k, sd = specht.mark_edge_side(m)
                ke, ks = hed_inv[(k, sd)]
                translate[m] = specht.mark_node(ke, ks)
            else:
                translate[m] = m
        p_index = {gen: i for i, gen in enumerate(sP.generators)}
        for jR, A in enumerate(sR.generators):
            img = tuple(translate[m] for m in A)
            sgn = specht.perm_sign(img)
            jP = p_index[tuple(sorted(img))]
            col = colsP[sP.offset + jP]
            out[sR.offset + jR] = [(row, sgn * s) for row, s in col]
    return out


def _graph_block_entries(S2: TermSummand, domains: dict[str, TermSummand],
                         ledger) -> list[tuple[int, int, Fraction]]:
    """Entries of the two signed contraction blocks into one two-edge summand.

    Row indices are local to S2 (0..dim-1); columns use the global offsets of
    the domain summands (keys absent from `domains` are skipped).
    """
    basis2 = S2.gbasis(ledger)
    inv = _InvariantIndex(S2.vectors(ledger))
    acc: dict[tuple[int, int], Fraction] = {}
    for e, sign in ((0, 1), (1, -1)):
        phi, _, _ = contract_edge(S2.graph, e)
        key = _format_key(canonicalize(phi)[0])
        dom = domains.get(key)
        if dom is None or dom.dim == 0:
            continue
        cols = _composed_columns(S2.graph, e, basis2, dom, ledger)
        for j, w in enumerate(dom.vectors(ledger)):
            z: dict[int, Fraction] = {}
            for flat, coeff in w.items():
                for row, s in cols[flat]:
                    t = z.get(row, Fraction(0)) + coeff * s
                    if t:
                        z[row] = t
                    elif row in z:
                        del z[row]
            for k, val in inv.project(z).items():
                cell = (k, dom.offset + j)
                t = acc.get(cell, Fraction(0)) + sign * val
                if t:
                    acc[cell] = t
                elif cell in acc:
                    del acc[cell]
    return [(i, j, v) for (i, j), v in acc.items()]


def build_alpha(n: int, ledger: LedgerLike | None = None) -> ratlin.SparseMat:
    """Restriction matrix from the genus-1 generator basis to the level-1 term."""
    if n < 11:
        raise ValueError("need at least 11 markings")
    term1 = build_term(1, n, 1, ledger)
    legs = tuple(range(1, n + 1))
    gens = specht.standard_generators(legs)
    col_labels = [",".join(specht.mark_str(m) for m in A) for A in gens]
    rows = term1.labels()
    triplets = []
    for s in term1.summands:
        G = s.graph
        gb = s.gbasis(ledger)
        summand = gb.summands[0] if gb.summands else None
        if summand is None:
            continue
        v = summand.vertex
        B = set(G.vertex_legs(v))
        half = G.vertex_half_edges(v)
        if len(half) != 1:
            raise AssertionError("splitting vertex should carry one half-edge")
        p_mark = specht.mark_node(*half[0])
        inv = _InvariantIndex(s.vectors(ledger))
        tgt_index = {gen: i for i, gen in enumerate(summand.generators)}
        lead = summand.alphabet[0]
        for jcol, A in enumerate(gens):
            outside = [a for a in A if a not in B]
            if len(outside) > 1:
                continue
            eps = tuple(p_mark if a not in B else a for a in A)
            z: dict[int, Fraction] = {}
            for idx, sgn in specht.express_omega_signed(eps, lead, tgt_index):
                z[summand.offset + idx] = z.get(summand.offset + idx, Fraction(0)) + sgn
            for k, val in inv.project(z).items():
                triplets.append((s.offset + k, jcol, val))
    return ratlin.SparseMat(rows, col_labels, triplets)


def build_beta(g: int, n: int, ledger: LedgerLike | None = None,
               threads: int = 1) -> tuple[ratlin.SparseMat, ComplexTerm, ComplexTerm]:
    """Signed difference of contraction pullbacks, level-1 term to level-2 term."""
    term1 = build_term(g, n, 1, ledger)
    term2 = build_term(g, n, 2, ledger)
    domains = term1.by_key()

    def work(s2: TermSummand):
        return _graph_block_entries(s2, domains, ledger)

    if threads > 1 and len(term2.summands) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, term2.summands))
    else:
        results = [work(s2) for s2 in term2.summands]
    triplets = []
    for s2, entries in zip(term2.summands, results):
        for i, j, v in entries:
            triplets.append((s2.offset + i, j, v))
    mat = ratlin.SparseMat(term2.labels(), term1.labels(), triplets)
    return mat, term1, term2


def check_beta_alpha_zero(n: int, ledger: LedgerLike | None = None) -> bool:
    """Exact vanishing of the composite of the two maps in genus 1."""
    if n < 11:
        raise ValueError("need at least 11 markings")
    alpha = build_alpha(n, ledger)
    beta, _, _ = build_beta(1, n, ledger)
    return beta.matmul(alpha).is_zero()


@dataclass
class InjectivityReport:
    g: int
    n: int
    domain_dim: int
    codomain_dim: int
    rank: int
    injective: bool
    method: str
    summands: list[dict]
    edge_order_convention: str = EDGE_ORDER_CONVENTION
    modular_precheck: dict | None = None
    elimination: dict | None = None
    block_order: dict | None = None
    timing_seconds: float = 0.0
    threads: int = 1

    def canonical_payload(self) -> dict:
        """Deterministic content (timings excluded) for digests and comparisons."""
        return {
            "g": self.g, "n": self.n,
            "domain_dim": self.domain_dim, "codomain_dim": self.codomain_dim,
            "rank": self.rank, "injective": self.injective,
            "method": self.method, "summands": self.summands,
            "edge_order_convention": self.edge_order_convention,
            "modular_precheck": self.modular_precheck,
            "block_order": self.block_order,
        }

    def to_json_dict(self) -> dict:
        d = self.canonical_payload()
        d["elimination"] = self.elimination
        d["timing_seconds"] = self.timing_seconds
        d["threads"] = self.threads
        return d


def check_beta_injective(g: int, n: int, ledger: LedgerLike | None = None,
                         method: str = "auto", threads: int = 1,
                         modular_precheck: bool = True) -> InjectivityReport:
    """Rank certificate for the second map of the weight-11 complex."""
    t0 = time.perf_counter()
    if method not in ("auto", "direct", "block"):
        raise ValueError(f"unknown method {method!r}")
    term1 = build_term(g, n, 1, ledger)
    if method == "auto":
        method = "direct" if term1.total_dim <= DIRECT_DOMAIN_LIMIT else "block"
    summand_info = [{"key": s.key, "dim": s.dim} for s in term1.summands]
    if method == "direct":
        beta, term1, term2 = build_beta(g, n, ledger, threads=threads)
        stats = ratlin.EliminationStats()
        precheck_record = None
        if modular_precheck:
            rank, precheck_record = ratlin.rank_with_precheck(beta, stats=stats)
        else:
            rank = ratlin.rank(beta, stats=stats)
        report = InjectivityReport(
            g=g, n=n, domain_dim=term1.total_dim, codomain_dim=term2.total_dim,
            rank=rank, injective=(rank == term1.total_dim), method="direct",
            summands=summand_info, modular_precheck=precheck_record,
            elimination={"pivots": stats.pivots, "row_updates": stats.row_updates,
                         "max_row_len": stats.max_row_len},
            threads=threads,
        )
    else:
        block = block_order(g, n, ledger, threads=threads,
                            modular_precheck=modular_precheck)
        term2 = build_term(g, n, 2, ledger)
        ok = block["triangular"] and block["all_blocks_injective"]
        report = InjectivityReport(
            g=g, n=n, domain_dim=term1.total_dim, codomain_dim=term2.total_dim,
            rank=term1.total_dim if ok else -1, injective=ok, method="block-order",
            summands=summand_info, block_order=block, threads=threads,
        )
    report.timing_seconds = time.perf_counter() - t0
    return report


def _loop_designated(G: StableGraph) -> list[StableGraph]:
    """Two-edge graphs receiving the self-loop class: split the genus-1 vertex
    off a 10-subset of legs (loop stays on the genus-0 side), plus the double
    edges over 9-subsets."""
    n = G.n
    legs = tuple(range(1, n + 1))
    out = []
    for B in combinations(legs, 10):
        leg_map = [1] * n
        for leg in B:
            leg_map[leg - 1] = 0
        cand = StableGraph((1, 0), tuple(leg_map), ((1, 1), (0, 1)))
        if cand.is_stable():
            out.append(cand)
    for B in combinations(legs, 9):
        leg_map = [1] * n
        for leg in B:
            leg_map[leg - 1] = 0
        cand = StableGraph((1, 0), tuple(leg_map), ((0, 1), (0, 1)))
        if cand.is_stable():
            out.append(cand)
    return out


def _split_designated(G: StableGraph, ledger) -> list[StableGraph]:
    """Designated two-edge graphs for a two-vertex one-edge class.

    Sides of genus 1 with >= 11 marks are re-split along 10-subsets of their
    legs when the far side is trivial or a single leg; with two or more far
    legs, a three-vertex chain pinching two far legs does the job.  Genus
    >= 2 sides get a loop attached to certify against the (already vanishing)
    loop class.
    """
    n = G.n
    out = []
    va, vb = 0, 1
    for v_big, v_other in ((va, vb), (vb, va)):
        g_big = G.genera[v_big]
        A = G.vertex_legs(v_big)
        Ac = G.vertex_legs(v_other)
        g_other = G.genera[v_other]
        if g_big == 1 and len(A) + 1 >= 11:
            c = len(Ac)
            if c <= 1:
                # chain: (1, B) - (0, A minus B + both halves) - (other side)
                for B in combinations(A, 10):
                    Bset = set(B)
                    leg_map = [2] * n
                    for leg in A:
                        leg_map[leg - 1] = 0 if leg in Bset else 1
                    cand = StableGraph((1, 0, g_other), tuple(leg_map),
                                       ((0, 1), (1, 2)))
                    if cand.is_stable():
                        out.append(cand)
            else:
                i, j = sorted(Ac)[:2]
                leg_map = [0] * n
                for leg in Ac:
                    leg_map[leg - 1] = 1
                leg_map[i - 1] = 2
                leg_map[j - 1] = 2
                cand = StableGraph((1, g_other, 0), tuple(leg_map),
                                   ((0, 1), (1, 2)))
                if cand.is_stable():
                    out.append(cand)
        elif g_big >= 2:
            # attach a loop to the genus >= 2 side
            leg_map = [0 if x in set(A) else 1 for x in range(1, n + 1)]
            cand = StableGraph((g_big - 1, g_other), tuple(leg_map),
                               ((0, 0), (0, 1)))
            if cand.is_stable():
                out.append(cand)
    return out


def block_order(g: int, n: int, ledger: LedgerLike | None = None,
                threads: int = 1, modular_precheck: bool = True) -> dict:
    """The documented ordering of one-edge classes with per-class designated
    two-edge targets; verifies block upper-triangularity and per-block
    injectivity, which together force the second map to have full column rank.
    """
    if g < 2:
        raise ValueError("block ordering applies to genus >= 2 only")
    term1 = build_term(g, n, 1, ledger)
    zero_keys = set(level_one_zero_keys(g, n, ledger))
    # order: self-loop class first, then splittings by (far-side size, key)
    def order_key(s: TermSummand):
        G = s.graph
        if G.num_vertices == 1:
            return (0, 0, s.key)
        sides = sorted(len(G.vertex_legs(v)) for v in range(2))
        return (1, sides[0], s.key)

    ordered = sorted(term1.summands, key=order_key)
    position = {s.key: i for i, s in enumerate(ordered)}
    groups = {"zero": sorted(zero_keys), "self-loop": [], "splittings": []}
    designated: dict[str, list[TermSummand]] = {}
    seen_rows: set[str] = set()
    triangular = True
    diagnostics: list[str] = []
    for i, s in enumerate(ordered):
        G = s.graph
        if G.num_vertices == 1:
            cands = _loop_designated(G)
            groups["self-loop"].append(s.key)
        else:
            cands = _split_designated(G, ledger)
            groups["splittings"].append(s.key)
        rows = []
        for cand in cands:
            canon, _ = canonicalize(cand)
            key = _format_key(canon)
            if key in seen_rows:
                triangular = False
                diagnostics.append(f"designated class {key} reused")
                continue
            gb = h11.graph_basis(canon, ledger, key)
            dim = h11.twisted_dim(canon, ledger, gb) if gb.total_dim else 0
            if dim == 0:
                continue
            hits_own = False
            ok = True
            for e in range(2):
                phi, _, _ = contract_edge(canon, e)
                ckey = _format_key(canonicalize(phi)[0])
                if ckey == s.key:
                    hits_own = True
                elif ckey in zero_keys:
                    pass
                elif ckey in position and position[ckey] > i:
                    pass
                else:
                    ok = False
                    diagnostics.append(
                        f"{key} contracts onto earlier class {ckey}")
            if not ok:
                triangular = False
                continue
            if hits_own:
                seen_rows.add(key)
                rows.append(TermSummand(canon, key, dim, 0, _gbasis=gb))
        designated[s.key] = rows

    blocks = []
    all_injective = True

    def check_block(s: TermSummand):
        rows = designated[s.key]
        offset = 0
        triplets = []
        row_labels = []
        for r in rows:
            entries = _graph_block_entries(r, {s.key: TermSummand(
                s.graph, s.key, s.dim, 0, _gbasis=s._gbasis, _vectors=s._vectors)},
                ledger, restrict_to=s.key)
            for i, j, v in entries:
                triplets.append((offset + i, j, v))
            row_labels.extend(f"{r.key}#inv{k}" for k in range(r.dim))
            offset += r.dim
        mat = ratlin.SparseMat(row_labels, s.labels(), triplets)
        if modular_precheck:
            rank, _ = ratlin.rank_with_precheck(mat)
        else:
            rank = ratlin.rank(mat)
        return {"key": s.key, "dim": s.dim, "rows": offset,
                "rank": rank, "injective": rank == s.dim}

    # prepare vectors up front (sequential) to keep assembly deterministic
    for s in ordered:
        s.vectors(ledger)
    if threads > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(check_block, ordered))
    else:
        blocks = [check_block(s) for s in ordered]
    for b in blocks:
        if not b["injective"]:
            all_injective = False
            diagnostics.append(f"diagonal block at {b['key']} has rank "
                               f"{b['rank']} < {b['dim']}")
    return {
        "g": g, "n": n,
        "groups": groups,
        "order": [s.key for s in ordered],
        "blocks": blocks,
        "triangular": triangular,
        "all_blocks_injective": all_injective,
        "domain_dim": term1.total_dim,
        "diagnostics": diagnostics,
    }
