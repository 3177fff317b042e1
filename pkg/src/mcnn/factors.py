"""Existence and structure of factor maps between layer spaces.

A factor-like matrix E (nonnegative integer, unit row sums) encodes a state
map; intertwining S_i E = E S_j over formal symbol sums certifies an
entropy-preserving map on the sofic spaces, the incidence-only variant one on
the covers.  Synchronizing words decide almost invertibility; entropy
comparison plus periodic-point conditions decide embeddings and
infinite-to-one factors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleLabels
from .shifts import (
    Presentation, SymbolicMatrix, TransitionMatrix, periodic_counts,
    structure_flags,
)
from .spectral import entropies_equal

DEGREE_SEARCH_CAP = 12


def _matrix_from_map(state_map, n_cols):
    e = np.zeros((len(state_map), n_cols), dtype=np.int64)
    for i, j in enumerate(state_map):
        e[i, j] = 1
    return e


@dataclass(frozen=True)
class FactorLikeMatrix:
    """Unit-row-sum nonnegative integer matrix, i.e. a state map."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int64)
        if (e < 0).any() or (e.sum(axis=1) != 1).any():
            raise ValueError("rows must be unit nonnegative")
        object.__setattr__(self, "entries", e)

    @property
    def state_map(self):
        return tuple(int(j) for j in self.entries.argmax(axis=1))


def _row_symbol_targets(s: SymbolicMatrix):
    """Per row: dict symbol -> column holding it (right-resolving input)."""
    rows, cols = s.shape
    out = []
    for i in range(rows):
        d = {}
        for j in range(cols):
            for sym, c in s.entries[i][j].items():
                if c:
                    if c > 1 or sym in d:
                        raise ValueError("matrix is not right-resolving")
                    d[sym] = j
        out.append(d)
    return out


def search_factor_like_symbolic(s_i: SymbolicMatrix, s_j: SymbolicMatrix):
    """First factor-like E with S_i E = E S_j (formal sums), else None.

    For right-resolving matrices the intertwining forces, for each state p,
    equal row symbol sets and f(target_i(p, sym)) = target_j(f(p), sym); the
    search assigns states in canonical order with forced propagation.
    """
    m, n = s_i.shape[0], s_j.shape[0]
    rows_i = _row_symbol_targets(s_i)
    rows_j = _row_symbol_targets(s_j)
    candidates = [
        [t for t in range(n) if set(rows_j[t]) == set(rows_i[p])]
        for p in range(m)
    ]

    def propagate(assign, p, t):
        forced = [(p, t)]
        while forced:
            p, t = forced.pop()
            if assign[p] is not None:
                if assign[p] != t:
                    return False
                continue
            if set(rows_j[t]) != set(rows_i[p]):
                return False
            assign[p] = t
            for sym, q in rows_i[p].items():
                forced.append((q, rows_j[t][sym]))
        return True

    def rec(assign):
        try:
            p = assign.index(None)
        except ValueError:
            return assign
        for t in candidates[p]:
            trial = assign[:]
            if propagate(trial, p, t):
                res = rec(trial)
                if res is not None:
                    return res
        return None

    res = rec([None] * m)
    if res is None:
        return None
    e = FactorLikeMatrix(_matrix_from_map(res, n))
    assert verify_symbolic_intertwining(s_i, s_j, e)
    return e


def verify_symbolic_intertwining(s_i, s_j, e: FactorLikeMatrix):
    return s_i.mul_int_right(e.entries) == s_j.mul_int_left(e.entries)


def search_factor_like_incidence(t_i: TransitionMatrix, t_j: TransitionMatrix):
    """First factor-like E with T_i E = E T_j over the integers, else None.

    The equation forces f to map the successor set of p bijectively onto the
    successor set of f(p); backtracking with that degree pruning.
    """
    a, b = t_i.matrix, t_j.matrix
    m, n = a.shape[0], b.shape[0]
    succ_i = [tuple(np.nonzero(a[p])[0]) for p in range(m)]
    succ_j = [tuple(np.nonzero(b[q])[0]) for q in range(n)]

    def consistent(assign):
        for p in range(m):
            t = assign[p]
            if t is None:
                continue
            imgs = [assign[q] for q in succ_i[p]]
            if None in imgs:
                continue
            if sorted(imgs) != sorted(succ_j[t]):
                return False
        return True

    def rec(assign, p):
        if p == m:
            return assign[:]
        for t in range(n):
            if len(succ_i[p]) != len(succ_j[t]):
                continue
            assign[p] = t
            if consistent(assign):
                res = rec(assign, p + 1)
                if res is not None:
                    return res
            assign[p] = None
        return None

    res = rec([None] * m, 0)
    if res is None:
        return None
    e = FactorLikeMatrix(_matrix_from_map(res, n))
    assert (a @ e.entries == e.entries @ b).all()
    return e


@dataclass(frozen=True)
class OneBlockMap:
    """Letter-wise map; ``mapping`` sends source states/symbols to targets."""

    mapping: tuple
    source: str = ""
    target: str = ""

    def __call__(self, i):
        return self.mapping[i]


def induced_map_from_e(e: FactorLikeMatrix, src: Presentation, dst: Presentation,
                       require_labels=False):
    """One-block state map from a verified intertwiner.

    The derived symbol map exists only when every source edge maps onto a
    target edge carrying the same two-block label; otherwise raises
    IncompatibleLabels in strict mode and returns a state-only map else.
    """
    f = e.state_map
    compatible = True
    dst_edges = {(s, d): a for s, d, a in dst.edges}
    for s, d, a in src.edges:
        if dst_edges.get((f[s], f[d])) != a:
            compatible = False
            break
    if require_labels and not compatible:
        raise IncompatibleLabels("state map does not respect edge labels")
    return OneBlockMap(mapping=f, source=src.provenance, target=dst.provenance), compatible


@dataclass(frozen=True)
class SyncReport:
    word: tuple  # shortest synchronizing word, or None
    terminal: object  # the single terminal state index of `word`
    all_length_k: int  # least k with all length-k words synchronizing, or None
    no_uniform_k: bool  # True when proven that no such k exists
    degree_star: int
    magic_word: tuple
    magic_coordinate: int
    bounded: bool  # degree search hit its cap without a synchronizing word


def _letter_transition(p: Presentation):
    succ = p.letter_successors()

    def step(subset, a):
        out = set()
        for q in subset:
            out |= succ[q].get(a, set())
        return frozenset(out)

    return step


def synchronizing_analysis(p: Presentation, max_len=None, degree_cap=DEGREE_SEARCH_CAP):
    """Synchronizing words, uniform synchronization length and degree.

    Works on any labeled presentation (subset simulation); words are over the
    single-letter alphabet.  ``max_len`` defaults to 2^states, the subset
    contraction bound.  The uniform-k scan iterates the family of reachable
    subset images and detects cycles, so "no uniform k exists" is decided
    exactly; the degree search is capped at ``degree_cap`` and reports
    ``bounded`` when it could not witness d* = 1.
    """
    if max_len is None:
        max_len = 2 ** p.n_states
    letters = p.letter_alphabet()
    step = _letter_transition(p)
    full = frozenset(range(p.n_states))

    if p.n_states == 1:
        return SyncReport(word=(), terminal=0, all_length_k=0, no_uniform_k=False,
                          degree_star=1, magic_word=(), magic_coordinate=0,
                          bounded=False)

    # shortest synchronizing word: BFS on subsets from the full set
    start = full
    seen = {start}
    frontier = [(start, ())]
    sync_word = None
    terminal = None
    while frontier and sync_word is None:
        nxt = []
        for subset, word in frontier:
            if len(word) > max_len:
                continue
            for a in letters:
                img = step(subset, a)
                if not img:
                    continue
                w = word + (a,)
                if len(img) == 1:
                    sync_word = w
                    terminal = next(iter(img))
                    break
                if img not in seen:
                    seen.add(img)
                    nxt.append((img, w))
            if sync_word:
                break
        frontier = nxt

    # least k with every length-k word synchronizing; family iteration
    family = {frozenset(q for q in full if p.letters[q] == a) for a in letters}
    family = {s for s in family if s}
    all_k = None
    no_uniform = False
    seen_families = {frozenset(family)}
    k = 1
    while k <= max_len:
        if all(len(s) == 1 for s in family):
            all_k = k
            break
        nxt = {step(s, a) for s in family for a in letters}
        nxt = {s for s in nxt if s}
        key = frozenset(nxt)
        if key in seen_families:
            no_uniform = True
            break
        seen_families.add(key)
        family = nxt
        k += 1

    if sync_word is not None:
        # a synchronizing word is itself magic at its last coordinate
        return SyncReport(word=sync_word, terminal=terminal, all_length_k=all_k,
                          no_uniform_k=no_uniform, degree_star=1,
                          magic_word=sync_word, magic_coordinate=len(sync_word),
                          bounded=False)

    best, best_word, best_coord = None, None, None
    for k in range(1, degree_cap + 1):
        for word in itertools.product(letters, repeat=k):
            counts = _coordinate_symbol_counts(p, word, step)
            if counts is None:
                continue
            for i, c in enumerate(counts):
                if best is None or c < best:
                    best, best_word, best_coord = c, word, i + 1
        if best == 1:
            break
    return SyncReport(word=None, terminal=None, all_length_k=all_k,
                      no_uniform_k=no_uniform, degree_star=best,
                      magic_word=best_word, magic_coordinate=best_coord,
                      bounded=True)


def _coordinate_symbol_counts(p: Presentation, word, step):
    """d*(word, i) for every coordinate: presentation states at position i."""
    n = len(word)
    fwd = [None] * n
    cur = frozenset(q for q in range(p.n_states) if p.letters[q] == word[0])
    fwd[0] = cur
    for i in range(1, n):
        cur = step(cur, word[i])
        if not cur:
            return None
        fwd[i] = cur
    pred = [dict() for _ in range(p.n_states)]
    for s, d, a in p.edges:
        pred[d].setdefault(a[0], set()).add(s)
    bwd = [None] * n
    bwd[n - 1] = fwd[n - 1]
    for i in range(n - 2, -1, -1):
        prev = set()
        for q in bwd[i + 1]:
            prev |= pred[q].get(word[i], set())
        bwd[i] = frozenset(prev) & fwd[i]
        if not bwd[i]:
            return None
    return [len(b) for b in bwd]


def _periodic_nonempty(t: TransitionMatrix, n_max):
    return [periodic_counts(t, n) > 0 for n in range(1, n_max + 1)]


def default_n_max(t_x: TransitionMatrix, t_y: TransitionMatrix):
    px = structure_flags(t_x)["period"] or 1
    py = structure_flags(t_y)["period"] or 1
    lcm = px * py // math.gcd(px, py)
    return min(30, max(8, lcm * max(t_x.n_states, t_y.n_states)))


def embedding_condition(t_x: TransitionMatrix, t_y: TransitionMatrix,
                        n_max=None, tol=1e-9):
    """h(X) < h(Y) and |P_n(X)| <= |P_n(Y)| for all n <= n_max."""
    from .spectral import topological_entropy

    if n_max is None:
        n_max = default_n_max(t_x, t_y)
    hx, hy = topological_entropy(t_x), topological_entropy(t_y)
    if not hx < hy - tol:
        return False
    return all(periodic_counts(t_x, n) <= periodic_counts(t_y, n)
               for n in range(1, n_max + 1))


def factor_periodic_condition(t_x: TransitionMatrix, t_y: TransitionMatrix,
                              n_max=None):
    """Every period of X is divided by some nonempty period of Y."""
    if n_max is None:
        n_max = default_n_max(t_x, t_y)
    x_nonempty = _periodic_nonempty(t_x, n_max)
    y_nonempty = _periodic_nonempty(t_y, n_max)
    for n in range(1, n_max + 1):
        if not x_nonempty[n - 1]:
            continue
        if not any(y_nonempty[m - 1] for m in range(1, n + 1) if n % m == 0):
            return False
    return True


@dataclass(frozen=True)
class FactorDecision:
    relation: str  # FSE-finite-to-one | infinite-to-one-exists |
    #                embedding-exists | none-found
    direction: tuple  # (source layer, target layer)
    evidence: dict


def classify_relation(layer_i, layer_j, solution=None, tol=1e-9):
    """Flow-chart decision between two layer bundles.

    ``layer_i``/``layer_j`` are dicts with keys ``layer`` (index), ``cover``
    (Presentation) and ``entropy``; ``solution`` optionally carries the
    solution-space matrix and entropy for the supplementary conditions.
    Equal entropies route to the factor-like searches (symbolic first);
    distinct entropies to the infinite-to-one periodic-point criterion.
    """
    ti = layer_i["cover"].incidence()
    tj = layer_j["cover"].incidence()
    hi, hj = layer_i["entropy"], layer_j["entropy"]
    equal = entropies_equal(ti.matrix, tj.matrix, hi, hj, tol=tol)

    if equal:
        for src, dst in ((layer_i, layer_j), (layer_j, layer_i)):
            e = search_factor_like_symbolic(src["cover"].symbolic(),
                                            dst["cover"].symbolic())
            if e is not None:
                return FactorDecision(
                    relation="FSE-finite-to-one",
                    direction=(src["layer"], dst["layer"]),
                    evidence={"kind": "symbolic", "matrix": e.entries.tolist(),
                              "state_map": list(e.state_map)})
        for src, dst, a, b in ((layer_i, layer_j, ti, tj), (layer_j, layer_i, tj, ti)):
            e = search_factor_like_incidence(a, b)
            if e is not None:
                return FactorDecision(
                    relation="FSE-finite-to-one",
                    direction=(src["layer"], dst["layer"]),
                    evidence={"kind": "incidence", "matrix": e.entries.tolist(),
                              "state_map": list(e.state_map),
                              "symbolic_intertwiner": "none in either direction"})
        return FactorDecision(relation="none-found",
                              direction=(layer_i["layer"], layer_j["layer"]),
                              evidence={"note": "equal entropies, no factor-like "
                                                "matrix in either direction"})

    src, dst = (layer_i, layer_j) if hi > hj else (layer_j, layer_i)
    t_src = src["cover"].incidence()
    t_dst = dst["cover"].incidence()
    evidence = {}
    if solution is not None:
        t_sol = solution["matrix"]
        h_sol = solution["entropy"]
        evidence["h_source_vs_solution"] = (
            "equal" if abs(src["entropy"] - h_sol) <= tol
            else ("below" if src["entropy"] < h_sol else "above"))
        f = search_factor_like_incidence(t_src, t_sol)
        evidence["incidence_factor_like_to_solution"] = (
            f.entries.tolist() if f is not None else None)
        evidence["embedding_into_solution"] = embedding_condition(t_src, t_sol)
    if factor_periodic_condition(t_src, t_dst):
        n_max = default_n_max(t_src, t_dst)
        evidence.update({
            "periodic_condition": True,
            "n_max": n_max,
            "target_fixed_points": periodic_counts(t_dst, 1),
            "target_periods_nonempty": [n for n in range(1, n_max + 1)
                                        if periodic_counts(t_dst, n) > 0],
        })
        return FactorDecision(relation="infinite-to-one-exists",
                              direction=(src["layer"], dst["layer"]),
                              evidence=evidence)
    if embedding_condition(t_dst, t_src):
        evidence["embedding"] = "lower-entropy cover embeds into higher"
        return FactorDecision(relation="embedding-exists",
                              direction=(dst["layer"], src["layer"]),
                              evidence=evidence)
    evidence["periodic_condition"] = False
    return FactorDecision(relation="none-found",
                          direction=(src["layer"], dst["layer"]),
                          evidence=evidence)
