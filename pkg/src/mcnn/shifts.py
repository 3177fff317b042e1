"""Solution-space SFT, labeled layer graphs and right-resolving covers.

States of the solution-space transition matrix are the 2^n column patterns of
an n-layer network, ordered top = highest layer and sorted with "-" < "+"
(the ordering-matrix convention).  Projecting each column to one layer labels
every edge with an overlapping two-block; the subset construction turns the
labeled graph into a deterministic (right-resolving) cover of the layer's
sofic shift.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import EmptyShift, OracleLimit
from .templates import BasicSet, MINUS, PLUS, word_str

K_ORACLE = 18

# two-block alphabet: alpha_0 = --, alpha_1 = -+, alpha_2 = +-, alpha_3 = ++
ALPHAS = tuple(itertools.product((MINUS, PLUS), repeat=2))


def alpha_index(alpha):
    return 2 * (alpha[0] > 0) + (alpha[1] > 0)


def alpha_str(alpha):
    return word_str(alpha)


@dataclass(frozen=True)
class TransitionMatrix:
    """0/1 incidence matrix with descriptive state labels."""

    matrix: np.ndarray
    labels: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("transition matrix must be square")
        if not np.isin(m, (0, 1)).all():
            raise ValueError("transition matrix entries must be 0/1")
        if len(self.labels) != m.shape[0]:
            raise ValueError("one label per state required")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_states(self):
        return self.matrix.shape[0]

    def is_essential(self):
        m = self.matrix
        return bool((m.sum(axis=1) > 0).all() and (m.sum(axis=0) > 0).all())

    def trim(self):
        """Iteratively drop states with no in- or out-edges.

        Returns (trimmed TransitionMatrix, kept index tuple); raises
        EmptyShift if nothing survives.
        """
        keep = list(range(self.n_states))
        m = self.matrix
        while True:
            sub = m[np.ix_(keep, keep)]
            alive = [keep[i] for i in range(len(keep))
                     if sub[i].sum() > 0 and sub[:, i].sum() > 0]
            if alive == keep:
                break
            keep = alive
            if not keep:
                raise EmptyShift("all states trimmed")
        sub = m[np.ix_(keep, keep)]
        return TransitionMatrix(sub, tuple(self.labels[i] for i in keep)), tuple(keep)


def build_transition_matrix(basic_set: BasicSet):
    """Transition matrix of the solution space over all 2^n column states.

    T(p, q) = 1 iff the two-column pattern with left column p and right
    column q lies in the basic set.  The matrix is *not* trimmed: the covers
    are determined from the full labeled graph (transient states matter for
    the cover sizes), and transient states are harmless for entropy and
    periodic-point counts.
    """
    shape = basic_set.shape
    if shape is None:
        raise EmptyShift("empty basic set")
    n_rows, n_cols = shape
    if n_cols != 2:
        raise ValueError("need 2-column patterns (right-neighbour templates)")
    states = list(itertools.product((MINUS, PLUS), repeat=n_rows))
    index = {s: i for i, s in enumerate(states)}
    m = np.zeros((len(states), len(states)), dtype=np.int64)
    for p in basic_set.patterns:
        left = tuple(row[0] for row in p.cells)
        right = tuple(row[1] for row in p.cells)
        m[index[left], index[right]] = 1
    return TransitionMatrix(m, tuple(states))


class SymbolicMatrix:
    """Matrix over formal sums of two-block symbols (empty dict = the
    empty-set entry).  Supports multiplication by integer matrices on either
    side, which is what the factor-like searches need."""

    def __init__(self, entries):
        self.entries = [[dict(cell) for cell in row] for row in entries]

    @property
    def shape(self):
        return (len(self.entries), len(self.entries[0]) if self.entries else 0)

    def __eq__(self, other):
        if not isinstance(other, SymbolicMatrix) or self.shape != other.shape:
            return NotImplemented if not isinstance(other, SymbolicMatrix) else False
        for r1, r2 in zip(self.entries, other.entries):
            for c1, c2 in zip(r1, r2):
                if {k: v for k, v in c1.items() if v} != {k: v for k, v in c2.items() if v}:
                    return False
        return True

    def mul_int_right(self, a):
        """self * A for an integer matrix A (symbol coefficients add)."""
        a = np.asarray(a, dtype=np.int64)
        rows, mid = self.shape
        if a.shape[0] != mid:
            raise ValueError("shape mismatch")
        out = [[{} for _ in range(a.shape[1])] for _ in range(rows)]
        for i in range(rows):
            for k in range(mid):
                cell = self.entries[i][k]
                if not cell:
                    continue
                for j in range(a.shape[1]):
                    if a[k, j]:
                        for sym, c in cell.items():
                            out[i][j][sym] = out[i][j].get(sym, 0) + c * int(a[k, j])
        return SymbolicMatrix(out)

    def mul_int_left(self, a):
        """A * self for an integer matrix A."""
        a = np.asarray(a, dtype=np.int64)
        mid, cols = self.shape
        if a.shape[1] != mid:
            raise ValueError("shape mismatch")
        out = [[{} for _ in range(cols)] for _ in range(a.shape[0])]
        for i in range(a.shape[0]):
            for k in range(mid):
                if not a[i, k]:
                    continue
                for j in range(cols):
                    for sym, c in self.entries[k][j].items():
                        out[i][j][sym] = out[i][j].get(sym, 0) + c * int(a[i, k])
        return SymbolicMatrix(out)

    def row_symbols(self, i):
        syms = {}
        for cell in self.entries[i]:
            for sym, c in cell.items():
                if c:
                    syms[sym] = syms.get(sym, 0) + c
        return syms

    def is_right_resolving(self):
        rows, _ = self.shape
        for i in range(rows):
            seen = set()
            for cell in self.entries[i]:
                for sym, c in cell.items():
                    if c == 0:
                        continue
                    if c > 1 or sym in seen:
                        return False
                    seen.add(sym)
        return True

    def render(self):
        rows, cols = self.shape
        out = []
        for i in range(rows):
            row = []
            for j in range(cols):
                cell = {k: v for k, v in self.entries[i][j].items() if v}
                if not cell:
                    row.append(".")
                else:
                    row.append("+".join(
                        (("%d*" % c) if c != 1 else "") + alpha_str(sym)
                        for sym, c in sorted(cell.items())))
            out.append(row)
        return out

    def __repr__(self):
        return "SymbolicMatrix(%r)" % (self.render(),)


@dataclass(frozen=True)
class Presentation:
    """Labeled graph presenting a layer shift.

    Each edge carries the overlapping two-block label; the derived single
    letter of an edge is the right letter of its block, and every state has a
    well-defined letter (the layer projection).  ``members`` records, for
    covers, which raw states each cover state groups.
    """

    states: tuple
    letters: tuple
    edges: tuple  # (src_idx, dst_idx, alpha) triples
    deterministic: bool
    provenance: str = ""
    members: tuple = None

    def __post_init__(self):
        for s, d, a in self.edges:
            if self.letters[d] != a[1] or self.letters[s] != a[0]:
                raise ValueError("edge label inconsistent with state letters")

    @property
    def n_states(self):
        return len(self.states)

    def alphabet(self):
        return tuple(sorted({a for _, _, a in self.edges}))

    def letter_alphabet(self):
        return tuple(sorted(set(self.letters)))

    def incidence(self):
        m = np.zeros((self.n_states, self.n_states), dtype=np.int64)
        for s, d, _ in self.edges:
            m[s, d] = 1
        return TransitionMatrix(m, self.states)

    def symbolic(self):
        ent = [[{} for _ in range(self.n_states)] for _ in range(self.n_states)]
        for s, d, a in self.edges:
            ent[s][d][a] = ent[s][d].get(a, 0) + 1
        return SymbolicMatrix(ent)

    def letter_successors(self):
        """per-state dict: letter -> set of successor state indices."""
        succ = [dict() for _ in range(self.n_states)]
        for s, d, a in self.edges:
            succ[s].setdefault(a[1], set()).add(d)
        return succ

    def trim(self):
        """Essential sub-presentation (same letters/labels)."""
        keep = set(range(self.n_states))
        while True:
            outs = {s for s, d, _ in self.edges if s in keep and d in keep}
            ins = {d for s, d, _ in self.edges if s in keep and d in keep}
            alive = {q for q in keep if q in outs and q in ins}
            if alive == keep:
                break
            keep = alive
            if not keep:
                raise EmptyShift("presentation trimmed to nothing")
        order = sorted(keep)
        remap = {q: i for i, q in enumerate(order)}
        return Presentation(
            states=tuple(self.states[q] for q in order),
            letters=tuple(self.letters[q] for q in order),
            edges=tuple((remap[s], remap[d], a) for s, d, a in self.edges
                        if s in keep and d in keep),
            deterministic=self.deterministic,
            provenance=self.provenance + "|trimmed" if self.provenance else "trimmed",
            members=None if self.members is None
            else tuple(self.members[q] for q in order))


def layer_labeled_graph(t: TransitionMatrix, layer: int):
    """Labeled graph (G, L^(layer)) of a solution-space matrix.

    ``layer`` is 1-based counted from the bottom (input side); state labels
    of ``t`` are column tuples ordered top = highest layer.
    """
    n_rows = len(t.labels[0])
    if not 1 <= layer <= n_rows:
        raise ValueError("layer out of range")
    row = n_rows - layer  # tuple index of this layer inside a column
    letters = tuple(lab[row] for lab in t.labels)
    edges = []
    for p in range(t.n_states):
        for q in range(t.n_states):
            if t.matrix[p, q]:
                edges.append((p, q, (letters[p], letters[q])))
    return Presentation(states=t.labels, letters=letters, edges=tuple(edges),
                        deterministic=False, provenance="layer%d" % layer)


def subset_construction(g: Presentation):
    """Determinize a labeled graph into a right-resolving cover.

    States are the nonempty subsets reachable from the full state set by
    two-block labels, trimmed essential, canonically ordered by (state
    letter, subset contents); the subset membership map is retained in
    ``members``.
    """
    full = frozenset(range(g.n_states))
    by_alpha = {}
    for s, d, a in g.edges:
        by_alpha.setdefault(a, []).append((s, d))

    def step(subset, alpha):
        return frozenset(d for s, d in by_alpha.get(alpha, ()) if s in subset)

    seen = {full}
    frontier = [full]
    trans = {}
    while frontier:
        cur = frontier.pop()
        for alpha in by_alpha:
            nxt = step(cur, alpha)
            if not nxt:
                continue
            trans[(cur, alpha)] = nxt
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)

    # trim to essential on subset states
    alive = set(seen)
    while True:
        outs = {s for (s, _), d in trans.items() if s in alive and d in alive}
        ins = {d for (s, _), d in trans.items() if s in alive and d in alive}
        nxt_alive = {q for q in alive if q in outs and q in ins}
        if nxt_alive == alive:
            break
        alive = nxt_alive
    if not alive:
        raise EmptyShift("cover empty after trimming")

    def state_letter(sub):
        ls = {g.letters[q] for q in sub}
        assert len(ls) == 1, "cover states must be letter-pure after trimming"
        return next(iter(ls))

    order = sorted(alive, key=lambda sub: (state_letter(sub), tuple(sorted(sub))))
    index = {sub: i for i, sub in enumerate(order)}
    letters = [state_letter(sub) for sub in order]
    edges = tuple((index[s], index[d], a) for (s, a), d in sorted(
        trans.items(), key=lambda kv: (index.get(kv[0][0], -1), kv[0][1]))
        if s in alive and d in alive)
    states = tuple("{" + ",".join(word_str(g.states[q]) if isinstance(g.states[q], tuple)
                                  else str(g.states[q]) for q in sorted(sub)) + "}"
                   for sub in order)
    return Presentation(states=states, letters=tuple(letters), edges=edges,
                        deterministic=True,
                        provenance=(g.provenance + "|cover") if g.provenance else "cover",
                        members=tuple(tuple(sorted(sub)) for sub in order))


def vertex_presentation(t: TransitionMatrix):
    """View an SFT as a labeled graph over its own states.

    Every state gets a distinct letter (its index), so words coincide with
    paths; used for word/fractal computations on covers as vertex shifts.
    """
    letters = tuple(range(t.n_states))
    edges = tuple((p, q, (p, q)) for p in range(t.n_states)
                  for q in range(t.n_states) if t.matrix[p, q])
    return Presentation(states=t.labels, letters=letters, edges=edges,
                        deterministic=True, provenance="vertex")


@dataclass(frozen=True)
class WordCount:
    k: int
    count: int


def _letter_automaton(p: Presentation):
    """Letter-deterministic subset automaton pieces for a trimmed presentation."""
    succ = p.letter_successors()
    letters = p.letter_alphabet()
    starts = {a: frozenset(q for q in range(p.n_states) if p.letters[q] == a)
              for a in letters}

    def step(subset, a):
        out = set()
        for q in subset:
            out |= succ[q].get(a, set())
        return frozenset(out)

    return letters, starts, step


def count_words(p: Presentation, k: int, k_oracle: int = K_ORACLE):
    """Number of distinct label words of length ``k`` of the presented shift.

    Counts label sequences, not paths, so it is exact for sofic shifts with
    multiple presentations of one word.  The presentation is trimmed first so
    that finite words are exactly the factors of bi-infinite sequences.
    """
    if k > k_oracle:
        raise OracleLimit("k=%d exceeds oracle bound %d" % (k, k_oracle))
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return WordCount(0, 1)
    try:
        pt = p.trim()
    except EmptyShift:
        return WordCount(k, 0)
    letters, starts, step = _letter_automaton(pt)
    memo = {}

    def rec(subset, rem):
        if rem == 0:
            return 1
        key = (subset, rem)
        if key not in memo:
            total = 0
            for a in letters:
                nxt = step(subset, a)
                if nxt:
                    total += rec(nxt, rem - 1)
            memo[key] = total
        return memo[key]

    total = sum(rec(starts[a], k - 1) for a in letters if starts[a])
    return WordCount(k, total)


def enumerate_words(p: Presentation, k: int):
    """All distinct label words of length k, lexicographic in letter order."""
    if k == 0:
        return [()]
    try:
        pt = p.trim()
    except EmptyShift:
        return []
    letters, starts, step = _letter_automaton(pt)
    out = []

    def rec(prefix, subset):
        if len(prefix) == k:
            out.append(tuple(prefix))
            return
        for a in letters:
            nxt = step(subset, a)
            if nxt:
                prefix.append(a)
                rec(prefix, nxt)
                prefix.pop()

    for a in letters:
        if starts[a]:
            rec([a], starts[a])
    return out


def presentation_text(pres: Presentation):
    """Plain-text graph dump of a presentation: states, letters, labeled edges."""
    lines = ["states %d" % pres.n_states]
    for i, (label, letter) in enumerate(zip(pres.states, pres.letters)):
        lines.append("state %d %s letter %s" % (
            i, label, "+" if letter in (PLUS,) else
            ("-" if letter in (MINUS,) else str(letter))))
    for s, d, a in pres.edges:
        lines.append("edge %d %d block %s" % (
            s, d, word_str(a) if set(a) <= {MINUS, PLUS} else str(a)))
    return "\n".join(lines) + "\n"


def matrix_text(t: TransitionMatrix):
    """Plain-text matrix dump with state labels."""
    lines = []
    for label, row in zip(t.labels, t.matrix.tolist()):
        name = word_str(label) if isinstance(label, tuple) and \
            set(label) <= {MINUS, PLUS} else str(label)
        lines.append("%s  %s" % (name, " ".join(str(v) for v in row)))
    return "\n".join(lines) + "\n"


def int_matrix_power_trace(m, n):
    """trace(m^n) with exact integer arithmetic."""
    size = len(m)
    cur = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    base = [[int(v) for v in row] for row in m]
    for _ in range(n):
        cur = [[sum(cur[i][t] * base[t][j] for t in range(size))
                for j in range(size)] for i in range(size)]
    return sum(cur[i][i] for i in range(size))


def periodic_counts(t: TransitionMatrix, n: int):
    """|P_n| = trace(T^n), exact."""
    if n < 1 or n > 30:
        raise ValueError("period must be in 1..30")
    return int_matrix_power_trace(t.matrix.tolist(), n)


def strongly_connected_components(matrix):
    """Kosaraju SCC on a 0/1 adjacency matrix; returns list of index lists."""
    m = np.asarray(matrix)
    n = m.shape[0]
    order = []
    seen = [False] * n

    def dfs(start, adj, hook):
        stack = [(start, iter(adj[start]))]
        seen[start] = True
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                hook(node)

    fwd = [list(np.nonzero(m[i])[0]) for i in range(n)]
    for i in range(n):
        if not seen[i]:
            dfs(i, fwd, order.append)
    bwd = [list(np.nonzero(m[:, i])[0]) for i in range(n)]
    seen = [False] * n
    comps = []
    for i in reversed(order):
        if not seen[i]:
            comp = []
            dfs(i, bwd, comp.append)
            comps.append(sorted(comp))
    return comps


def graph_period(matrix, component):
    """gcd of cycle lengths within one strongly connected component."""
    import math

    m = np.asarray(matrix)
    comp = set(component)
    start = component[0]
    level = {start: 0}
    frontier = [start]
    g = 0
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.nonzero(m[u])[0]:
                if v not in comp:
                    continue
                if v in level:
                    g = math.gcd(g, level[u] + 1 - level[v])
                else:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    return abs(g)


def structure_flags(t: TransitionMatrix):
    """{irreducible, mixing, period} of an essential transition matrix."""
    comps = strongly_connected_components(t.matrix)
    irreducible = len(comps) == 1 and (t.n_states > 1 or bool(t.matrix[0, 0]))
    if not irreducible:
        return {"irreducible": False, "mixing": False, "period": 0}
    period = graph_period(t.matrix, comps[0])
    return {"irreducible": True, "mixing": period == 1, "period": period}
