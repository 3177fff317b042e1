"""Sofic (hidden Markov) measures: linear representations of push-forwards,
fiber block matrices with pseudo vertices, the order-k Markov condition and
the uniform-factor spectral test.

The blocks N are built from the unweighted 0/1 transitions of the source SFT;
a ray family {V_J} intertwining them certifies that the push-forward of the
source's maximal measure is Markov with weighted transition matrix M, whose
stochasticization is the measure's kernel.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import SupportMismatch
from .factors import OneBlockMap
from .shifts import TransitionMatrix
from .spectral import MarkovMeasure, perron, topological_entropy

EPS_MEASURE = 1e-9


@dataclass(frozen=True)
class LinearRepresentation:
    """Triple (x, {P_a}, y) with cylinder values x P_{i0} ... P_{in-1} y."""

    x: np.ndarray
    kernels: dict
    y: np.ndarray
    alphabet: tuple

    def cylinder(self, word):
        v = self.x
        for a in word:
            if a not in self.kernels:
                return 0.0
            v = v @ self.kernels[a]
        return float(v @ self.y)


def cylinder_probability(rep: LinearRepresentation, word):
    """x P_{i0} ... P_{in-1} y; the test oracle for measures on words."""
    return rep.cylinder(tuple(word))


def pushforward_representation(mu: MarkovMeasure, phi: OneBlockMap,
                               alphabet=None):
    """Linear representation of the push-forward of a Markov measure.

    The kernel for target letter j keeps exactly the columns of the source
    kernel landing in the fiber of j; x is the stationary vector and y the
    all-ones column.
    """
    n = len(mu.stationary)
    if len(phi.mapping) != n:
        raise SupportMismatch("one-block map must cover every source state")
    if alphabet is None:
        alphabet = tuple(sorted(set(phi.mapping)))
    kernels = {}
    for j in alphabet:
        mask = np.array([1.0 if phi.mapping[v] == j else 0.0 for v in range(n)])
        kernels[j] = mu.kernel * mask[None, :]
    return LinearRepresentation(x=np.asarray(mu.stationary, dtype=float),
                                kernels=kernels, y=np.ones(n), alphabet=alphabet)


@dataclass(frozen=True)
class BlockFamily:
    """0/1 fiber blocks N_{j1 j2}, padded square with pseudo vertices."""

    blocks: dict  # (j1, j2) -> m x m ndarray
    fibers: dict  # j -> tuple of source state indices
    size: int  # m, the max fiber size
    alphabet: tuple


def build_block_family(phi: OneBlockMap, t_x: TransitionMatrix):
    """N_{j1j2}(p, q) = T(p, q) over the fibers of j1, j2; zero rows/columns
    pad each block to the maximal fiber size (pseudo vertices at the tail)."""
    n = t_x.n_states
    if len(phi.mapping) != n:
        raise SupportMismatch("one-block map must cover every source state")
    alphabet = tuple(sorted(set(phi.mapping)))
    fibers = {j: tuple(q for q in range(n) if phi.mapping[q] == j)
              for j in alphabet}
    m = max(len(f) for f in fibers.values())
    blocks = {}
    for j1 in alphabet:
        for j2 in alphabet:
            b = np.zeros((m, m), dtype=np.int64)
            for r, p in enumerate(fibers[j1]):
                for c, q in enumerate(fibers[j2]):
                    b[r, c] = t_x.matrix[p, q]
            blocks[(j1, j2)] = b
    return BlockFamily(blocks=blocks, fibers=fibers, size=m, alphabet=alphabet)


@dataclass(frozen=True)
class MarkovCertificate:
    order: int
    words: tuple  # admissible k-words over the target alphabet
    rays: dict  # word -> ray (1 x m), first nonzero entry 1
    coefficients: dict  # (word, word') -> m
    transition: np.ndarray  # M over the k-words
    exact: bool


def _admissible_words(blocks, alphabet, k):
    """k-words whose block product is nonzero."""
    words = {}
    for w in itertools.product(alphabet, repeat=k):
        prod = None
        ok = True
        for a, b in zip(w, w[1:]):
            nb = blocks[(a, b)]
            prod = nb if prod is None else prod @ nb
            if prod is not None and not prod.any():
                ok = False
                break
        if k == 1:
            ok = any(blocks[(w[0], b)].any() for b in alphabet) or \
                any(blocks[(b, w[0])].any() for b in alphabet)
        if ok:
            words[w] = True
    return tuple(words)


def _left_perron_ray(m, eps=EPS_MEASURE):
    """Dominant left eigen-ray of a nonnegative matrix with its spectral
    radius estimate; exact over Q when the radius is a (small) integer.
    Returns (ray or None, rho, exact); ray is None for nilpotent input."""
    a = np.asarray(m, dtype=float)
    n = a.shape[0]
    if not a.any():
        return None, 0.0, False
    shifted = a.T + np.eye(n)
    v = np.ones(n)
    for _ in range(5000):
        w = shifted @ v
        s = w.sum()
        if s == 0:
            return None, 0.0, False
        v = w / s
    rho = float(v @ a.T @ v) / float(v @ v)
    if rho <= eps:
        return None, 0.0, False
    rho_int = round(rho)
    if abs(rho - rho_int) < 1e-7 and rho_int >= 1 and _is_integer_matrix(m):
        ray = _rational_left_kernel(m, rho_int)
        if ray is not None:
            return ray, float(rho_int), True
    v = np.where(np.abs(v) <= 1e-12, 0.0, v)
    nz = np.nonzero(v)[0]
    if len(nz) == 0:
        return None, rho, False
    return v / v[nz[0]], rho, False


def _is_integer_matrix(m):
    arr = np.asarray(m)
    return np.issubdtype(arr.dtype, np.integer) or np.allclose(arr, np.round(arr))


def _rational_left_kernel(m, rho):
    """Nonnegative left null vector of (M - rho I) over Q, or None."""
    arr = [[Fraction(int(round(v))) for v in row] for row in np.asarray(m).tolist()]
    n = len(arr)
    # solve x (M - rho I) = 0  <=>  (M^T - rho I) x^T = 0
    mat = [[arr[j][i] - (Fraction(rho) if i == j else 0) for j in range(n)]
           for i in range(n)]
    # Gaussian elimination to reduced row-echelon form
    pivots = []
    row = 0
    for col in range(n):
        sel = next((r for r in range(row, n) if mat[r][col] != 0), None)
        if sel is None:
            continue
        mat[row], mat[sel] = mat[sel], mat[row]
        inv = mat[row][col]
        mat[row] = [v / inv for v in mat[row]]
        for r in range(n):
            if r != row and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    x = [Fraction(0)] * n
    x[free[0]] = Fraction(1)
    for r, col in enumerate(pivots):
        x[col] = -sum(mat[r][c] * x[c] for c in free)
    if any(v < 0 for v in x):
        x = [-v for v in x]
    if any(v < 0 for v in x):
        return None
    nz = next((i for i, v in enumerate(x) if v != 0), None)
    if nz is None:
        return None
    x = [v / x[nz] for v in x]
    return np.array([float(v) for v in x])


def check_markov_condition(family: BlockFamily, k_max=4, eps=EPS_MEASURE):
    """Search for a ray family certifying the Markov condition.

    For k = 1..k_max: seed each admissible k-word's ray with the left Perron
    row of the block product around a cycle through it in the k-word graph
    (propagating to words off every cycle), then verify every proportionality
    constraint within ``eps``.  Returns the smallest-k certificate or None;
    absence means only that the bounded search failed.
    """
    for k in range(1, k_max + 1):
        cert = _try_order(family, k, eps)
        if cert is not None:
            return cert
    return None


def _word_graph(family: BlockFamily, k):
    words = _admissible_words(family.blocks, family.alphabet, k)
    edges = {}
    for w in words:
        for b in family.alphabet:
            nxt = w[1:] + (b,) if k > 1 else (b,)
            if nxt not in words:
                continue
            prod = _word_product(family, w + (b,))
            if prod.any():
                edges.setdefault(w, []).append(nxt)
    return words, edges


def _word_product(family, word):
    prod = None
    for a, b in zip(word, word[1:]):
        nb = family.blocks[(a, b)]
        prod = nb if prod is None else prod @ nb
    if prod is None:
        prod = np.eye(family.size, dtype=np.int64)
    return prod


def _simple_cycles_through(start, edges, cap=24):
    """Simple cycles through ``start`` (node sequences, start first and last)."""
    out = []
    stack = [(start, (start,))]
    while stack and len(out) < cap:
        node, path = stack.pop()
        for succ in sorted(edges.get(node, ())):
            if succ == start:
                out.append(path + (start,))
                if len(out) >= cap:
                    break
            elif succ not in path:
                stack.append((succ, path + (succ,)))
    return out


def _cycle_product(family, cyc):
    prod = np.eye(family.size, dtype=np.int64)
    for a, b in zip(cyc, cyc[1:]):
        prod = prod @ family.blocks[(a[-1], b[-1])]
    return prod


def _candidate_rays(family, words, edges, eps):
    """Per word: candidate rays from its simple cycles, dominant radius first
    and deduplicated."""
    cands = {}
    for w in words:
        seen = []
        for cyc in _simple_cycles_through(w, edges):
            ray, rho, exact = _left_perron_ray(_cycle_product(family, cyc), eps)
            if ray is None:
                continue
            if any(np.allclose(ray, r, atol=1e-9) for r, _, _ in seen):
                continue
            seen.append((ray, rho, exact))
        seen.sort(key=lambda t: (-t[1], tuple(np.round(t[0], 12))))
        cands[w] = seen
    return cands


def _try_order(family: BlockFamily, k, eps, max_attempts=200):
    """Seed one ray, propagate along the word graph, verify globally.

    A valid ray family is a left eigen-ray of every cycle product, so seeds
    come from cycle products (dominant candidates first); propagation along
    nonzero edges forces the rest, and leftover words fall back to their own
    candidates.  Backtracks over candidate choices up to ``max_attempts``.
    """
    words, edges = _word_graph(family, k)
    if not words:
        return None
    cands = _candidate_rays(family, words, edges, eps)
    roots = [w for w in words if cands[w]]
    if not roots:
        return None

    def propagate(assign):
        frontier = list(assign)
        while frontier:
            w = frontier.pop()
            for w2 in edges.get(w, ()):
                nxt = assign[w] @ family.blocks[(w[-1], w2[-1])]
                nxt = np.where(np.abs(nxt) <= eps, 0.0, nxt)
                nz = np.nonzero(nxt)[0]
                if len(nz) == 0:
                    continue  # zero coefficient carries no constraint
                ray = nxt / nxt[nz[0]]
                if w2 in assign:
                    if not np.allclose(assign[w2], ray, atol=1e-7):
                        return False
                else:
                    assign[w2] = ray
                    frontier.append(w2)
        return True

    attempts = [0]

    def search(assign, exact):
        if attempts[0] >= max_attempts:
            return None
        missing = [w for w in words if w not in assign and cands[w]]
        if not missing:
            if len(assign) < len(words):
                return None
            attempts[0] += 1
            return _finish(family, k, words, edges, assign, exact, eps)
        w = missing[0]
        for ray, _, was_exact in cands[w]:
            trial = dict(assign)
            trial[w] = ray
            if not propagate(trial):
                attempts[0] += 1
                continue
            res = search(trial, exact and was_exact)
            if res is not None:
                return res
        return None

    return search({}, True)


def _finish(family, k, words, edges, rays, exact, eps):
    coeffs = {}
    size = len(words)
    m = np.zeros((size, size))
    index = {w: i for i, w in enumerate(words)}
    for w in words:
        for w2 in edges.get(w, ()):
            lhs = rays[w] @ family.blocks[(w[-1], w2[-1])]
            ray2 = rays[w2]
            nz = np.nonzero(np.abs(ray2) > eps)[0]
            c = float(lhs[nz[0]] / ray2[nz[0]]) if len(nz) else 0.0
            if c < -eps:
                return None
            c = max(c, 0.0)
            if np.max(np.abs(lhs - c * ray2)) > eps * max(1.0, np.max(np.abs(lhs))):
                return None
            coeffs[(w, w2)] = c
            m[index[w], index[w2]] = c
    return MarkovCertificate(order=k, words=words, rays=dict(rays),
                             coefficients=coeffs, transition=m, exact=exact)


def measure_from_certificate(cert: MarkovCertificate):
    """Markov measure with kernel stoch(M) and its stationary vector."""
    m = cert.transition
    data = perron(m)
    kernel = m * data.right[None, :] / data.right[:, None] / data.rho
    kernel /= np.where(kernel.sum(axis=1, keepdims=True) == 0, 1.0,
                       kernel.sum(axis=1, keepdims=True))
    p = data.left * data.right
    p = p / p.sum()
    return MarkovMeasure(stationary=p, kernel=kernel, side="right",
                         state_labels=cert.words)


def uniform_factor_test(cert: MarkovCertificate, rho_source, rho_target,
                        tol=EPS_MEASURE):
    """Spectral uniformity criterion: the normalized certificate radius
    rho(M)/rho_source must equal rho_target/rho_source.

    Returns (uniform flag, normalized rho(M), ratio target/source,
    ratio source/target); both orientations are reported because the
    theorem's index convention is ambiguous.
    """
    h = topological_entropy(cert.transition) if cert.transition.any() else float("-inf")
    rho_m = math.exp(h) if h > float("-inf") else 0.0
    normalized = rho_m / rho_source
    ratio_ts = rho_target / rho_source
    ratio_st = rho_source / rho_target
    return (abs(normalized - ratio_ts) <= tol, normalized, ratio_ts, ratio_st)


def certificate_measure_matches_pushforward(cert, rep, length=8, tol=EPS_MEASURE):
    """Check that the certificate's Markov measure reproduces the linear
    representation's cylinder values on all words up to ``length``."""
    mu = measure_from_certificate(cert)
    k = cert.order
    index = {w: i for i, w in enumerate(cert.words)}
    alphabet = rep.alphabet

    def measure_word(word):
        if len(word) == 0:
            return 1.0
        if len(word) < k:
            # marginalize the k-word chain over completions
            total = 0.0
            for tail in itertools.product(alphabet, repeat=k - len(word)):
                w = tuple(word) + tail
                if w in index:
                    total += float(mu.stationary[index[w]])
            return total
        states = [tuple(word[i:i + k]) for i in range(len(word) - k + 1)]
        if any(s not in index for s in states):
            return 0.0
        return mu.cylinder([index[s] for s in states])

    worst = 0.0
    for n in range(1, length + 1):
        for word in itertools.product(alphabet, repeat=n):
            diff = abs(measure_word(word) - rep.cylinder(word))
            worst = max(worst, diff)
            if worst > tol:
                return False, worst
    return True, worst
