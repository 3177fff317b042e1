"""Perron-Frobenius machinery: spectral radii, stochasticization, maximal
measures, entropies and Hausdorff dimensions.

All entropies are in nats.  The dimension of a two-sided shift with alphabet
size m and maximal-measure entropy h is 2h/log m (cylinder diameters decay
like m^-(k+1) on each side, so the one-sided value doubles).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NoConvergence, NotIrreducible
from .shifts import TransitionMatrix, strongly_connected_components

EPS_SPECTRAL = 1e-12
MAX_ITER = 100_000


def spectral_tolerance(default=EPS_SPECTRAL):
    env = os.environ.get("MCNN_TOLERANCE")
    if not env:
        return default
    try:
        value = float(env)
    except ValueError:
        raise ValueError("MCNN_TOLERANCE must be a float, got %r" % env)
    if not 0 < value < 1:
        raise ValueError("MCNN_TOLERANCE must be in (0, 1)")
    return value


def _as_array(b):
    if isinstance(b, TransitionMatrix):
        return np.asarray(b.matrix, dtype=float)
    a = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    if (a < 0).any():
        raise ValueError("matrix must be nonnegative")
    return a


def is_irreducible(b):
    a = _as_array(b)
    if a.shape[0] == 1:
        return bool(a[0, 0] > 0)
    comps = strongly_connected_components(a > 0)
    return len(comps) == 1


@dataclass(frozen=True)
class PerronData:
    rho: float
    right: np.ndarray
    left: np.ndarray


def _power_right(a, eps, max_iter):
    """Collatz-Wielandt bracket on the +I shift (handles periodic matrices)."""
    n = a.shape[0]
    shifted = a + np.eye(n)
    v = np.ones(n)
    for _ in range(max_iter):
        w = shifted @ v
        quot = w / v
        lo, hi = quot.min(), quot.max()
        v = w / w.sum()
        if hi - lo <= eps * max(1.0, hi):
            return hi - 1.0, v
    raise NoConvergence("power iteration did not converge in %d iterations" % max_iter)


def perron(b, eps=None, max_iter=MAX_ITER):
    """Spectral radius with positive right/left eigenvectors.

    Deterministic all-ones start; left vector normalized to sum 1 and right
    vector scaled so that left . right = 1.
    """
    a = _as_array(b)
    if not is_irreducible(a):
        raise NotIrreducible("perron requires an irreducible matrix")
    eps = spectral_tolerance() if eps is None else eps
    rho, r = _power_right(a, eps * 1e-2, max_iter)
    _, l = _power_right(a.T, eps * 1e-2, max_iter)
    l = l / l.sum()
    r = r / float(l @ r)
    return PerronData(rho=float(rho), right=r, left=l)


def stochasticize(b, eps=None):
    """(1/rho) D^-1 B D with D = diag(right Perron vector); rows sum to 1."""
    a = _as_array(b)
    data = perron(a, eps=eps)
    d = data.right
    p = a * d[None, :] / d[:, None] / data.rho
    p /= p.sum(axis=1, keepdims=True)
    return p


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary pair (p, P); ``side`` marks right- or left-sided use."""

    stationary: np.ndarray
    kernel: np.ndarray
    side: str = "right"
    state_labels: tuple = None

    def cylinder(self, word):
        """Measure of the cylinder on a state-index word."""
        if not len(word):
            return 1.0
        val = float(self.stationary[word[0]])
        for a, b in zip(word, word[1:]):
            val *= float(self.kernel[a, b])
        return val


def maximal_measure(t, side="right", eps=None):
    """Parry measure of an irreducible transition matrix.

    The left-sided companion is the same construction on the transpose.
    """
    a = _as_array(t)
    labels = t.labels if isinstance(t, TransitionMatrix) else None
    if side == "left":
        a = a.T
    elif side != "right":
        raise ValueError("side must be 'right' or 'left'")
    if not is_irreducible(a):
        raise NotIrreducible("maximal measure needs an irreducible matrix")
    data = perron(a, eps=eps)
    kernel = a * data.right[None, :] / data.right[:, None] / data.rho
    kernel /= kernel.sum(axis=1, keepdims=True)
    p = data.left * data.right
    p = p / p.sum()
    return MarkovMeasure(stationary=p, kernel=kernel, side=side, state_labels=labels)


def markov_entropy(m: MarkovMeasure):
    """-sum_i p_i sum_j P_ij log P_ij, in nats."""
    p, k = m.stationary, m.kernel
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(k > 0, k * np.log(k), 0.0)
    return float(-(p @ plogp.sum(axis=1)))


def topological_entropy(t, eps=None):
    """log of the dominant spectral radius; -inf for the empty shift."""
    from .errors import EmptyShift

    if isinstance(t, TransitionMatrix):
        try:
            trimmed, _ = t.trim()
        except EmptyShift:
            return float("-inf")
        a = np.asarray(trimmed.matrix, dtype=float)
    else:
        a = _as_array(t)
    best = 0.0
    for comp in strongly_connected_components(a > 0):
        sub = a[np.ix_(comp, comp)]
        if len(comp) == 1 and sub[0, 0] == 0:
            continue
        best = max(best, perron(sub, eps=eps).rho)
    if best <= 0.0:
        return float("-inf")
    return math.log(best)


@dataclass(frozen=True)
class DimensionResult:
    entropy: float
    alphabet_size: int
    dimension: float


def hausdorff_dimension(h, alphabet_size):
    """Two-sided dimension 2h/log m.

    One-sided cylinders of length k+1 have diameter m^-(k+1) up to a bounded
    constant; the constant cancels in the dimension, and the two one-sided
    contributions double the ratio h/log m.
    """
    if alphabet_size < 2:
        raise ValueError("alphabet size must be >= 2")
    if h < 0:
        raise ValueError("entropy must be nonnegative")
    return DimensionResult(entropy=float(h), alphabet_size=int(alphabet_size),
                           dimension=2.0 * h / math.log(alphabet_size))


def char_poly(matrix):
    """Exact integer characteristic polynomial, leading coefficient first.

    Faddeev-LeVerrier over fractions; input entries must be integers.
    """
    a = [[Fraction(int(v)) for v in row] for row in np.asarray(matrix).tolist()]
    n = len(a)
    coeffs = [Fraction(1)]
    m = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        for i in range(n):
            m[i][i] += coeffs[-1]
        m = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)]
             for i in range(n)]
        c = -sum(m[i][i] for i in range(n)) / k
        coeffs.append(c)
    out = []
    for c in coeffs:
        assert c.denominator == 1
        out.append(int(c))
    return out


def poly_gcd(p, q):
    """Monic gcd of two integer/fraction coefficient polynomials over Q."""

    def norm(poly):
        poly = [Fraction(c) for c in poly]
        while poly and poly[0] == 0:
            poly.pop(0)
        return poly

    def rem(num, den):
        num = num[:]
        while len(num) >= len(den) and num:
            factor = num[0] / den[0]
            for i in range(len(den)):
                num[i] -= factor * den[i]
            num.pop(0)
            while num and num[0] == 0:
                num.pop(0)
        return num

    a, b = norm(p), norm(q)
    while b:
        a, b = b, rem(a, b)
    if not a:
        return []
    return [c / a[0] for c in a]


def poly_eval(poly, x):
    val = 0.0
    for c in poly:
        val = val * x + float(c)
    return val


def entropies_equal(ta, tb, ha, hb, tol=1e-9):
    """Numerical tie plus exact confirmation that the dominant eigenvalues
    share an algebraic factor of the two characteristic polynomials."""
    if abs(ha - hb) > tol:
        return False
    g = poly_gcd(char_poly(ta), char_poly(tb))
    if not g or len(g) == 1:
        return False
    rho = (math.exp(ha) + math.exp(hb)) / 2.0
    return abs(poly_eval(g, rho)) <= 1e-6 * max(1.0, rho ** (len(g) - 1))


def cylinder_entropy_estimates(m: MarkovMeasure, t: TransitionMatrix, n_max=8):
    """H_n/n for n = 1..n_max, where H_n sums -mu log mu over length-n
    cylinders; decreases toward the closed-form entropy for Markov measures."""
    mat = t.matrix
    out = []
    words = [(i,) for i in range(t.n_states)]
    for n in range(1, n_max + 1):
        h = 0.0
        for w in words:
            mu = m.cylinder(w)
            if mu > 0:
                h -= mu * math.log(mu)
        out.append(h / n)
        words = [w + (j,) for w in words for j in range(t.n_states)
                 if mat[w[-1], j]]
    return out
