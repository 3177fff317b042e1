"""Network templates, mosaic inequalities and basic sets of local patterns.

A cell of a one-dimensional two-layer network is in mosaic state +1 when

    a - 1 + z > -(alpha . v + beta . w)

and in state -1 when

    a - 1 - z > alpha . v + beta . w,

where ``a`` is the center feedback weight, ``alpha`` the off-center feedback
weights applied to the neighbouring outputs ``v``, and ``beta`` the control
weights applied to the inputs ``w``.  Evaluating both inequalities over all
sign assignments yields the basic set of admissible local patterns; the
parameter space splits into finitely many regions on which that set is
constant.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .errors import BoundaryParameter, DegenerateTemplate, EmptyComposition

EPS_BOUNDARY = 1e-9

MINUS, PLUS = -1, 1
LETTERS = (MINUS, PLUS)


def letter_str(v):
    return "+" if v > 0 else "-"


def word_str(letters):
    return "".join(letter_str(v) for v in letters)


@dataclass(frozen=True)
class LayerTemplate:
    """Feedback/control template of one layer.

    ``feedback`` and ``control`` have ``2d+1`` entries ordered from offset
    ``-d`` to ``+d``; an all-zero control vector marks a layer without input.
    """

    d: int
    feedback: tuple
    control: tuple
    threshold: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("neighborhood radius d must be >= 1")
        if len(self.feedback) != 2 * self.d + 1 or len(self.control) != 2 * self.d + 1:
            raise ValueError("feedback and control need exactly 2d+1 entries")
        object.__setattr__(self, "feedback", tuple(float(x) for x in self.feedback))
        object.__setattr__(self, "control", tuple(float(x) for x in self.control))
        object.__setattr__(self, "threshold", float(self.threshold))

    @classmethod
    def smcnn(cls, a, a_r, z, b=0.0, b_r=0.0):
        """Simplified template: right neighbour only (a_{-1} = b_{-1} = 0)."""
        return cls(d=1, feedback=(0.0, a, a_r), control=(0.0, b, b_r), threshold=z)

    @property
    def center(self):
        return self.feedback[self.d]

    @property
    def has_input(self):
        return any(x != 0.0 for x in self.control)

    def support_offsets(self):
        """Offsets that can influence the inequalities (center always does)."""
        offs = {0}
        for k in range(-self.d, self.d + 1):
            if k != 0 and self.feedback[self.d + k] != 0.0:
                offs.add(k)
            if self.control[self.d + k] != 0.0:
                offs.add(k)
        return tuple(sorted(offs))


@dataclass(frozen=True)
class NetworkTemplate:
    """Ordered layers, bottom (input side) first; layers >= 2 take the
    previous layer's output as input."""

    layers: tuple

    def __post_init__(self):
        if not self.layers:
            raise ValueError("need at least one layer")
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def n_layers(self):
        return len(self.layers)


@dataclass(frozen=True)
class LocalPattern:
    """Rows of +-1 letters, top row = highest layer."""

    cells: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.cells)
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("pattern rows must be nonempty and equal length")
        if any(v not in (MINUS, PLUS) for r in rows for v in r):
            raise ValueError("pattern entries must be +-1")
        object.__setattr__(self, "cells", rows)

    @property
    def shape(self):
        return (len(self.cells), len(self.cells[0]))

    def __str__(self):
        return "/".join(word_str(row) for row in self.cells)


@dataclass(frozen=True)
class BasicSet:
    """Finite set of same-shape local patterns plus boundary bookkeeping."""

    patterns: frozenset
    boundary_notes: tuple = ()

    def __post_init__(self):
        pats = frozenset(self.patterns)
        shapes = {p.shape for p in pats}
        if len(shapes) > 1:
            raise ValueError("patterns must share one shape")
        object.__setattr__(self, "patterns", pats)
        object.__setattr__(self, "boundary_notes", tuple(self.boundary_notes))

    @property
    def shape(self):
        for p in self.patterns:
            return p.shape
        return None

    def sorted_patterns(self):
        return sorted(self.patterns, key=lambda p: p.cells)

    def __len__(self):
        return len(self.patterns)

    def __contains__(self, pattern):
        return pattern in self.patterns

    def __str__(self):
        return "{" + ", ".join(str(p) for p in self.sorted_patterns()) + "}"


def _margin(t: LayerTemplate, center, out_row, in_row, offsets):
    """Signed margin of the mosaic inequality; > 0 means admissible."""
    drive = 0.0
    for col, k in enumerate(offsets):
        if k != 0:
            drive += t.feedback[t.d + k] * out_row[col]
        if in_row is not None:
            drive += t.control[t.d + k] * in_row[col]
    base = t.center - 1.0
    if center == PLUS:
        return (base + t.threshold) + drive
    return (base - t.threshold) - drive


def _window_candidates(t: LayerTemplate, has_input):
    """(center, out_row, in_row) triples over the support window."""
    offsets = t.support_offsets()
    center_col = offsets.index(0)
    out = []
    for fill in itertools.product(LETTERS, repeat=len(offsets) - 1):
        for center in LETTERS:
            out_row = fill[:center_col] + (center,) + fill[center_col:]
            if has_input:
                for in_row in itertools.product(LETTERS, repeat=len(offsets)):
                    out.append((center, out_row, in_row))
            else:
                out.append((center, out_row, None))
    return offsets, out


def layer_admissible_patterns(t: LayerTemplate, has_input=None, boundary="include",
                              eps=EPS_BOUNDARY):
    """Evaluate the mosaic inequalities of one layer over every sign choice.

    Patterns are restricted to the template's support offsets (for the
    simplified right-neighbour templates this gives 1x2 / 2x2 patterns).  A margin inside ``eps`` of zero is a partition
    boundary: with ``boundary="include"`` the "+"-inequality is closed (the
    pattern is kept) and the "-"-inequality stays strict, and a note is
    recorded; with ``boundary="strict"`` BoundaryParameter is raised.
    """
    if has_input is None:
        has_input = t.has_input
    if boundary not in ("include", "strict"):
        raise ValueError("boundary must be 'include' or 'strict'")

    offsets, candidates = _window_candidates(t, has_input)
    patterns = []
    notes = []
    for center, out_row, in_row in candidates:
        m = _margin(t, center, out_row, in_row, offsets)
        keep = m > eps
        if abs(m) <= eps:
            note = "boundary margin %.3e for pattern %s (center %s)" % (
                m, word_str(out_row) + ("/" + word_str(in_row) if in_row else ""),
                letter_str(center))
            if boundary == "strict":
                raise BoundaryParameter(note)
            keep = center == PLUS
            notes.append(note)
        if not keep:
            continue
        rows = (out_row,) if in_row is None else (out_row, in_row)
        # top row = output, bottom = input
        patterns.append(LocalPattern(rows))
    return BasicSet(frozenset(patterns), tuple(notes))


def compose_network(basic_sets, allow_empty=False):
    """Stack per-layer patterns; layer-(l) input row must equal layer-(l-1)
    output row.  Rows of the result run top = highest layer."""
    if not basic_sets:
        raise ValueError("need at least one layer basic set")
    widths = {bs.shape[1] for bs in basic_sets if bs.shape}
    if len(widths) > 1:
        raise ValueError("layer pattern widths differ; cannot compose")

    first = basic_sets[0]
    if first.shape and first.shape[0] != 1:
        raise ValueError("layer 1 patterns must be single-row (no input)")
    stacks = [(p.cells[0],) for p in first.patterns]
    for bs in basic_sets[1:]:
        if bs.shape and bs.shape[0] != 2:
            raise ValueError("layers above the first need output-over-input patterns")
        by_input = {}
        for p in bs.patterns:
            out_row, in_row = p.cells
            by_input.setdefault(in_row, []).append(out_row)
        stacks = [(out,) + stack
                  for stack in stacks
                  for out in by_input.get(stack[0], [])]

    notes = tuple(n for bs in basic_sets for n in bs.boundary_notes)
    if not stacks and not allow_empty:
        raise EmptyComposition("no admissible stacked patterns")
    return BasicSet(frozenset(LocalPattern(s) for s in stacks), notes)


def network_basic_set(net: NetworkTemplate, boundary="include", eps=EPS_BOUNDARY,
                      allow_empty=False):
    """Basic set of the whole network (layer sets composed)."""
    sets = []
    for i, layer in enumerate(net.layers):
        sets.append(layer_admissible_patterns(layer, has_input=i > 0,
                                              boundary=boundary, eps=eps))
    return compose_network(sets, allow_empty=allow_empty)


@dataclass(frozen=True)
class LayerSignature:
    signs: tuple
    magnitude_order: tuple
    dominant: bool
    admissible_bits: tuple


@dataclass(frozen=True)
class RegionSignature:
    """Deterministic region id; equal signatures give equal basic sets."""

    layers: tuple

    def __str__(self):
        parts = []
        for i, sig in enumerate(self.layers):
            parts.append("L%d[signs=%s order=%s dom=%s bits=%s]" % (
                i + 1,
                "".join("+" if s > 0 else "-" for s in sig.signs),
                ",".join(str(j) for j in sig.magnitude_order),
                int(sig.dominant),
                "".join(str(b) for b in sig.admissible_bits)))
        return " ".join(parts)


def _layer_signature(t: LayerTemplate, has_input, eps):
    # competing parameters, feedback off-center entries first, then control
    params = [t.feedback[t.d + k] for k in range(-t.d, t.d + 1)
              if k != 0 and t.feedback[t.d + k] != 0.0]
    if has_input:
        params += [c for c in t.control if c != 0.0]
    if not params:
        raise DegenerateTemplate("no nonzero off-center parameters")
    mags = [abs(p) for p in params]
    if any(m <= eps for m in mags):
        raise DegenerateTemplate("off-center parameter within eps of zero")
    for x, y in itertools.combinations(mags, 2):
        if abs(x - y) <= eps:
            raise DegenerateTemplate("magnitude tie between off-center parameters")
    order = tuple(sorted(range(len(mags)), key=lambda i: -mags[i]))
    if len(mags) > 1:
        top, rest = mags[order[0]], sum(mags[order[i]] for i in range(1, len(mags)))
        if abs(top - rest) <= eps:
            raise DegenerateTemplate("dominance tie: largest equals sum of others")
        dominant = top > rest
    else:
        dominant = True

    bs = layer_admissible_patterns(t, has_input=has_input, boundary="include", eps=eps)
    candidates = _candidate_patterns(t, has_input)
    bits = tuple(1 if c in bs.patterns else 0 for c in candidates)
    return LayerSignature(tuple(1 if p > 0 else -1 for p in params), order, dominant, bits)


def _candidate_patterns(t, has_input):
    _, candidates = _window_candidates(t, has_input)
    pats = {LocalPattern((out_row,) if in_row is None else (out_row, in_row))
            for _, out_row, in_row in candidates}
    return sorted(pats, key=lambda p: p.cells)


def classify_region(net: NetworkTemplate, eps=EPS_BOUNDARY):
    """Region signature of a network template.

    Raises DegenerateTemplate when a compared magnitude is within ``eps`` of
    zero, of another magnitude, or of the dominance threshold.
    """
    sigs = []
    for i, layer in enumerate(net.layers):
        sigs.append(_layer_signature(layer, i > 0, eps))
    return RegionSignature(tuple(sigs))


def survey_layer1_regions():
    """One sample template per layer-1 region (sign/order-complete grid).

    The (a, z)-plane is cut by a+z-1 = +-a_r and a-z-1 = +-a_r into 9 cells;
    with the sign of a_r that is 2 x 9 = 18 regions.  Returns a dict mapping
    each RegionSignature to its BasicSet; distinct signatures number 18 while
    distinct basic sets number 14 (the extreme cells coincide across signs).
    """
    out = {}
    for a_r in (1.0, -1.0):
        for s in (-2.0, 0.0, 2.0):
            for u in (-2.0, 0.0, 2.0):
                a = 1.0 + (s + u) / 2.0
                z = (s - u) / 2.0
                t = LayerTemplate.smcnn(a, a_r, z)
                net = NetworkTemplate((t,))
                sig = classify_region(net)
                bs = layer_admissible_patterns(t, has_input=False)
                prev = out.setdefault(sig, bs)
                assert prev.patterns == bs.patterns
    return out


def survey_layer2_regions():
    """One sample template per layer-2 region; spot-check of the count.

    For each sign pattern (8), magnitude order (6) and dominance flavour (2)
    of (a_r, b, b_r), the lines a+z-1 = -xi and a-z-1 = +xi over the eight
    sign assignments cut the (a, z)-plane into 9 x 9 = 81 cells, giving
    8 x 6 x 2 x 81 = 7776 regions; with the 18 layer-1 regions the product
    space has 18 x 7776 = 139,968.  Returns the signature -> basic-set map.
    """
    mag_sets = {True: (4.0, 2.0, 1.0), False: (4.0, 3.0, 2.0)}  # 4 > 3 vs 4 < 5
    out = {}
    for signs in itertools.product((1.0, -1.0), repeat=3):
        for order in itertools.permutations(range(3)):
            for dominant, mags in mag_sets.items():
                params = [0.0, 0.0, 0.0]
                for rank, idx in enumerate(order):
                    params[idx] = signs[idx] * mags[rank]
                a_r, b, b_r = params
                xi = sorted(a_r * y + b * u + b_r * v
                            for y in (-1, 1) for u in (-1, 1) for v in (-1, 1))
                for s in _interval_points([-v for v in xi]):
                    for t in _interval_points(xi):
                        a = (s + t) / 2.0 + 1.0
                        z = (s - t) / 2.0
                        layer = LayerTemplate.smcnn(a, a_r, z, b=b, b_r=b_r)
                        sig = _layer_signature(layer, True, EPS_BOUNDARY)
                        bs = layer_admissible_patterns(layer, has_input=True)
                        prev = out.setdefault(sig, bs)
                        assert prev.patterns == bs.patterns
    return out


def _interval_points(cuts):
    """One generic point inside each interval of the line cut at ``cuts``."""
    cuts = sorted(set(cuts))
    points = [cuts[0] - 1.0]
    for a, b in zip(cuts, cuts[1:]):
        points.append((a + b) / 2.0)
    points.append(cuts[-1] + 1.0)
    return points


def load_network(path_or_dict):
    """Read a NetworkTemplate from a JSON config (file path, JSON text, or dict).

    Layers accept the simplified shorthands {a, a_r, z} and
    {a, a_r, b, b_r, z}, or the general form
    {d, feedback, control, threshold}.
    """
    if isinstance(path_or_dict, dict):
        cfg = path_or_dict
    else:
        text = str(path_or_dict)
        if text.lstrip().startswith("{"):
            cfg = json.loads(text)
        else:
            with open(text) as fh:
                cfg = json.load(fh)
    layers = []
    for entry in cfg["layers"]:
        if "feedback" in entry:
            layers.append(LayerTemplate(
                d=int(entry.get("d", 1)),
                feedback=tuple(entry["feedback"]),
                control=tuple(entry.get("control", (0.0,) * (2 * int(entry.get("d", 1)) + 1))),
                threshold=entry["threshold"]))
        else:
            layers.append(LayerTemplate.smcnn(
                entry["a"], entry["a_r"], entry["z"],
                b=entry.get("b", 0.0), b_r=entry.get("b_r", 0.0)))
    return NetworkTemplate(tuple(layers))
