"""Full analysis pipeline: templates -> shifts -> spectral -> factors ->
measures, with a serializable report.

Layer pairs are oriented source = higher entropy (ties: lower index), the
convention under which the factor-map flow chart is stated.  Every numeric
field is rounded to 12 significant digits at serialization so reports are
byte-for-byte reproducible at fixed tolerances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import DegenerateTemplate, NotIrreducible
from .factors import (
    FactorLikeMatrix, OneBlockMap, classify_relation, induced_map_from_e,
    synchronizing_analysis,
)
from .measures import (
    build_block_family, certificate_measure_matches_pushforward,
    check_markov_condition, measure_from_certificate,
    pushforward_representation, uniform_factor_test,
)
from .shifts import (
    build_transition_matrix, count_words, layer_labeled_graph,
    periodic_counts, structure_flags, subset_construction, word_str,
)
from .spectral import maximal_measure, spectral_tolerance, topological_entropy
from .templates import (
    EPS_BOUNDARY, NetworkTemplate, classify_region, load_network,
    network_basic_set,
)


@dataclass
class PipelineOptions:
    boundary: str = "include"
    k_max: int = 4
    periodic_horizon: int = 8
    word_horizon: int = 8
    cylinder_check_length: int = 6


class _stage:
    """Re-raise package errors with the pipeline stage prepended."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        from .errors import McnnError

        if exc is not None and isinstance(exc, McnnError) and \
                not str(exc).startswith("["):
            raise exc_type("[%s] %s" % (self.name, exc)) from exc
        return False


def _round_sig(x, digits=12):
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return x
        return float("%.*g" % (digits, x))
    return x


def _clean(obj):
    """JSON-ready copy with numpy types unwrapped and floats rounded."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _round_sig(float(obj))
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, float):
        return _round_sig(obj)
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    return str(obj)


def serialize_report(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, allow_nan=True)


def parse_report(text: str) -> dict:
    return json.loads(text)


def _matrix(m):
    return np.asarray(m, dtype=np.int64).tolist()


def _sync_dict(rep):
    return {
        "word": None if rep.word is None else word_str(rep.word),
        "terminal_state": rep.terminal,
        "all_length_k": rep.all_length_k,
        "no_uniform_k": rep.no_uniform_k,
        "degree_star": rep.degree_star,
        "magic_word": None if rep.magic_word is None else word_str(rep.magic_word),
        "magic_coordinate": rep.magic_coordinate,
        "degree_search_bounded": rep.bounded,
    }


def _measure_dict(mu):
    return {"stationary": mu.stationary.tolist(), "kernel": mu.kernel.tolist()}


def _word_key(w):
    return "".join(word_str((a,)) if a in (-1, 1) else str(a) for a in w)


def _certificate_dict(cert, rep, rho_source, rho_target, opts):
    mu = None
    note = None
    try:
        mu = measure_from_certificate(cert)
    except NotIrreducible:
        note = "certificate transition matrix not irreducible"
    uniform, normalized, ratio_ts, ratio_st = uniform_factor_test(
        cert, rho_source, rho_target)
    out = {
        "order": cert.order,
        "words": [_word_key(w) for w in cert.words],
        "rays": {_word_key(w): [float(v) for v in ray]
                 for w, ray in sorted(cert.rays.items())},
        "transition_matrix": cert.transition.tolist(),
        "exact_arithmetic": cert.exact,
        "measure": None if mu is None else _measure_dict(mu),
        "uniform": {
            "is_uniform": uniform,
            "normalized_rho": normalized,
            "ratio_target_over_source": ratio_ts,
            "ratio_source_over_target": ratio_st,
        },
        "note": note,
    }
    if rep is not None and mu is not None:
        ok, worst = certificate_measure_matches_pushforward(
            cert, rep, length=opts.cylinder_check_length)
        out["matches_pushforward"] = {"ok": ok, "max_error": worst}
    return out


def analyze_network(net: NetworkTemplate, config_echo=None,
                    opts: PipelineOptions = None):
    """Run the full pipeline on a network template; returns the report dict
    plus a context object with the live presentations for rendering."""
    opts = opts or PipelineOptions()
    with _stage("templates"):
        from .templates import layer_admissible_patterns

        layer_sets = [layer_admissible_patterns(layer, has_input=i > 0,
                                                boundary=opts.boundary)
                      for i, layer in enumerate(net.layers)]
        basic = network_basic_set(net, boundary=opts.boundary)
    with _stage("shifts"):
        t = build_transition_matrix(basic)
        t_trimmed, kept = t.trim()
    h_solution = topological_entropy(t)
    sol_flags = structure_flags(t_trimmed)

    try:
        signature = str(classify_region(net))
    except DegenerateTemplate as exc:
        signature = "degenerate: %s" % exc

    solution = {
        "basic_set": [str(p) for p in basic.sorted_patterns()],
        "boundary_notes": list(basic.boundary_notes),
        "region_signature": signature,
        "states": [word_str(lab) for lab in t.labels],
        "transition_matrix": _matrix(t.matrix),
        "trimmed_states": [word_str(lab) for lab in t_trimmed.labels],
        "trimmed_matrix": _matrix(t_trimmed.matrix),
        "entropy": h_solution,
        "rho": math.exp(h_solution) if h_solution > float("-inf") else 0.0,
        "flags": sol_flags,
        "periodic_counts": [periodic_counts(t, n)
                            for n in range(1, opts.periodic_horizon + 1)],
    }

    mu_solution = None
    if sol_flags["irreducible"]:
        mu_solution = maximal_measure(t_trimmed)

    layers = []
    bundles = []
    covers = []
    for ell in range(1, net.n_layers + 1):
        with _stage("shifts:layer%d" % ell):
            g = layer_labeled_graph(t, ell)
            w = subset_construction(g)
        covers.append(w)
        inc = w.incidence()
        h = topological_entropy(inc)
        rho = math.exp(h)
        flags = structure_flags(inc)
        m_states = w.n_states
        letters = w.letter_alphabet()
        entry = {
            "layer": ell,
            "basic_set": [str(p) for p in layer_sets[ell - 1].sorted_patterns()],
            "cover_states": list(w.states),
            "cover_incidence": _matrix(inc.matrix),
            "cover_symbolic": w.symbolic().render(),
            "cover_flags": flags,
            "alphabet": [word_str((a,)) for a in letters],
            "n_letters": len(letters),
            "m_states": m_states,
            "rho": rho,
            "entropy": h,
            "word_counts": [count_words(w, k).count
                            for k in range(1, opts.word_horizon + 1)],
            "sync_cover": _sync_dict(synchronizing_analysis(w)),
            "sync_projection": _sync_dict(synchronizing_analysis(g)),
        }
        if flags["irreducible"]:
            entry["maximal_measure"] = _measure_dict(maximal_measure(inc))
        else:
            entry["maximal_measure"] = None
        entry["dimensions"] = {
            "cover": 2 * h / math.log(m_states) if m_states >= 2 else None,
            "sofic": 2 * h / math.log(len(letters)) if len(letters) >= 2 else None,
        }

        # push-forward of the solution maximal measure through the projection
        if mu_solution is not None:
            n_rows = net.n_layers
            phi = OneBlockMap(
                mapping=tuple(lab[n_rows - ell] for lab in t_trimmed.labels),
                source="solution", target="layer%d" % ell)
            with _stage("measures:layer%d" % ell):
                rep = pushforward_representation(mu_solution, phi)
                fam = build_block_family(phi, t_trimmed)
                cert = check_markov_condition(fam, k_max=opts.k_max)
            if cert is None:
                entry["markov_check"] = {
                    "order": None,
                    "note": "no certificate found (bounded search, k_max=%d)"
                            % opts.k_max,
                }
            else:
                entry["markov_check"] = _certificate_dict(
                    cert, rep, math.exp(h_solution), rho, opts)
        else:
            entry["markov_check"] = {"order": None,
                                     "note": "solution space not irreducible"}
        layers.append(entry)
        bundles.append({"layer": ell, "cover": w, "entropy": h})

    pairs = []
    order = sorted(range(net.n_layers),
                   key=lambda i: (-layers[i]["entropy"], i))
    sol_ctx = {"matrix": t_trimmed, "entropy": h_solution}
    for a in range(net.n_layers):
        for b in range(a + 1, net.n_layers):
            i, j = order[a], order[b]
            with _stage("factors:%d-%d" % (i + 1, j + 1)):
                decision = classify_relation(bundles[i], bundles[j],
                                             solution=sol_ctx)
            pair = {
                "source_layer": decision.direction[0],
                "target_layer": decision.direction[1],
                "entropies": [layers[i]["entropy"], layers[j]["entropy"]],
                "relation": decision.relation,
                "evidence": decision.evidence,
                "dimension_relation": _dimension_relation(
                    layers, decision, i, j),
            }
            pair["cover_markov_check"] = _pair_markov_check(
                decision, bundles, layers, opts)
            pairs.append(pair)

    report = {
        "tool": {
            "name": "mcnn",
            "version": __version__,
            "tolerances": {
                "eps_boundary": EPS_BOUNDARY,
                "eps_spectral": spectral_tolerance(),
                "eps_measure": 1e-9,
            },
        },
        "template": config_echo if config_echo is not None else _echo_net(net),
        "solution_space": solution,
        "layers": layers,
        "pairs": pairs,
    }
    context = {"net": net, "basic": basic, "matrix": t, "trimmed": t_trimmed,
               "covers": covers, "report": report}
    return report, context


def _echo_net(net: NetworkTemplate):
    return {"layers": [
        {"d": layer.d, "feedback": list(layer.feedback),
         "control": list(layer.control), "threshold": layer.threshold}
        for layer in net.layers]}


def _dimension_relation(layers, decision, i, j):
    hi, hj = layers[i]["entropy"], layers[j]["entropy"]
    case = "equal-entropy" if decision.relation == "FSE-finite-to-one" or \
        abs(hi - hj) <= 1e-9 else "distinct-entropy"
    return {
        "case": case,
        "dim_cover": [layers[i]["dimensions"]["cover"],
                      layers[j]["dimensions"]["cover"]],
        "dim_sofic": [layers[i]["dimensions"]["sofic"],
                      layers[j]["dimensions"]["sofic"]],
        "almost_invertible": [layers[i]["sync_cover"]["word"] is not None,
                              layers[j]["sync_cover"]["word"] is not None],
    }


def _pair_markov_check(decision, bundles, layers, opts):
    """Certificate for the cover-to-cover map induced by a symbolic
    intertwiner, when one exists."""
    if decision.relation != "FSE-finite-to-one" or \
            decision.evidence.get("kind") != "symbolic":
        return None
    src = next(b for b in bundles if b["layer"] == decision.direction[0])
    dst = next(b for b in bundles if b["layer"] == decision.direction[1])
    e = FactorLikeMatrix(np.array(decision.evidence["matrix"]))
    phi, compatible = induced_map_from_e(e, src["cover"], dst["cover"])
    if not compatible:
        return {"note": "state map does not respect labels"}
    t_src = src["cover"].incidence()
    fam = build_block_family(phi, t_src)
    cert = check_markov_condition(fam, k_max=opts.k_max)
    if cert is None:
        return {"order": None,
                "note": "no certificate found (bounded search, k_max=%d)"
                        % opts.k_max}
    out = _certificate_dict(cert, None, math.exp(src["entropy"]),
                            math.exp(dst["entropy"]), opts)
    out["state_map"] = list(phi.mapping)
    return out


def run_pipeline(config, opts: PipelineOptions = None):
    """Config (dict, JSON text or path) -> (report dict, context)."""
    if isinstance(config, NetworkTemplate):
        return analyze_network(config, opts=opts)
    net = load_network(config)
    echo = config if isinstance(config, dict) else None
    return analyze_network(net, config_echo=echo, opts=opts)


def summary_rows(report):
    """Per-layer rows for the delimited summary."""
    rows = []
    for entry in report["layers"]:
        dims = entry["dimensions"]
        rows.append({
            "layer": entry["layer"],
            "cover_states": entry["m_states"],
            "alphabet": entry["n_letters"],
            "rho": entry["rho"],
            "entropy_nats": entry["entropy"],
            "dim_cover": dims["cover"],
            "dim_sofic": dims["sofic"],
            "sync_word": entry["sync_cover"]["word"],
            "uniform_sync_k": entry["sync_cover"]["all_length_k"],
            "markov_order": entry["markov_check"].get("order"),
        })
    return rows


def pair_rows(report):
    rows = []
    for pair in report["pairs"]:
        rows.append({
            "source_layer": pair["source_layer"],
            "target_layer": pair["target_layer"],
            "relation": pair["relation"],
            "case": pair["dimension_relation"]["case"],
            "evidence_kind": pair["evidence"].get("kind", ""),
        })
    return rows
