"""Cross-module invariants tying the presentations, spectra and measures
together on the four worked fixtures."""

import math

import numpy as np
import pytest

import mcnn
from mcnn.shifts import (
    build_transition_matrix, count_words, layer_labeled_graph,
    subset_construction,
)
from mcnn.spectral import perron, spectral_tolerance, topological_entropy
from mcnn.templates import network_basic_set, survey_layer2_regions

from conftest import FIXTURE_PARAMS, network


def covers(net):
    t = build_transition_matrix(network_basic_set(net))
    return t, [subset_construction(layer_labeled_graph(t, ell)) for ell in (1, 2)]


def letter_determinization(pres):
    """Deterministic presentation of the sofic shift over single letters
    (independent of the alpha-label cover: merges letter-equivalent states)."""
    succ = pres.letter_successors()
    letters = pres.letter_alphabet()
    starts = {a: frozenset(q for q in range(pres.n_states) if pres.letters[q] == a)
              for a in letters}

    def step(subset, a):
        out = set()
        for q in subset:
            out |= succ[q].get(a, set())
        return frozenset(out)

    seen = {s for s in starts.values() if s}
    frontier = list(seen)
    trans = {}
    while frontier:
        cur = frontier.pop()
        for a in letters:
            nxt = step(cur, a)
            if not nxt:
                continue
            trans[(cur, a)] = nxt
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    order = sorted(seen, key=lambda s: tuple(sorted(s)))
    index = {s: i for i, s in enumerate(order)}
    m = np.zeros((len(order), len(order)), dtype=np.int64)
    for (s, a), d in trans.items():
        m[index[s], index[d]] = 1
    return mcnn.TransitionMatrix(m, tuple(str(sorted(s)) for s in order))


def test_entropy_consistency_k18(any_net):
    # log Gamma_18 / 18 approximates log rho within 0.05 on every fixture
    _, ws = covers(any_net)
    for w in ws:
        h = topological_entropy(w.incidence())
        gamma = count_words(w, 18).count
        assert abs(math.log(gamma) / 18 - h) < 0.05


def test_uniform_sync_implies_conjugate_entropy(any_net):
    # cover uniformly synchronizing => cover entropy equals the entropy of
    # an independent deterministic presentation of the sofic shift
    _, ws = covers(any_net)
    for w in ws:
        rep = mcnn.synchronizing_analysis(w)
        if rep.all_length_k is None:
            continue
        hw = topological_entropy(w.incidence())
        hy = topological_entropy(letter_determinization(w))
        assert abs(hw - hy) < 1e-9


def test_degree_one_iff_sync_word(any_net):
    _, ws = covers(any_net)
    for w in ws:
        rep = mcnn.synchronizing_analysis(w)
        assert (rep.degree_star == 1) == (rep.word is not None)


def test_degree_without_sync_word():
    # two same-letter states with crossing edges: no word ever synchronizes
    pres = mcnn.Presentation(states=("a", "b"), letters=(1, 1),
                             edges=((0, 1, (1, 1)), (1, 0, (1, 1))),
                             deterministic=True)
    rep = mcnn.synchronizing_analysis(pres, max_len=8)
    assert rep.word is None
    assert rep.no_uniform_k
    assert rep.degree_star == 2 and rep.bounded


def test_right_resolving_symbolic_everywhere(any_net):
    _, ws = covers(any_net)
    for w in ws:
        assert w.symbolic().is_right_resolving()


def test_layer2_region_spot_check():
    table = survey_layer2_regions()
    assert len(table) == 7776
    # 18 x 7776 = 139,968 regions of the product space


def test_spectral_tolerance_env(monkeypatch):
    monkeypatch.setenv("MCNN_TOLERANCE", "1e-10")
    assert spectral_tolerance() == 1e-10
    monkeypatch.delenv("MCNN_TOLERANCE")
    assert spectral_tolerance() == 1e-12


def test_cli_entropy_digits_fse_strict_sofic():
    # the worked value rho ~ 1.324718, h ~ 0.281199
    report, _ = mcnn.run_pipeline({"layers": [
        {"a": 2.9, "a_r": 1.7, "z": 0.1},
        {"a": -0.1, "a_r": -1.1, "b": 2.1, "b_r": -1.4, "z": 0.9}]})
    assert abs(report["layers"][0]["rho"] - 1.324718) < 1e-6
    assert abs(report["layers"][0]["entropy"] - 0.281199) < 1e-6


def test_variational_identity_on_fixture_covers(any_net):
    _, ws = covers(any_net)
    for w in ws:
        inc = w.incidence()
        mu = mcnn.maximal_measure(inc)
        assert abs(mcnn.markov_entropy(mu) - math.log(perron(inc.matrix).rho)) < 1e-9


def test_pushforward_cylinders_normalized(any_net):
    import itertools

    from mcnn.factors import OneBlockMap
    from mcnn.measures import pushforward_representation

    t, _ = covers(any_net)
    trimmed, _ = t.trim()
    mu = mcnn.maximal_measure(trimmed)
    for ell in (1, 2):
        phi = OneBlockMap(mapping=tuple(lab[2 - ell] for lab in trimmed.labels))
        rep = pushforward_representation(mu, phi)
        for n in range(1, 9):
            total = sum(rep.cylinder(wd)
                        for wd in itertools.product((-1, 1), repeat=n))
            assert abs(total - 1.0) < 1e-9


def test_certificate_incidence_matches_target_words(any_net):
    import numpy as np

    from mcnn.factors import OneBlockMap
    from mcnn.measures import build_block_family, check_markov_condition
    from mcnn.shifts import enumerate_words

    t, ws = covers(any_net)
    trimmed, _ = t.trim()
    for ell in (1, 2):
        phi = OneBlockMap(mapping=tuple(lab[2 - ell] for lab in trimmed.labels))
        cert = check_markov_condition(build_block_family(phi, trimmed))
        if cert is None:
            continue
        k = cert.order
        target_words = set(enumerate_words(ws[ell - 1], k + 1))
        index = {w: i for i, w in enumerate(cert.words)}
        for w in target_words:
            a, b = w[:k], w[1:]
            assert cert.transition[index[a], index[b]] > 0, (ell, w)
        for i, a in enumerate(cert.words):
            for j, b in enumerate(cert.words):
                if cert.transition[i, j] > 0:
                    assert a[1:] == b[:-1] if k > 1 else True
                    assert (a + (b[-1],)) in target_words


def test_perron_residuals_at_tolerance(any_net):
    _, ws = covers(any_net)
    for w in ws:
        a = np.asarray(w.incidence().matrix, dtype=float)
        data = perron(a)
        assert np.max(np.abs(a @ data.right - data.rho * data.right)) < 1e-11
        assert np.max(np.abs(data.left @ a - data.rho * data.left)) < 1e-11
