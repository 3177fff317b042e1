import itertools
import math

import numpy as np
import pytest

from mcnn.factors import OneBlockMap
from mcnn.measures import (
    build_block_family, certificate_measure_matches_pushforward,
    check_markov_condition, cylinder_probability, measure_from_certificate,
    pushforward_representation, uniform_factor_test,
)
from mcnn.shifts import (
    TransitionMatrix, build_transition_matrix, layer_labeled_graph,
    subset_construction,
)
from mcnn.spectral import markov_entropy, maximal_measure, perron, topological_entropy
from mcnn.templates import network_basic_set

GOLDEN = (1 + math.sqrt(5)) / 2

BLACKWELL = TransitionMatrix(
    np.array([[0, 1, 1], [1, 1, 0], [1, 0, 1]]), ("1", "2", "3"))
BLACKWELL_MAP = OneBlockMap(mapping=(0, 1, 1), source="X", target="Y")


def brute_pushforward(mu, phi, word):
    """Oracle: sum the Markov measure over all source paths hitting the word."""
    n = len(mu.stationary)
    total = 0.0
    for path in itertools.product(range(n), repeat=len(word)):
        if any(phi.mapping[q] != a for q, a in zip(path, word)):
            continue
        total += mu.cylinder(path)
    return total


def trimmed_solution(net):
    t = build_transition_matrix(network_basic_set(net))
    trimmed, kept = t.trim()
    return t, trimmed, kept


def projection_map(t: TransitionMatrix, layer):
    n_rows = len(t.labels[0])
    row = n_rows - layer
    return OneBlockMap(mapping=tuple(lab[row] for lab in t.labels),
                       source="solution", target="layer%d" % layer)


def test_blackwell_blocks_exact():
    fam = build_block_family(BLACKWELL_MAP, BLACKWELL)
    assert fam.size == 2
    assert fam.blocks[(0, 0)].tolist() == [[0, 0], [0, 0]]
    assert fam.blocks[(0, 1)].tolist() == [[1, 1], [0, 0]]
    assert fam.blocks[(1, 0)].tolist() == [[1, 0], [1, 0]]
    assert fam.blocks[(1, 1)].tolist() == [[1, 0], [0, 1]]


def test_blackwell_certificate_order_one():
    fam = build_block_family(BLACKWELL_MAP, BLACKWELL)
    cert = check_markov_condition(fam)
    assert cert is not None and cert.order == 1
    np.testing.assert_allclose(cert.rays[(0,)], [1, 0], atol=1e-12)
    np.testing.assert_allclose(cert.rays[(1,)], [1, 1], atol=1e-12)
    assert cert.transition.tolist() == [[0, 1], [2, 1]]
    assert cert.exact


def test_blackwell_measure_matches_pushforward():
    fam = build_block_family(BLACKWELL_MAP, BLACKWELL)
    cert = check_markov_condition(fam)
    mu = maximal_measure(BLACKWELL)
    rep = pushforward_representation(mu, BLACKWELL_MAP)
    ok, worst = certificate_measure_matches_pushforward(cert, rep, length=8)
    assert ok, worst
    # kernel equals brute-force cylinder ratios on long words
    m = measure_from_certificate(cert)
    for w in itertools.product((0, 1), repeat=6):
        base = brute_pushforward(mu, BLACKWELL_MAP, w)
        if base < 1e-12:
            continue
        for a in (0, 1):
            ext = brute_pushforward(mu, BLACKWELL_MAP, w + (a,))
            assert abs(ext / base - m.kernel[w[-1], a]) < 1e-9


def test_blackwell_not_uniform():
    fam = build_block_family(BLACKWELL_MAP, BLACKWELL)
    cert = check_markov_condition(fam)
    rho_src = perron(BLACKWELL).rho
    rho_tgt = GOLDEN  # golden-mean target shift (word 11 allowed, 00 not... )
    uniform, normalized, ratio_ts, ratio_st = uniform_factor_test(
        cert, rho_src, rho_tgt)
    assert not uniform
    assert normalized == pytest.approx(1.0, abs=1e-9)


def test_pushforward_representation_blackwell_oracle():
    mu = maximal_measure(BLACKWELL)
    rep = pushforward_representation(mu, BLACKWELL_MAP)
    for k in range(0, 7):
        for w in itertools.product((0, 1), repeat=k):
            assert abs(rep.cylinder(w) - brute_pushforward(mu, BLACKWELL_MAP, w)) < 1e-12


def test_pushforward_identity_map():
    mu = maximal_measure(np.array([[0, 1], [1, 1]]))
    ident = OneBlockMap(mapping=(0, 1))
    rep = pushforward_representation(mu, ident)
    for k in range(1, 6):
        for w in itertools.product((0, 1), repeat=k):
            assert abs(rep.cylinder(w) - mu.cylinder(w)) < 1e-12


def test_identity_certificate_recovers_measure():
    t = TransitionMatrix(np.array([[0, 1], [1, 1]]), ("a", "b"))
    ident = OneBlockMap(mapping=(0, 1))
    fam = build_block_family(ident, t)
    assert fam.blocks[(0, 0)].tolist() == [[0]]
    assert fam.blocks[(0, 1)].tolist() == [[1]]
    cert = check_markov_condition(fam)
    assert cert is not None and cert.order == 1
    m = measure_from_certificate(cert)
    mu = maximal_measure(t)
    np.testing.assert_allclose(m.kernel, mu.kernel, atol=1e-9)
    uniform, *_ = uniform_factor_test(cert, perron(t.matrix).rho, perron(t.matrix).rho)
    assert uniform


def test_fse_sft_psi_blocks_untrimmed(fse_sft_net):
    # the reference blocks use the full 4-state solution matrix
    t, _, _ = trimmed_solution(fse_sft_net)
    fam = build_block_family(projection_map(t, 1), t)
    assert fam.blocks[(-1, -1)].tolist() == [[0, 1], [0, 0]]
    assert fam.blocks[(-1, 1)].tolist() == [[0, 0], [1, 1]]
    assert fam.blocks[(1, -1)].tolist() == [[0, 1], [0, 0]]
    assert fam.blocks[(1, 1)].tolist() == [[0, 0], [1, 1]]


def test_fse_sft_psi_certificate(fse_sft_net):
    _, trimmed, _ = trimmed_solution(fse_sft_net)
    phi = projection_map(trimmed, 1)
    fam = build_block_family(phi, trimmed)
    cert = check_markov_condition(fam)
    assert cert is not None and cert.order == 1
    # gauge invariants of M = [[0, 1/g], [g, 1]]
    from mcnn.spectral import char_poly, stochasticize

    assert (cert.transition > 0).tolist() == [[False, True], [True, True]]
    p = stochasticize(cert.transition)
    np.testing.assert_allclose(p, [[0, 1], [2 - GOLDEN, GOLDEN - 1]], atol=1e-9)
    rho = perron(cert.transition).rho
    assert abs(rho * rho - rho - 1) < 1e-9
    m = measure_from_certificate(cert)
    np.testing.assert_allclose(
        m.stationary, [(2 - GOLDEN) / (3 - GOLDEN), 1 / (3 - GOLDEN)], atol=1e-9)


def test_fse_sft_psi_uniform(fse_sft_net):
    _, trimmed, _ = trimmed_solution(fse_sft_net)
    phi = projection_map(trimmed, 1)
    cert = check_markov_condition(build_block_family(phi, trimmed))
    rho_y = perron(trimmed.matrix).rho
    w1 = subset_construction(layer_labeled_graph(
        build_transition_matrix(network_basic_set(fse_sft_net)), 1))
    rho_w1 = perron(w1.incidence().matrix).rho
    uniform, normalized, ratio_ts, _ = uniform_factor_test(cert, rho_y, rho_w1)
    assert uniform
    assert normalized == pytest.approx(1.0, abs=1e-9)
    assert ratio_ts == pytest.approx(1.0, abs=1e-9)
    # with uniformity, the certificate measure attains the target entropy
    m = measure_from_certificate(cert)
    assert abs(markov_entropy(m) - math.log(rho_w1)) < 1e-9


def test_fse_sft_psi_cylinders(fse_sft_net):
    _, trimmed, _ = trimmed_solution(fse_sft_net)
    phi = projection_map(trimmed, 1)
    mu = maximal_measure(trimmed)
    rep = pushforward_representation(mu, phi)
    cert = check_markov_condition(build_block_family(phi, trimmed))
    ok, worst = certificate_measure_matches_pushforward(cert, rep, length=8)
    assert ok, worst
    # forbidden word of the golden-mean image has measure zero
    assert rep.cylinder((-1, -1)) < 1e-12


def test_fse_sft_psi_layer2_needs_order_two(fse_sft_net):
    _, trimmed, _ = trimmed_solution(fse_sft_net)
    phi = projection_map(trimmed, 2)
    cert = check_markov_condition(build_block_family(phi, trimmed))
    assert cert is not None and cert.order == 2
    mu = maximal_measure(trimmed)
    rep = pushforward_representation(mu, phi)
    ok, worst = certificate_measure_matches_pushforward(cert, rep, length=8)
    assert ok, worst


def test_ito_full_shift_psi1_bernoulli(ito_full_shift_net):
    _, trimmed, _ = trimmed_solution(ito_full_shift_net)
    phi = projection_map(trimmed, 1)
    cert = check_markov_condition(build_block_family(phi, trimmed))
    assert cert is not None and cert.order == 1
    m = measure_from_certificate(cert)
    np.testing.assert_allclose(m.stationary, [0.5, 0.5], atol=1e-9)
    np.testing.assert_allclose(m.kernel, [[0.5, 0.5], [0.5, 0.5]], atol=1e-9)
    rep = pushforward_representation(maximal_measure(trimmed), phi)
    ok, worst = certificate_measure_matches_pushforward(cert, rep, length=8)
    assert ok, worst


def test_cylinder_probability_normalization():
    mu = maximal_measure(BLACKWELL)
    rep = pushforward_representation(mu, BLACKWELL_MAP)
    assert cylinder_probability(rep, ()) == pytest.approx(1.0, abs=1e-12)
    for n in range(1, 9):
        total = sum(cylinder_probability(rep, w)
                    for w in itertools.product((0, 1), repeat=n))
        assert total == pytest.approx(1.0, abs=1e-9)


def test_perturbed_certificate_not_uniform(fse_sft_net):
    _, trimmed, _ = trimmed_solution(fse_sft_net)
    phi = projection_map(trimmed, 1)
    cert = check_markov_condition(build_block_family(phi, trimmed))
    from dataclasses import replace

    bad = replace(cert, transition=cert.transition * np.array([[1, 1.1], [1, 1]]))
    rho_y = perron(trimmed.matrix).rho
    uniform, *_ = uniform_factor_test(bad, rho_y, rho_y)
    assert not uniform


def test_certificate_coefficients_nonnegative(any_net):
    t = build_transition_matrix(network_basic_set(any_net))
    trimmed, _ = t.trim()
    for layer in (1, 2):
        phi = projection_map(trimmed, layer)
        cert = check_markov_condition(build_block_family(phi, trimmed))
        if cert is None:
            continue
        assert all(c >= 0 for c in cert.coefficients.values())
