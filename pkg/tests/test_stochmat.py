import itertools

import numpy as np
import pytest

from rhomix.errors import IndexOutOfRange, NotBistochastic, NotUnitary, PreconditionViolated
from rhomix.majorization import TTransform, random_t_transform
from rhomix.numkernel import random_unitary, unitarity_residual
from rhomix.stochmat import (
    SearchOptions,
    as_bistochastic,
    block_structure_check,
    certify_unistochastic,
    chain_links,
    from_unitary,
    sample_feasible_bistochastic,
    t_product,
    triangle_witness,
    van_der_waerden,
    witness_residual,
)

CYCLIC = 0.5 * np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])


def fourier(n):
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def random_sequence(n, rng, max_len=20):
    return [random_t_transform(n, rng) for _ in range(int(rng.integers(1, max_len + 1)))]


def assert_valid_witness(cert, b):
    assert cert.verdict == "certified"
    assert unitarity_residual(cert.witness) < 1e-8
    assert witness_residual(cert.witness, b) < 1e-8


def test_validation():
    with pytest.raises(NotBistochastic):
        as_bistochastic([[0.5, 0.5], [0.4, 0.6]])
    with pytest.raises(NotBistochastic):
        as_bistochastic([[1.5, -0.5], [-0.5, 1.5]])
    np.testing.assert_array_equal(as_bistochastic([[1.0, -1e-13], [0.0, 1.0]]), np.eye(2))


def test_from_unitary_examples():
    np.testing.assert_array_equal(from_unitary(np.eye(3)), np.eye(3))
    r = np.array([[1, -1], [1, 1]]) / np.sqrt(2)
    np.testing.assert_allclose(from_unitary(r), np.full((2, 2), 0.5))
    np.testing.assert_allclose(from_unitary(fourier(3)), van_der_waerden(3), atol=1e-15)
    with pytest.raises(NotUnitary):
        from_unitary(np.diag([2.0, 0.5]))


def test_from_unitary_is_bistochastic(rng):
    for _ in range(1000):
        b = from_unitary(random_unitary(int(rng.integers(1, 9)), rng))
        assert np.max(np.abs(b.sum(axis=0) - 1)) < 1e-12
        assert np.max(np.abs(b.sum(axis=1) - 1)) < 1e-12


def test_van_der_waerden():
    np.testing.assert_array_equal(van_der_waerden(1), [[1.0]])
    np.testing.assert_array_equal(van_der_waerden(3), np.full((3, 3), 1 / 3))
    np.testing.assert_array_equal(van_der_waerden(4), np.full((4, 4), 0.25))


def test_t_product_examples():
    np.testing.assert_array_equal(t_product([], 3), np.eye(3))
    np.testing.assert_allclose(t_product([TTransform(0, 1, 0.5)], 2), np.full((2, 2), 0.5))
    with pytest.raises(IndexOutOfRange):
        t_product([TTransform(0, 3, 0.5)], 3)


def test_t_product_order_matches_matrix_product(rng):
    seq = random_sequence(4, rng)
    expected = np.eye(4)
    for t in seq:
        expected = t.matrix(4) @ expected
    np.testing.assert_allclose(t_product(seq, 4), expected, atol=1e-15)


def test_half_sweeps_reach_van_der_waerden():
    sweep = [TTransform(0, 1, 0.5), TTransform(1, 2, 0.5)]
    b = t_product(sweep * 200, 3)
    assert np.max(np.abs(b - van_der_waerden(3))) < 1e-10


def test_chain_links_examples():
    r = chain_links(van_der_waerden(3))
    assert r.satisfied
    assert r.worst_margin == pytest.approx(1 / 3)
    r = chain_links(CYCLIC)
    assert not r.satisfied
    assert r.violating_pair == ("column", (0, 1))
    assert r.links == (0.5, 0.0, 0.0)
    for perm in itertools.permutations(range(4)):
        r = chain_links(np.eye(4)[list(perm)])
        assert r.satisfied and r.worst_margin == 0.0


def test_chain_links_permutation_invariant(rng):
    for _ in range(300):
        n = int(rng.integers(3, 6))
        b = t_product(random_sequence(n, rng), n)
        if rng.uniform() < 0.5:
            # also exercise matrices that are not T-products
            b = sum(w * np.eye(n)[rng.permutation(n)] for w in rng.dirichlet(np.ones(3)))
        pr, pc = np.eye(n)[rng.permutation(n)], np.eye(n)[rng.permutation(n)]
        assert chain_links(pr @ b @ pc).satisfied == chain_links(b).satisfied


def test_lemma_t_products_obey_chain_links(rng):
    # both row and column families, no asymmetry expected
    for n in (3, 4, 5):
        for _ in range(200):
            b = t_product(random_sequence(n, rng), n)
            assert chain_links(b).satisfied
            assert chain_links(b.T).satisfied


def test_certify_examples():
    cert = certify_unistochastic(van_der_waerden(3))
    assert_valid_witness(cert, van_der_waerden(3))
    np.testing.assert_allclose(np.abs(cert.witness), np.full((3, 3), 3 ** -0.5))
    cert = certify_unistochastic(CYCLIC)
    assert cert.verdict == "refuted"
    assert cert.chain_links.violating_pair == ("column", (0, 1))
    for n in (1, 2, 3, 5):
        cert = certify_unistochastic(np.eye(n))
        assert cert.verdict == "certified"
        np.testing.assert_array_equal(cert.witness, np.eye(n))


def test_certify_two_by_two(rng):
    for a in rng.uniform(size=20):
        b = np.array([[a, 1 - a], [1 - a, a]])
        assert_valid_witness(certify_unistochastic(b), b)


def test_poon_three_by_three(rng):
    for _ in range(300):
        b = t_product(random_sequence(3, rng), 3)
        assert_valid_witness(certify_unistochastic(b), b)


def test_triangle_witness_on_unistochastic_images(rng):
    for _ in range(200):
        b = from_unitary(random_unitary(3, rng))
        w = triangle_witness(b)
        assert unitarity_residual(w) < 1e-10
        assert witness_residual(w, b) < 1e-10


def test_alternating_projections_certify_unistochastic_images(rng):
    for n in (4, 5):
        b = from_unitary(random_unitary(n, rng))
        cert = certify_unistochastic(b, SearchOptions(seed=3))
        assert_valid_witness(cert, b)


def test_block_matrices_certified_blockwise(rng):
    b3 = t_product(random_sequence(3, rng), 3)
    b = np.zeros((5, 5))
    b[:3, :3] = b3
    b[3:, 3:] = np.full((2, 2), 0.5)
    assert_valid_witness(certify_unistochastic(b), b)


def test_certify_deterministic(rng):
    b = from_unitary(random_unitary(4, rng))
    a = certify_unistochastic(b, SearchOptions(seed=9))
    c = certify_unistochastic(b, SearchOptions(seed=9))
    assert np.array_equal(a.witness, c.witness)


def test_block_structure_examples():
    q, p = np.array([0.6, 0.4, 0.0]), np.array([0.6, 0.2, 0.2])
    # row 0 of B q = 0.6 with unit row sum forces B[0,0] = 1; then 0.4 x = 0.2
    forced = np.array([[1, 0, 0], [0, 0.5, 0.5], [0, 0.5, 0.5]])
    assert block_structure_check(forced, p, q, 2)
    q3 = np.array([0.5, 0.3, 0.2])
    assert block_structure_check(np.eye(3), q3, q3, 2)
    assert block_structure_check(np.eye(3), q3, q3, 3)


def test_block_structure_preconditions():
    q, p = np.array([0.6, 0.4, 0.0]), np.array([0.6, 0.2, 0.2])
    forced = np.array([[1, 0, 0], [0, 0.5, 0.5], [0, 0.5, 0.5]])
    with pytest.raises(PreconditionViolated):
        block_structure_check(forced, p, q, 3)  # prefix sums 0.8 vs 1.0
    q2 = np.array([0.4, 0.4, 0.2])
    with pytest.raises(PreconditionViolated):
        block_structure_check(np.eye(3), q2, q2, 2)  # no gap
    with pytest.raises(PreconditionViolated):
        block_structure_check(np.eye(3), p, q, 2)  # B q != p


def test_feasible_sampler_hits_forced_matrix():
    q, p = np.array([0.6, 0.4, 0.0]), np.array([0.6, 0.2, 0.2])
    forced = np.array([[1, 0, 0], [0, 0.5, 0.5], [0, 0.5, 0.5]])
    found = 0
    for seed in range(100):
        b = sample_feasible_bistochastic(p, q, seed)
        if b is None:
            continue
        found += 1
        assert np.max(np.abs(b - forced)) < 1e-9
        assert block_structure_check(b, p, q, 2)
    assert found > 50


def test_feasible_sampler_general_instance(rng):
    q = np.array([0.5, 0.3, 0.15, 0.05])
    p = np.array([0.35, 0.3, 0.2, 0.15])
    got = [sample_feasible_bistochastic(p, q, s) for s in range(30)]
    got = [b for b in got if b is not None]
    assert got
    for b in got:
        assert np.max(np.abs(b @ q - p)) < 1e-10
        assert b.min() >= 0


def test_round_off_entries_do_not_break_chain_links():
    b = np.array([[1, 3e-15, 0], [2.5e-15, 0.5, 0.5], [0, 0.5, 0.5]])
    assert chain_links(b).satisfied
    assert_valid_witness(certify_unistochastic(b), b)
