import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutritlocc.pauli import INDEX_ORDER, INDEX_POS, PAULIS, dagger, idx_neg, kron3
from qutritlocc.sep import (
    SepInstance,
    candidate_initial_grams,
    dep_spectrum,
    depolarize,
    gram_instance,
    induced_initial,
    sep_feasible,
    sep_instance,
    spectrum_conditions,
)
from qutritlocc.seeds import SeedParams
from qutritlocc.states import GenericState, gram, gram_triple, seed_gram

E0 = np.eye(9)[0]
UNIFORM = np.full(9, 1.0 / 9.0)


def triple_dist(w, weights=(1 / 3, 1 / 3, 1 / 3)):
    p = np.zeros(9)
    p[0] = weights[0]
    p[INDEX_POS[w]] = weights[1]
    p[INDEX_POS[idx_neg(w)]] = weights[2]
    return p


def pair_mat(w, z=0.08):
    return np.eye(3) / 3 + z * (PAULIS[w] + dagger(PAULIS[w]))


def two_pair_mat(w1, w2, z=0.05):
    return (
        np.eye(3) / 3
        + z * (PAULIS[w1] + dagger(PAULIS[w1]))
        + z * (PAULIS[w2] + dagger(PAULIS[w2]))
    )


def dense_mat(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = a @ dagger(a) + 0.3 * np.eye(3)
    return m / np.trace(m)


simplex_weights = st.lists(
    st.floats(min_value=1e-3, max_value=1.0), min_size=9, max_size=9
)


# ---------------------------------------------------------------------------
# depolarization and its spectrum
# ---------------------------------------------------------------------------


def test_depolarize_identity_distribution(rng):
    h = dense_mat(rng)
    np.testing.assert_allclose(depolarize(h, E0), h, atol=0)


def test_depolarize_uniform_is_complete(rng):
    for _ in range(5):
        h = dense_mat(rng)
        np.testing.assert_allclose(depolarize(h, UNIFORM), np.eye(3) / 3, atol=1e-14)


def test_depolarize_preserves_trace(rng):
    h = dense_mat(rng)
    p = rng.dirichlet(np.ones(9))
    assert np.trace(depolarize(h, p)) == pytest.approx(np.trace(h).real)


def test_depolarize_fixes_commuting_span():
    w = (1, 1)
    h = pair_mat(w, 0.11)
    np.testing.assert_allclose(depolarize(h, triple_dist(w)), h, atol=1e-14)


def test_depolarize_rejects_bad_shape():
    with pytest.raises(ValueError):
        depolarize(np.eye(3), np.ones(4))


def test_spectrum_of_point_mass():
    np.testing.assert_allclose(dep_spectrum(E0), np.ones(9), atol=0)


def test_spectrum_of_uniform():
    eta = dep_spectrum(UNIFORM)
    assert eta[0] == pytest.approx(1.0)
    np.testing.assert_allclose(eta[1:], np.zeros(8), atol=1e-15)


def test_spectrum_of_uniform_triple():
    w = (1, 0)
    eta = dep_spectrum(triple_dist(w))
    assert eta[INDEX_POS[w]] == pytest.approx(1.0)
    assert eta[INDEX_POS[idx_neg(w)]] == pytest.approx(1.0)
    for k in INDEX_ORDER[1:]:
        if k not in (w, idx_neg(w)):
            assert abs(eta[INDEX_POS[k]]) <= 1e-15


def test_spectrum_of_tilted_triple():
    eps = 0.37
    eta = dep_spectrum(triple_dist((0, 1), (1 - 2 * eps / 3, eps / 3, eps / 3)))
    for k in INDEX_ORDER[1:]:
        expected = 1.0 if k in ((0, 1), (0, 2)) else 1.0 - eps
        assert eta[INDEX_POS[k]] == pytest.approx(expected, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(weights=simplex_weights)
def test_spectrum_invariants(weights):
    p = np.array(weights)
    p = p / p.sum()
    eta = dep_spectrum(p)
    assert abs(eta[0] - 1.0) <= 1e-12
    assert np.all(np.abs(eta) <= 1.0 + 1e-12)
    for k in INDEX_ORDER:
        assert abs(eta[INDEX_POS[k]] - np.conj(eta[INDEX_POS[idx_neg(k)]])) <= 1e-12


def test_spectrum_is_linear(rng):
    p1, p2 = rng.dirichlet(np.ones(9)), rng.dirichlet(np.ones(9))
    lam = 0.3
    np.testing.assert_allclose(
        dep_spectrum(lam * p1 + (1 - lam) * p2),
        lam * dep_spectrum(p1) + (1 - lam) * dep_spectrum(p2),
        atol=1e-14,
    )


def test_depolarize_scales_coordinates_by_spectrum(rng):
    from qutritlocc.pauli import pauli_coords

    h = dense_mat(rng)
    p = rng.dirichlet(np.ones(9))
    eta = dep_spectrum(p)
    _, before = pauli_coords(h)
    _, after = pauli_coords(depolarize(h, p))
    np.testing.assert_allclose(after, eta[1:] * before, atol=1e-13)


# ---------------------------------------------------------------------------
# spectrum compatibility conditions
# ---------------------------------------------------------------------------


def test_conditions_pass_for_point_mass(rng):
    coords = gram_triple(dense_mat(rng), dense_mat(rng), dense_mat(rng)).coords
    ok, violations = spectrum_conditions(coords, dep_spectrum(E0))
    assert ok and violations == ()


def test_conditions_pass_for_tiling_with_uniform():
    gt = gram_triple(two_pair_mat((1, 0), (0, 1)), two_pair_mat((1, 1), (1, 2)), np.eye(3))
    ok, violations = spectrum_conditions(gt.coords, dep_spectrum(UNIFORM))
    assert ok, violations


def test_conditions_flag_shared_support_with_damped_spectrum():
    gt = gram_triple(pair_mat((1, 0)), pair_mat((1, 0), 0.05), np.eye(3))
    ok, violations = spectrum_conditions(gt.coords, dep_spectrum(UNIFORM))
    assert not ok
    assert any(fam == "pair" for fam, _, _ in violations)


# ---------------------------------------------------------------------------
# induced initial states
# ---------------------------------------------------------------------------


def test_induced_initial_uniform_is_seed_gram(rng):
    final = gram_triple(dense_mat(rng), dense_mat(rng), dense_mat(rng))
    init = induced_initial(final, UNIFORM)
    for m in init.mats:
        np.testing.assert_allclose(m, np.eye(3) / 3, atol=1e-14)


def test_induced_initial_point_mass_is_final(rng):
    final = gram_triple(dense_mat(rng), pair_mat((1, 1)), dense_mat(rng))
    init = induced_initial(final, E0)
    for a, b in zip(init.mats, final.mats):
        np.testing.assert_allclose(a, b, atol=1e-14)


def test_induced_initial_triple_keeps_confined_coords(rng):
    w = (1, 2)
    final = gram_triple(dense_mat(rng), pair_mat(w), pair_mat(w, 0.04))
    init = induced_initial(final, triple_dist(w))
    # confined factors commute with the triple and are untouched
    np.testing.assert_allclose(init.mats[1], final.mats[1], atol=1e-14)
    np.testing.assert_allclose(init.mats[2], final.mats[2], atol=1e-14)
    # the free factor keeps only its {0, +-w} coordinates where eta = 1
    eta = dep_spectrum(triple_dist(w))
    np.testing.assert_allclose(init.coords[0], eta[1:] * final.coords[0], atol=1e-13)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


def test_instance_requires_canonical_seed():
    with pytest.raises(ValueError, match="canonical"):
        gram_instance(SeedParams(2, 3, 5), seed_gram(), seed_gram())


def test_instance_requires_same_seed(params, rng):
    other = SeedParams(2, 3, 5).canonical()
    s1 = GenericState(params, (np.eye(3),) * 3)
    s2 = GenericState(other, (np.eye(3),) * 3)
    with pytest.raises(ValueError, match="different"):
        sep_instance(s1, s2)


def test_sep_instance_carries_grams(params, rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    target = GenericState(params, (a @ dagger(a) + np.eye(3), np.eye(3), np.eye(3)))
    inst = sep_instance(GenericState(params, (np.eye(3),) * 3), target)
    assert isinstance(inst, SepInstance)
    np.testing.assert_allclose(inst.target_gram.mats[0], gram(target).mats[0], atol=0)


# ---------------------------------------------------------------------------
# the feasibility engine
# ---------------------------------------------------------------------------


def test_seed_to_seed_all_distributions_work(params):
    dec = sep_feasible(gram_instance(params, seed_gram(), seed_gram()))
    assert dec.feasible
    assert dec.affine_dim == 8
    assert len(dec.vertices) == 9
    assert not dec.nontrivial  # nothing new is reached
    assert not dec.unique


def test_seed_to_tiling_unique_uniform(params):
    target = gram_triple(
        two_pair_mat((1, 0), (0, 1)), two_pair_mat((1, 1), (1, 2)), np.eye(3)
    )
    dec = sep_feasible(gram_instance(params, seed_gram(), target))
    assert dec.feasible and dec.unique and dec.nontrivial
    assert len(dec.vertices) == 1
    assert np.max(np.abs(dec.witness - 1.0 / 9.0)) <= 1e-8


def test_seed_to_disjoint_pairs(params):
    target = gram_triple(pair_mat((1, 0)), pair_mat((0, 1)), np.eye(3))
    dec = sep_feasible(gram_instance(params, seed_gram(), target))
    assert dec.feasible and dec.nontrivial
    assert dec.residual <= 1e-9


def test_seed_to_dense_infeasible(params, rng):
    target = gram_triple(dense_mat(rng), dense_mat(rng), dense_mat(rng))
    dec = sep_feasible(gram_instance(params, seed_gram(), target))
    assert not dec.feasible
    assert dec.witness is None
    assert dec.reason is not None
    assert dec.residual > 1e-6


def test_seed_to_confined_infeasible(params, rng):
    """Confined targets are not reachable from the seed itself."""
    target = gram_triple(dense_mat(rng), pair_mat((1, 1)), pair_mat((1, 1), 0.05))
    dec = sep_feasible(gram_instance(params, seed_gram(), target))
    assert not dec.feasible


def test_confined_target_from_induced_initial(params, rng):
    w = (1, 1)
    target = gram_triple(dense_mat(rng), pair_mat(w), pair_mat(w, 0.05))
    cands = candidate_initial_grams(target)
    labels = [lbl for lbl, _ in cands]
    assert labels[0] == "seed"
    assert f"confined-{w}" in labels
    init = dict(cands)[f"confined-{w}"]
    dec = sep_feasible(gram_instance(params, init, target))
    assert dec.feasible and dec.unique and dec.nontrivial
    # witness is the uniform distribution on the confined triple
    expected = triple_dist(w)
    np.testing.assert_allclose(dec.witness, expected, atol=1e-9)


def test_identity_instance_is_trivial(params, rng):
    m = dense_mat(rng)
    gt = gram_triple(m, dense_mat(rng), dense_mat(rng))
    dec = sep_feasible(gram_instance(params, gt, gt))
    assert dec.feasible and dec.unique
    assert not dec.nontrivial
    np.testing.assert_allclose(dec.witness, E0, atol=1e-9)


def test_all_confined_self_instance_has_flat_polytope(params):
    w = (0, 1)
    gt = gram_triple(pair_mat(w, 0.05), pair_mat(w, 0.09), pair_mat(w, 0.12))
    dec = sep_feasible(gram_instance(params, gt, gt))
    assert dec.feasible
    assert dec.affine_dim == 2
    assert len(dec.vertices) == 3
    assert not dec.nontrivial
    assert all(dec.vertex_trivial)


def test_witness_solves_full_tensor_equation(params, rng):
    """Independent 27-dimensional residual check of a returned witness."""
    w = (1, 1)
    target = gram_triple(dense_mat(rng), pair_mat(w), pair_mat(w, 0.05))
    init = dict(candidate_initial_grams(target))[f"confined-{w}"]
    dec = sep_feasible(gram_instance(params, init, target))
    g_op = kron3(*init.mats)
    h_op = kron3(*target.mats)
    acc = np.zeros((27, 27), dtype=complex)
    for p_k, k in zip(dec.witness, INDEX_ORDER):
        s3 = kron3(PAULIS[k], PAULIS[k], PAULIS[k])
        acc += p_k * (dagger(s3) @ h_op @ s3)
    assert np.linalg.norm(acc - g_op) <= 1e-9


def test_witness_spectrum_passes_conditions(params):
    target = gram_triple(
        two_pair_mat((1, 0), (0, 1)), two_pair_mat((1, 1), (1, 2)), np.eye(3)
    )
    dec = sep_feasible(gram_instance(params, seed_gram(), target))
    ok, violations = spectrum_conditions(target.coords, dep_spectrum(dec.witness))
    assert ok, violations
