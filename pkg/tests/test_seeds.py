import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutritlocc.pauli import INDEX_ORDER, OMEGA, PAULIS, apply3
from qutritlocc.seeds import (
    GENERIC_THRESHOLD,
    SeedParams,
    adjugate,
    build_seed,
    check_generic,
    dense_candidates,
    monomial_candidates,
    probe_states,
    projection_residual,
    seed_circulant_blocks,
    symmetry_audit,
    verify_symmetries,
    _exclusion_polynomials,
)

# amplitude slots of the seed vector in the |ijk> -> 9i+3j+k indexing
A_SLOTS = (0, 13, 26)
B_SLOTS = (5, 19, 15)
C_SLOTS = (7, 21, 11)

amplitudes = st.complex_numbers(
    min_magnitude=0.0, max_magnitude=5.0, allow_nan=False, allow_infinity=False
)


def test_amplitude_placement():
    v = build_seed(SeedParams(2, 3, 5))
    for i in A_SLOTS:
        assert v[i] == 2
    for i in B_SLOTS:
        assert v[i] == 3
    for i in C_SLOTS:
        assert v[i] == 5
    rest = set(range(27)) - set(A_SLOTS) - set(B_SLOTS) - set(C_SLOTS)
    assert all(v[i] == 0 for i in rest)


def test_degenerate_placements():
    np.testing.assert_allclose(np.nonzero(build_seed(SeedParams(1, 0, 0)))[0], A_SLOTS)
    np.testing.assert_allclose(
        np.nonzero(build_seed(SeedParams(0, 1, 0)))[0], sorted(B_SLOTS)
    )


@given(a=amplitudes, b=amplitudes, c=amplitudes)
def test_norm_squared(a, b, c):
    v = build_seed(SeedParams(a, b, c))
    expected = 3 * (abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2)
    assert abs(np.linalg.norm(v) ** 2 - expected) <= 1e-9 * max(expected, 1.0)


def test_canonical_gauge():
    p = SeedParams(2j, 3, 5).canonical()
    assert p.is_canonical()
    assert abs(p.norm() - 1.0) <= 1e-12
    assert p.a.imag == pytest.approx(0.0, abs=1e-12) and p.a.real > 0
    # idempotent
    assert p.canonical().close_to(p, 1e-12)
    # zero leading entry: gauge fixed on the first nonzero one
    q = SeedParams(0, 1j, 1).canonical()
    assert q.is_canonical()
    assert abs(q.b.imag) <= 1e-12 and q.b.real > 0


def test_canonical_rejects_zero():
    with pytest.raises(ValueError):
        SeedParams(0, 0, 0).canonical()


def test_exclusion_list_size():
    polys = _exclusion_polynomials(0.3 + 0.1j, 0.5, 0.7 - 0.2j)
    assert len(polys) == 22
    names = [name for name, _, _ in polys]
    assert len(set(names)) == 22
    assert all(deg >= 1 for _, _, deg in polys)


def test_generic_example_seed():
    report = check_generic(SeedParams(2, 3, 5).canonical())
    assert report.generic
    assert report.violations == ()
    assert report.margin > GENERIC_THRESHOLD


def test_vanishing_amplitude_is_excluded():
    report = check_generic(SeedParams(0, 1, 1).canonical())
    assert not report.generic
    assert any(name == "a" for name, _ in report.violations)


def test_equal_amplitudes_are_excluded():
    """a = b lands on the ninth-power coincidence locus."""
    report = check_generic(SeedParams(1, 1, 2).canonical())
    assert not report.generic
    assert any("a^9" in name or "b^9" in name for name, _ in report.violations)
    report = check_generic(SeedParams(1, 1, 1).canonical())
    assert not report.generic


def test_scale_invariance_of_margin():
    small = check_generic(SeedParams(0.02, 0.03, 0.05))
    canon = check_generic(SeedParams(2, 3, 5).canonical())
    assert small.generic == canon.generic
    assert small.margin == pytest.approx(canon.margin, rel=1e-9)


def test_verify_symmetries(params):
    assert verify_symmetries(params) <= 1e-10


def test_single_party_shift_is_not_a_symmetry():
    v = build_seed(SeedParams(2, 3, 5).canonical())
    s = PAULIS[(1, 0)]
    moved = apply3(s, np.eye(3), np.eye(3), v)
    assert np.linalg.norm(moved - v) / np.linalg.norm(v) > 0.5


def test_probes_annihilate_seed():
    for triple in [(2, 3, 5), (1 + 1j, 0.4, 2 - 0.3j), (1, 1, 1), (0, 1, 2)]:
        params = SeedParams(*triple)
        t = build_seed(params).reshape(3, 3, 3)
        out = np.einsum("ijk,xjk->ix", probe_states(params).conj(), t)
        np.testing.assert_allclose(out, np.zeros((9, 3)), atol=1e-12)


def test_projection_residual_on_symmetries(params):
    assert projection_residual(np.eye(3), np.eye(3), params) <= 1e-12
    for k in INDEX_ORDER:
        assert projection_residual(PAULIS[k], PAULIS[k], params) <= 1e-12


def test_projection_residual_rejects_mismatch(params, rng):
    # mismatched Pauli pairs fail the screen
    assert projection_residual(PAULIS[(1, 0)], PAULIS[(0, 1)], params) > 1e-3
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    c = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert projection_residual(b, c, params) > 1e-2


def test_circulant_blocks_shape_and_content():
    params = SeedParams(2, 3, 5)
    blocks = seed_circulant_blocks(np.eye(3, dtype=complex), params)
    assert blocks.shape == (3, 3, 3)
    # identity candidate keeps one circulant entry per block row,
    # anchored at the a-amplitude in the corner
    assert blocks[0][0, 0] == 2
    for i in range(3):
        assert np.count_nonzero(blocks[i]) == 3
    blocks_x = seed_circulant_blocks(PAULIS[(1, 0)], params)
    for i in range(3):
        assert np.count_nonzero(blocks_x[i]) == 3
        assert abs(np.linalg.det(blocks_x[i])) > 0


def test_adjugate_identity(rng):
    for _ in range(20):
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        np.testing.assert_allclose(
            adjugate(m) @ m, np.linalg.det(m) * np.eye(3), atol=1e-10
        )


def test_adjugate_of_singular():
    m = np.array([[1, 2, 3], [4, 5, 6], [5, 7, 9]], dtype=complex)  # rank 2
    np.testing.assert_allclose(adjugate(m) @ m, np.zeros((3, 3)), atol=1e-12)


def test_monomial_candidates():
    mats = monomial_candidates()
    assert mats.shape == (54, 3, 3)
    for m in mats:
        assert np.count_nonzero(m) == 3
        assert np.count_nonzero(m, axis=0).tolist() == [1, 1, 1]
        assert np.count_nonzero(m, axis=1).tolist() == [1, 1, 1]
        entries = m[np.nonzero(m)]
        np.testing.assert_allclose(np.abs(entries), 1.0, atol=1e-12)
    # every Pauli operator appears projectively exactly once
    for k in INDEX_ORDER:
        s = PAULIS[k]
        hits = [
            m
            for m in mats
            if abs(np.vdot(s, m)) / (np.linalg.norm(s) * np.linalg.norm(m)) > 1 - 1e-12
        ]
        assert len(hits) == 1


def test_dense_candidates():
    mats = dense_candidates()
    assert mats.shape == (162, 3, 3)
    assert np.all(np.abs(mats) > 0.999)
    # distinct as projective classes (top-left entry is 1 in all of them)
    flat = mats.reshape(162, 9).round(9)
    assert len({tuple(row) for row in flat}) == 162


def test_audit_is_clean_on_generic_seed(params):
    report = symmetry_audit(params)
    assert report.clean
    assert report.n_candidates == 216
    assert report.n_pairs == 216**2
    assert len(report.survivors) == 9
    assert report.surplus == ()
    assert {r.pauli for r in report.survivors} == set(INDEX_ORDER)
    assert report.max_full_residual <= 1e-8
    for r in report.survivors:
        assert r.projection_residual <= 1e-8
        assert r.b_label.startswith("monomial:")


def test_audit_refuses_non_generic():
    with pytest.raises(ValueError, match="generic"):
        symmetry_audit(SeedParams(1, 1, 2).canonical())
