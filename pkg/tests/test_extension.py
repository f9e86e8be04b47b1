import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfamg.extension import (
    ExtensionPair,
    Kind,
    check_lfa_compatible,
    even_extend,
    even_restrict,
    in_range_of_extension,
    mixed_extend,
    mixed_restrict,
    odd_extend,
    odd_restrict,
)
from lfamg.grid import GridSpec
from lfamg.linear import DenseSolver, LinearMap, SizeGuardError, from_matrix
from lfamg.operators import make_operator

from oracles import extension_1d, restriction_from_extension, tensor_power

KINDS = ["odd", "even", "mixed"]
BC_OF = {"odd": "dirichlet", "even": "neumann", "mixed": "mixed"}


def by_node(v):
    """Periodic storage holds nodes 1..N; reorder to nodes 0..N-1."""
    return np.roll(v, 1)


def test_odd_extend_examples():
    a = 2.5
    np.testing.assert_array_equal(odd_extend([a], 2), [a, 0, -a, 0])
    np.testing.assert_array_equal(odd_extend([1.0, 2.0, 3.0], 4), [1, 2, 3, 0, -3, -2, -1, 0])


def test_odd_extend_2d_pattern():
    a = 1.5
    field = odd_extend([a], 2, d=2).reshape(4, 4, order="F")
    pattern = np.array([1, 0, -1, 0])
    np.testing.assert_array_equal(field, a * np.outer(pattern, pattern))


def test_odd_restrict_examples():
    np.testing.assert_array_equal(odd_restrict([1.0, 0, -1, 0], 2), [1.0])
    np.testing.assert_array_equal(odd_restrict([1.0, 5, 1, 7], 2), [0.0])


def test_odd_round_trip_2d():
    u = np.random.default_rng(3).standard_normal(9)
    assert np.max(np.abs(odd_restrict(odd_extend(u, 4, 2), 4, 2) - u)) <= 1e-15


def test_even_examples():
    a, b, c = 1.0, 2.0, 3.0
    ext = even_extend([a, b, c], 2)
    np.testing.assert_array_equal(by_node(ext), [a, b, c, b])
    np.testing.assert_array_equal(even_restrict(np.roll([a, b, c, b], -1), 2), [a, b, c])
    np.testing.assert_array_equal(even_restrict(np.roll([0.0, 1, 0, 3], -1), 2), [0, 2, 0])


def test_even_restriction_weights():
    R = ExtensionPair(Kind.EVEN, 4).R1
    # rows x_0 and x_n read one periodic entry, interior rows average two
    np.testing.assert_array_equal(np.sum(R, axis=1), [1, 1, 1, 1, 1])
    np.testing.assert_array_equal(np.count_nonzero(R, axis=1), [1, 2, 2, 2, 1])


def test_mixed_examples():
    a, b = 1.25, -0.5
    ext = mixed_extend([a, b], 2)
    np.testing.assert_array_equal(ext, [a, b, a, 0, -a, -b, -a, 0])
    np.testing.assert_array_equal(mixed_restrict(ext, 2), [a, b])


@pytest.mark.parametrize("n", [2, 4, 8])
def test_mixed_odd_symmetry(n):
    u = np.random.default_rng(n).standard_normal(n)
    v = mixed_extend(u, n)
    N = 4 * n
    node = lambda j: v[(j - 1) % N]  # noqa: E731
    for j in range(1, N + 1):
        assert node(N - j) == -node(j)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", [2, 4, 8])
def test_matrices_match_textbook(kind, n):
    pair = ExtensionPair(kind, n)
    E = extension_1d(n, kind)
    np.testing.assert_array_equal(pair.E1, E)
    np.testing.assert_allclose(pair.R1, restriction_from_extension(E), atol=1e-15)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", [2, 4, 8, 16])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_extension_identities(kind, n, d):
    pair = ExtensionPair(kind, n, d)
    rng = np.random.default_rng(n + 10 * d)
    u = rng.standard_normal(pair.source.size)
    assert np.max(np.abs(pair.restrict(pair.extend(u)) - u)) <= 1e-15
    v = pair.extend(u)
    assert np.max(np.abs(pair.extend(pair.restrict(v)) - v)) <= 1e-15


@pytest.mark.parametrize("kind", KINDS)
def test_full_column_rank(kind):
    pair = ExtensionPair(kind, 4, 2)
    E = pair.extend(np.eye(pair.source.size))
    assert np.linalg.matrix_rank(E) == pair.source.size
    np.testing.assert_array_equal(E, tensor_power(extension_1d(4, kind), 2))


def test_in_range_examples():
    odd = ExtensionPair("odd", 2)
    assert in_range_of_extension(np.array([1.0, 0, -1, 0]), odd)
    assert not in_range_of_extension(np.array([1.0, 0, 1, 0]), odd)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_even_vectors_in_range(a, b, c):
    assert in_range_of_extension(np.roll([a, b, c, b], -1), ExtensionPair("even", 2))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(KINDS), st.sampled_from([1, 2]), st.integers(0, 2**32 - 1))
def test_projector_is_idempotent(kind, d, seed):
    pair = ExtensionPair(kind, 4, d)
    v = np.random.default_rng(seed).standard_normal(pair.target.size)
    p = pair.extend(pair.restrict(v))
    assert np.max(np.abs(pair.extend(pair.restrict(p)) - p)) <= 1e-14


def test_size_mismatch():
    with pytest.raises(ValueError):
        odd_extend(np.ones(4), 4)
    with pytest.raises(ValueError):
        odd_restrict(np.ones(7), 4)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("d", [1, 2])
def test_operator_compatible(kind, d):
    pair = ExtensionPair(kind, 4, d)
    rep = check_lfa_compatible(make_operator(pair.source, 1.0), make_operator(pair.target, 1.0), pair)
    assert rep.verdict
    assert rep.operator_defect <= 1e-13 * rep.operator_scale
    assert rep.worst_basis_vector is None


def test_inverse_compatible():
    pair = ExtensionPair("odd", 4)
    inv = lambda A: LinearMap(A.shape, DenseSolver(A.dense()).apply)  # noqa: E731
    rep = check_lfa_compatible(inv(make_operator(pair.source, 1.0)), inv(make_operator(pair.target, 1.0)), pair)
    assert rep.verdict


def test_unscaled_corners_not_compatible():
    pair = ExtensionPair("odd", 4)
    A_P = make_operator(pair.target, 1.0, corner_scaled=False)
    rep = check_lfa_compatible(make_operator(pair.source, 1.0), A_P, pair)
    assert not rep.verdict
    assert rep.worst_basis_vector is not None
    assert rep.invariance_defect > 1.0


@pytest.mark.parametrize("kind", KINDS)
def test_compatibility_of_1d_lifts_to_2d(kind):
    for d in (1, 2):
        pair = ExtensionPair(kind, 4, d)
        assert check_lfa_compatible(make_operator(pair.source, 2.0), make_operator(pair.target, 2.0), pair).verdict


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("d", [1, 2])
def test_solution_extends_to_periodic_solution(kind, d):
    pair = ExtensionPair(kind, 8, d)
    A_D, A_P = make_operator(pair.source, 1.0), make_operator(pair.target, 1.0)
    f = np.random.default_rng(7).standard_normal(pair.source.size)
    u = np.linalg.solve(A_D.dense(), f)
    lhs, rhs = A_P.apply(pair.extend(u)), pair.extend(f)
    assert np.linalg.norm(lhs - rhs) <= 1e-11 * np.linalg.norm(rhs)


def test_verdict_monotone_in_tol_and_detects_corruption():
    pair = ExtensionPair("odd", 4)
    A_D = make_operator(pair.source, 1.0).dense()
    A_P = make_operator(pair.target, 1.0).dense()
    tol = 1e-11
    for bump in (1e-9, 1e-3, 5.0):
        bad = A_D.copy()
        bad[1, 2] += bump * max(1.0, np.abs(A_D).max())
        assert not check_lfa_compatible(from_matrix(bad), from_matrix(A_P), pair, tol=tol).verdict
    bad = A_D.copy()
    bad[0, 0] += 1e-6 * np.abs(A_D).max()
    verdicts = [check_lfa_compatible(from_matrix(bad), from_matrix(A_P), pair, tol=t).verdict
                for t in (1e-12, 1e-9, 1e-7, 1e-5, 1e-3)]
    assert verdicts == sorted(verdicts)  # once true, stays true
    assert verdicts[0] is False and verdicts[-1] is True


def test_checker_shape_and_size_guards():
    pair = ExtensionPair("odd", 4)
    A_P = make_operator(pair.target, 1.0)
    with pytest.raises(ValueError):
        check_lfa_compatible(from_matrix(np.eye(4)), A_P, pair)
    with pytest.raises(SizeGuardError):
        check_lfa_compatible(make_operator(pair.source, 1.0), A_P, pair, limit=2)


def test_report_serializes():
    pair = ExtensionPair("even", 4)
    rep = check_lfa_compatible(make_operator(pair.source, 1.0), make_operator(pair.target, 1.0), pair, name="A")
    out = rep.to_dict()
    assert out["verdict"] is True and out["name"] == "A" and "exhaustive" in out["probe"]
