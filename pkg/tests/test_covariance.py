import math

import numpy as np
import pytest

from eigsense.covariance import (
    assemble_covariance_from_blocks,
    build_combinatorial,
    build_subgroups,
    combinatorial_covariance,
    eigvals_hermitian,
    sample_covariance,
    trace,
)
from eigsense.errors import ConfigError, NumericError
from eigsense.signal_model import ReceivedMatrix, Stacking

from conftest import random_matrix


def loop_covariance(Y):
    L, N = Y.shape
    C = np.zeros((L, L), dtype=complex)
    for i in range(L):
        for j in range(L):
            C[i, j] = sum(Y[i, n] * np.conj(Y[j, n]) for n in range(N)) / N
    return C


def cubic_eigenvalues(H):
    """Roots of det(lam I - H) for 3x3 Hermitian H by the trigonometric cubic formula."""
    a = -np.trace(H).real
    b = (H[0, 0] * H[1, 1] + H[0, 0] * H[2, 2] + H[1, 1] * H[2, 2]
         - abs(H[0, 1]) ** 2 - abs(H[0, 2]) ** 2 - abs(H[1, 2]) ** 2).real
    c = -np.linalg.det(H).real
    # depressed cubic t^3 + P t + Q with lam = t - a/3
    P = b - a * a / 3
    Q = 2 * a ** 3 / 27 - a * b / 3 + c
    r = 2 * math.sqrt(-P / 3)
    phi = math.acos(max(-1.0, min(1.0, 3 * Q / (P * r))))
    roots = [r * math.cos((phi - 2 * math.pi * k) / 3) - a / 3 for k in range(3)]
    return sorted(roots, reverse=True)


def test_subgroups_match_index_sets(rng):
    X = random_matrix(rng, 3, 5)
    g = build_subgroups(X, 2)
    np.testing.assert_array_equal(g[0], X[[0, 1]])
    np.testing.assert_array_equal(g[1], X[[1, 2]])

    X4 = random_matrix(rng, 4, 5)
    groups = build_subgroups(X4, 3)
    assert len(groups) == 3
    for i, grp in enumerate(groups):
        np.testing.assert_array_equal(grp, X4[[i, i + 1]])

    (only,) = build_subgroups(X4, 1)
    np.testing.assert_array_equal(only, X4)
    with pytest.raises(ConfigError):
        build_subgroups(X4, 4)
    with pytest.raises(ConfigError):
        build_subgroups(X4, 0)


def test_combinatorial_vertical_layout(rng):
    X = random_matrix(rng, 3, 6)
    Xc = build_combinatorial(X, 2, "vertical")
    assert Xc.data.shape == (4, 6) and Xc.m_prime == 2 and Xc.p == 2
    np.testing.assert_array_equal(Xc.data, X[[0, 1, 1, 2]])
    assert build_combinatorial(random_matrix(rng, 8, 200), 7, "vertical").data.shape == (14, 200)


def test_combinatorial_horizontal_layout(rng):
    X = random_matrix(rng, 3, 6)
    Xc = build_combinatorial(ReceivedMatrix(X), 2, Stacking.HORIZONTAL)
    assert Xc.data.shape == (2, 12)
    np.testing.assert_array_equal(Xc.data[:, :6], X[[0, 1]])
    np.testing.assert_array_equal(Xc.data[:, 6:], X[[1, 2]])
    assert build_combinatorial(random_matrix(rng, 8, 200), 7).data.shape == (2, 1400)


@pytest.mark.parametrize("stacking", list(Stacking))
def test_p1_is_the_received_matrix(rng, stacking):
    X = random_matrix(rng, 5, 9)
    np.testing.assert_array_equal(build_combinatorial(X, 1, stacking).data, X)
    R = sample_covariance(X)
    np.testing.assert_array_equal(combinatorial_covariance(X, 1, stacking), R)
    np.testing.assert_array_equal(assemble_covariance_from_blocks(R, 1, stacking), R)


def test_sample_covariance_examples(rng):
    np.testing.assert_array_equal(sample_covariance(np.zeros((3, 4))), np.zeros((3, 3)))
    np.testing.assert_array_equal(sample_covariance(np.ones((1, 7))), [[1.0]])
    Y = random_matrix(rng, 3, 4)
    C = sample_covariance(Y)
    ref = loop_covariance(Y)
    assert np.max(np.abs(C - ref)) <= 1e-12 * np.max(np.abs(ref))
    np.testing.assert_array_equal(C, C.conj().T)


def test_horizontal_covariance_keeps_one_over_n(rng):
    X = random_matrix(rng, 4, 10)
    Xc = build_combinatorial(X, 2)
    direct = Xc.data @ Xc.data.conj().T / 10
    np.testing.assert_allclose(sample_covariance(Xc), direct, rtol=1e-13)


def test_block_assembly_layout_m3_p2(rng):
    X = random_matrix(rng, 3, 8)
    R = sample_covariance(X)
    Rp = assemble_covariance_from_blocks(R, 2, "vertical")
    assert Rp.shape == (4, 4)
    # 1-based (1,4) is r_13, (2,3) is r_22
    assert Rp[0, 3] == R[0, 2]
    assert Rp[1, 2] == R[1, 1]
    Rh = assemble_covariance_from_blocks(R, 2, "horizontal")
    np.testing.assert_array_equal(Rh, R[:2, :2] + R[1:, 1:])


@pytest.mark.parametrize("stacking", list(Stacking))
def test_construction_paths_agree(rng, stacking):
    for _ in range(100):
        M = int(rng.integers(2, 9))
        p = int(rng.integers(1, M))
        N = int(rng.integers(4, 201))
        X = random_matrix(rng, M, N, complex_=bool(rng.integers(2)))
        direct = combinatorial_covariance(X, p, stacking)
        blocks = assemble_covariance_from_blocks(sample_covariance(X), p, stacking)
        assert direct.shape == blocks.shape
        assert np.max(np.abs(direct - blocks)) <= 1e-10 * np.max(np.abs(direct))


def test_eigvals_examples(rng):
    np.testing.assert_allclose(eigvals_hermitian(np.eye(5)), np.ones(5))
    v = np.array([1.0, 2.0, 0.0]) + 1j * np.array([0.0, 0.0, 0.0])
    ev = eigvals_hermitian(np.outer(v, v.conj()))
    np.testing.assert_allclose(ev, [5, 0, 0], atol=1e-14)
    for _ in range(20):
        A = random_matrix(rng, 3, 3)
        H = (A + A.conj().T) / 2
        np.testing.assert_allclose(eigvals_hermitian(H), cubic_eigenvalues(H), atol=1e-8)


def test_eigvals_sorted_and_trace_consistent(rng):
    for _ in range(50):
        C = sample_covariance(random_matrix(rng, 7, 30))
        ev = eigvals_hermitian(C)
        assert np.all(np.diff(ev) <= 0)
        assert ev.sum() == pytest.approx(trace(C), rel=1e-10)
        assert ev[-1] >= -1e-10 * max(1.0, ev[0])


def test_eigvals_rejects_non_finite():
    C = np.eye(3)
    C[1, 1] = np.nan
    with pytest.raises(NumericError):
        eigvals_hermitian(C)
    batch = np.stack([np.eye(2), np.full((2, 2), np.inf)])
    with pytest.raises(NumericError) as info:
        eigvals_hermitian(batch)
    assert info.value.index == 1


def test_trace_examples(rng):
    assert trace(np.eye(6)) == 6
    assert trace(np.zeros((4, 4))) == 0
    X = random_matrix(rng, 6, 40)
    R = sample_covariance(X)
    M, p = 6, 2
    mp = M - p + 1
    expected = sum(R[m, m].real for i in range(p) for m in range(i, i + mp))
    for stacking in Stacking:
        Rp = combinatorial_covariance(X, p, stacking)
        assert trace(Rp) == pytest.approx(expected, rel=1e-12)
        assert trace(Rp) == pytest.approx(np.sum(np.diag(Rp)).real, rel=1e-14)
    with pytest.raises(NumericError):
        trace(np.diag([1 + 1j, 1.0]))


def test_batched_calls_match_single_calls(rng):
    X = np.stack([random_matrix(rng, 6, 20) for _ in range(4)])
    batch = eigvals_hermitian(combinatorial_covariance(X, 3))
    for k in range(4):
        np.testing.assert_array_equal(batch[k], eigvals_hermitian(combinatorial_covariance(X[k], 3)))
