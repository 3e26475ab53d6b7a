"""Overlapping subgroups, the combinatorial matrix, sample covariances and eigenspectra.

Functions accept a single matrix or a stack of them (leading batch axes), so
the Monte Carlo loop runs the exact same code as a one-off call.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .signal_model import Stacking, ReceivedMatrix


@dataclass
class CombinatorialMatrix:
    data: np.ndarray
    p: int
    m_prime: int
    stacking: Stacking


def _as_array(X):
    return X.data if isinstance(X, ReceivedMatrix) else np.asarray(X)


def _check_overlap(M, p):
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= M - 1:
        raise ConfigError(f"overlap p must lie in [1, {M - 1}] for M={M}, got {p!r}")


def build_subgroups(X, p):
    """The p sliding windows of M' = M-p+1 consecutive sensor rows."""
    X = _as_array(X)
    M = X.shape[-2]
    _check_overlap(M, p)
    m_prime = M - p + 1
    return [X[..., i:i + m_prime, :] for i in range(p)]


def build_combinatorial(X, p, stacking=Stacking.HORIZONTAL) -> CombinatorialMatrix:
    X = _as_array(X)
    stacking = Stacking(stacking)
    groups = build_subgroups(X, p)
    if p == 1:
        data = X
    else:
        axis = -1 if stacking is Stacking.HORIZONTAL else -2
        data = np.concatenate(groups, axis=axis)
    return CombinatorialMatrix(data, p, X.shape[-2] - p + 1, stacking)


def sample_covariance(Y):
    """(1/N) Y Y^H with its asymmetric rounding removed.

    N is the number of snapshots of the original received matrix; for a
    horizontally stacked combinatorial matrix pass the ``CombinatorialMatrix``
    so the normalization stays 1/N rather than 1/(pN).
    """
    if isinstance(Y, CombinatorialMatrix):
        n = Y.data.shape[-1] // (Y.p if Y.stacking is Stacking.HORIZONTAL else 1)
        Y = Y.data
    else:
        Y = _as_array(Y)
        n = Y.shape[-1]
    if n < 1:
        raise ValueError("need at least one sample")
    YH = np.conj(Y).swapaxes(-1, -2)
    # overflow surfaces as non-finite entries, rejected by the eigensolver
    with np.errstate(over="ignore", invalid="ignore"):
        C = (Y @ YH) / n
        return 0.5 * (C + np.conj(C).swapaxes(-1, -2))


def assemble_covariance_from_blocks(R, p, stacking=Stacking.HORIZONTAL):
    """Covariance of the combinatorial matrix rebuilt from R alone.

    Vertical: block (i, j) is R[i:i+M', j:j+M'].
    Horizontal: the sum of the diagonal blocks R[i:i+M', i:i+M'].
    """
    R = np.asarray(R)
    M = R.shape[-1]
    _check_overlap(M, p)
    if p == 1:
        return R
    mp = M - p + 1
    if Stacking(stacking) is Stacking.HORIZONTAL:
        return sum(R[..., i:i + mp, i:i + mp] for i in range(p))
    rows = [np.concatenate([R[..., i:i + mp, j:j + mp] for j in range(p)], axis=-1)
            for i in range(p)]
    return np.concatenate(rows, axis=-2)


def combinatorial_covariance(X, p, stacking=Stacking.HORIZONTAL):
    """R' straight from the received data."""
    return sample_covariance(build_combinatorial(X, p, stacking))


def eigvals_hermitian(C):
    """Eigenvalues of a Hermitian matrix (or stack), sorted descending."""
    C = np.asarray(C)
    ok = np.isfinite(C).all(axis=(-2, -1))
    if not np.all(ok):
        index = int(np.flatnonzero(~ok.reshape(-1))[0]) if C.ndim > 2 else None
        raise NumericError("non-finite covariance entries", index=index)
    return np.linalg.eigvalsh(C)[..., ::-1]


def trace(C):
    """Real trace; the imaginary residue must be negligible."""
    C = np.asarray(C)
    t = np.trace(C, axis1=-2, axis2=-1)
    if np.iscomplexobj(t):
        scale = np.maximum(np.abs(t), np.finfo(float).tiny)
        if np.any(np.abs(t.imag) > 1e-12 * scale):
            raise NumericError("trace has a non-negligible imaginary part")
        t = t.real
    return t
