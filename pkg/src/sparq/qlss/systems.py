"""Random linear systems with a prescribed condition number."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import BadDimensionError


class Variant(enum.Enum):
    POSITIVE_DEFINITE = "pd"
    NON_HERMITIAN = "nh"


@dataclass(frozen=True)
class LinearSystem:
    """A x = b instance: real N x N matrix, unit rhs, known condition number."""

    matrix: np.ndarray
    rhs: np.ndarray
    kappa: float
    variant: Variant
    n: int  # N = 2^n

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def haar_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthogonal matrix via sign-fixed QR of a Gaussian."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def gen_linear_system(n: int, kappa: float, variant: Variant,
                      seed) -> LinearSystem:
    """Sample a system with singular values geometric on [1/kappa, 1].

    Positive-definite: A = Q diag(sigma) Q^T with one random orthogonal Q, so
    eigenvalues equal sigma and cond(A) = kappa exactly.  Non-Hermitian:
    A = U diag(sigma) V^T with independent orthogonal factors.  The rhs is the
    normalized all-ones vector.
    """
    if n not in (2, 3, 4):
        raise BadDimensionError(f"n must be 2, 3 or 4 (N in 4, 8, 16); got {n}")
    if not kappa > 1:
        raise BadDimensionError(f"kappa must exceed 1; got {kappa}")
    size = 1 << n
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sigma = np.geomspace(1.0 / kappa, 1.0, size)
    if variant is Variant.POSITIVE_DEFINITE:
        q = haar_orthogonal(size, rng)
        a = (q * sigma) @ q.T
        a = 0.5 * (a + a.T)  # kill QR round-off asymmetry
    else:
        u = haar_orthogonal(size, rng)
        v = haar_orthogonal(size, rng)
        a = (u * sigma) @ v.T
    b = np.ones(size) / np.sqrt(size)
    return LinearSystem(a, b, float(kappa), variant, n)
