"""Rotation-angle binary trees for state preparation, packed as QRAM words.

Preparing sum_j v_j |j> descends one tree level per qubit, most significant
bit first.  The node for prefix p at level l holds the rotation angle
theta = 2 atan2(||right subtree||, ||left subtree||); leaf-level nodes also
carry two sign bits so negative entries come out with the right phase.

Each word packs the angle as fixed point (2^-60 rad units, 62 bits) plus the
two sign bits on top, so one 64-bit QRAM load supplies a whole rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ZeroColumnError
from ..qram import QramMemory

ANGLE_UNIT = 2.0 ** -60
_ANGLE_MASK = np.uint64((1 << 62) - 1)
_S0_BIT = np.uint64(62)
_S1_BIT = np.uint64(63)
_ONE = np.uint64(1)


def pack_words(thetas: np.ndarray, neg0=None, neg1=None) -> np.ndarray:
    """Pack angles (radians, in [0, pi]) and optional leaf signs into words."""
    units = np.round(np.asarray(thetas, dtype=np.float64) / ANGLE_UNIT)
    words = units.astype(np.uint64)
    if neg0 is not None:
        words |= np.asarray(neg0, dtype=np.uint64) << _S0_BIT
    if neg1 is not None:
        words |= np.asarray(neg1, dtype=np.uint64) << _S1_BIT
    return words


def decode_words(words: np.ndarray):
    """Inverse of pack_words: (theta, neg0, neg1) arrays."""
    theta = (words & _ANGLE_MASK).astype(np.float64) * ANGLE_UNIT
    neg0 = (words >> _S0_BIT) & _ONE
    neg1 = (words >> _S1_BIT) & _ONE
    return theta, neg0, neg1


@dataclass(frozen=True)
class PrepTree:
    """Per-level rotation angles (and leaf signs) for one target vector."""

    depth: int
    thetas: tuple[np.ndarray, ...]   # level l: 2^l angles indexed by prefix
    leaf_neg0: np.ndarray            # sign bits of even leaves, per last-level prefix
    leaf_neg1: np.ndarray


def _subtree_norms(vec: np.ndarray) -> list[np.ndarray]:
    """norms[l][p] = Euclidean norm of the leaves under prefix p at level l."""
    mags = np.abs(np.asarray(vec, dtype=np.float64))
    levels = [mags]
    while levels[0].size > 1:
        child = levels[0]
        levels.insert(0, np.sqrt(child[0::2] ** 2 + child[1::2] ** 2))
    return levels


def _level_angles(norms: list[np.ndarray],
                  gauge_norms: Optional[list[np.ndarray]]) -> list[np.ndarray]:
    out = []
    for level in range(len(norms) - 1):
        child = norms[level + 1]
        left, right = child[0::2], child[1::2]
        if gauge_norms is not None:
            # zero-mass subtrees leave their rotation angle undetermined;
            # take it from the gauge vector so the angles vary continuously
            # along a path that collapses onto basis vectors at an endpoint
            gchild = gauge_norms[level + 1]
            dead = norms[level] == 0
            left = np.where(dead, gchild[0::2], left)
            right = np.where(dead, gchild[1::2], right)
        out.append(2.0 * np.arctan2(right, left))
    return out


def build_prep_tree(vec: np.ndarray, gauge=None) -> PrepTree:
    """Angle tree preparing vec/||vec|| (real entries, signs at the leaves).

    ``gauge`` supplies angles and signs for zero-mass subtrees, where they do
    not affect the prepared state but do affect smoothness of the resulting
    unitary along a matrix path.
    """
    vec = np.asarray(vec, dtype=np.float64)
    size = vec.size
    depth = size.bit_length() - 1
    if size != 1 << depth or depth < 1:
        raise ValueError("vector length must be a power of two >= 2")
    if not np.linalg.norm(vec) > 0:
        raise ZeroColumnError("cannot prepare the zero vector")
    norms = _subtree_norms(vec)
    gauge_norms = _subtree_norms(np.asarray(gauge, dtype=np.float64)) \
        if gauge is not None else None
    thetas = _level_angles(norms, gauge_norms)
    neg0 = (vec[0::2] < 0).astype(np.uint64)
    neg1 = (vec[1::2] < 0).astype(np.uint64)
    if gauge is not None:
        gauge = np.asarray(gauge, dtype=np.float64)
        dead = np.abs(vec) == 0
        neg0 = np.where(dead[0::2], (gauge[0::2] < 0).astype(np.uint64), neg0)
        neg1 = np.where(dead[1::2], (gauge[1::2] < 0).astype(np.uint64), neg1)
    return PrepTree(depth, tuple(thetas), neg0, neg1)


@dataclass(frozen=True)
class AngleTree:
    """QRAM-resident angle trees for a block encoding of one matrix.

    ``column_levels[l]`` holds the level-l angles of every column tree,
    addressed by (column << l) | prefix.  ``psi_levels[l]`` holds the column-
    norm tree addressed by prefix alone.
    """

    depth: int
    column_levels: tuple[QramMemory, ...]
    psi_levels: tuple[QramMemory, ...]
    frobenius_norm: float


def build_angle_trees(matrix: np.ndarray, gauge=None) -> AngleTree:
    """Trees whose descent prepares each normalized column and the column-norm
    state; negative matrix entries become leaf-level sign flips.

    ``gauge`` (a matrix of the same shape) fixes the angles of zero-mass
    subtrees column by column; see build_prep_tree.
    """
    a = np.asarray(matrix, dtype=np.float64)
    size = a.shape[0]
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    depth = size.bit_length() - 1
    if size != 1 << depth or depth < 1:
        raise ValueError("matrix size must be a power of two >= 2")
    col_norms = np.linalg.norm(a, axis=0)
    for k in range(size):
        if not col_norms[k] > 0:
            raise ZeroColumnError(f"column {k} has zero norm")

    column_levels = []
    col_trees = [build_prep_tree(a[:, k],
                                 gauge[:, k] if gauge is not None else None)
                 for k in range(size)]
    for level in range(depth):
        words = np.empty(size << level, dtype=np.uint64)
        for k, tree in enumerate(col_trees):
            if level == depth - 1:
                chunk = pack_words(tree.thetas[level], tree.leaf_neg0, tree.leaf_neg1)
            else:
                chunk = pack_words(tree.thetas[level])
            words[k << level:(k + 1) << level] = chunk
        column_levels.append(QramMemory(depth + level, 64, words))

    psi_tree = build_prep_tree(col_norms)
    psi_levels = []
    for level in range(depth):
        if level == depth - 1:
            words = pack_words(psi_tree.thetas[level],
                               psi_tree.leaf_neg0, psi_tree.leaf_neg1)
        else:
            words = pack_words(psi_tree.thetas[level])
        psi_levels.append(QramMemory(level, 64, words))

    return AngleTree(depth, tuple(column_levels), tuple(psi_levels),
                     float(np.linalg.norm(a)))


def tree_amplitudes(tree: PrepTree) -> np.ndarray:
    """Reconstruct the prepared amplitudes by walking the tree (test oracle)."""
    amps = np.array([1.0])
    for level in range(tree.depth):
        theta = tree.thetas[level]
        c = np.cos(theta / 2)
        s = np.sin(theta / 2)
        if level == tree.depth - 1:
            c = c * np.where(tree.leaf_neg0, -1.0, 1.0)
            s = s * np.where(tree.leaf_neg1, -1.0, 1.0)
        out = np.empty(amps.size * 2)
        out[0::2] = amps * c
        out[1::2] = amps * s
        amps = out
    return amps
