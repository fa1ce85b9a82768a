"""Root data for the classical families A, B, C and D.

Everything downstream (spherical functions, samplers, walks) consumes the
objects built here: the positive roots, the vector rho (sum of the positive
roots), the Weyl group as signed permutations, and the closed chamber C.

Conventions: vectors live in R^ambient_dim with the standard dot product.
For family A the ambient dimension is rank+1 and all roots and chamber
points have coordinate sum zero.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FAMILIES = ("A", "B", "C", "D")

_MIN_RANK = {"A": 1, "B": 2, "C": 3, "D": 4}

#: refuse to enumerate Weyl groups larger than this
WEYL_ENUM_LIMIT = 10**6

_A_SUM_TOL = 1e-9


class RootSystemError(ValueError):
    pass


@dataclass(frozen=True)
class RootSystem:
    family: str
    rank: int
    ambient_dim: int
    positive_roots: np.ndarray  # (n_roots, ambient_dim), read-only
    rho: np.ndarray             # (ambient_dim,), read-only
    weyl_order: int

    @property
    def n_positive_roots(self) -> int:
        return self.positive_roots.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "family": self.family,
                "rank": self.rank,
                "positive_roots": self.positive_roots.tolist(),
                "rho": self.rho.tolist(),
                "weyl_order": self.weyl_order,
            }
        )


@dataclass(frozen=True)
class WeylElement:
    """A signed permutation: (w.v)[i] = signs[i] * v[perm[i]]."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]
    det_sign: int


def _perm_sign(perm) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def build_root_system(family: str, rank: int) -> RootSystem:
    """Build the root data for ``family`` in {A, B, C, D} at the given rank.

    Rank bounds follow the classical series: A needs rank >= 1, B >= 2,
    C >= 3, D >= 4.
    """
    if family not in FAMILIES:
        raise RootSystemError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if rank < _MIN_RANK[family]:
        raise RootSystemError(
            f"family {family} requires rank >= {_MIN_RANK[family]}, got {rank}"
        )

    if family == "A":
        dim = rank + 1
        roots = [_e(i, dim) - _e(j, dim) for i in range(dim) for j in range(i + 1, dim)]
        order = math.factorial(dim)
    else:
        dim = rank
        roots = [
            _e(i, dim) - _e(j, dim) for i in range(dim) for j in range(i + 1, dim)
        ] + [
            _e(i, dim) + _e(j, dim) for i in range(dim) for j in range(i + 1, dim)
        ]
        if family == "B":
            roots += [_e(i, dim) for i in range(dim)]
            order = 2**rank * math.factorial(rank)
        elif family == "C":
            roots += [2.0 * _e(i, dim) for i in range(dim)]
            order = 2**rank * math.factorial(rank)
        else:  # D
            order = 2 ** (rank - 1) * math.factorial(rank)

    mat = np.array(roots)
    rho = mat.sum(axis=0)
    mat.setflags(write=False)
    rho.setflags(write=False)
    return RootSystem(family, rank, dim, mat, rho, order)


def _e(i: int, dim: int) -> np.ndarray:
    v = np.zeros(dim)
    v[i] = 1.0
    return v


@lru_cache(maxsize=None)
def _enumerate_weyl_cached(family: str, rank: int) -> tuple[WeylElement, ...]:
    rs = build_root_system(family, rank)
    if rs.weyl_order > WEYL_ENUM_LIMIT:
        raise RootSystemError(
            f"Weyl group of {family}_{rank} has {rs.weyl_order} elements, "
            f"above the enumeration guard {WEYL_ENUM_LIMIT}; lower the rank"
        )
    dim = rs.ambient_dim
    elements = []
    if family == "A":
        sign_patterns = [tuple([1] * dim)]
    elif family == "D":
        sign_patterns = [
            s for s in itertools.product((1, -1), repeat=dim) if np.prod(s) == 1
        ]
    else:
        sign_patterns = list(itertools.product((1, -1), repeat=dim))
    for perm in itertools.permutations(range(dim)):
        ps = _perm_sign(perm)
        for signs in sign_patterns:
            det = ps * int(np.prod(signs))
            elements.append(WeylElement(perm, signs, det))
    assert len(elements) == rs.weyl_order
    return tuple(elements)


def enumerate_weyl(rs: RootSystem) -> tuple[WeylElement, ...]:
    """All Weyl group elements as signed permutations (guarded at 10^6)."""
    return _enumerate_weyl_cached(rs.family, rs.rank)


def apply_weyl(w: WeylElement, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != len(w.perm):
        raise ValueError(f"dimension mismatch: element acts on {len(w.perm)} coords")
    return np.asarray(w.signs) * v[..., list(w.perm)]


def chamber_project(rs: RootSystem, v) -> np.ndarray:
    """The unique chamber representative of the Weyl orbit of ``v``.

    Family A inputs must have coordinate sum within 1e-9 of zero; they are
    re-centered exactly before sorting.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (rs.ambient_dim,):
        raise ValueError(
            f"expected vector of length {rs.ambient_dim}, got shape {v.shape}"
        )
    if rs.family == "A":
        if abs(v.sum()) > _A_SUM_TOL:
            raise ValueError(
                f"A-family vector must have zero coordinate sum, got {v.sum():g}"
            )
        v = v - v.mean()
        return np.sort(v)[::-1].copy()
    out = np.sort(np.abs(v))[::-1]
    if rs.family == "D" and int(np.sum(v < 0)) % 2 == 1:
        # odd number of sign flips absorbed into the last coordinate;
        # a zero coordinate makes the negation a no-op, which is correct
        out[-1] = -out[-1]
    return out


def in_chamber(rs: RootSystem, x, tol: float = 1e-12) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (rs.ambient_dim,):
        return False
    d = np.diff(x)
    if np.any(d > tol):
        return False
    if rs.family == "A":
        return abs(x.sum()) <= max(tol, _A_SUM_TOL)
    if rs.family in ("B", "C"):
        return x[-1] >= -tol
    return x[-2] >= abs(x[-1]) - tol  # D


def alt_polynomial(rs: RootSystem, v) -> complex:
    """The alternating polynomial pi(v): product of <alpha, v> over positive roots."""
    v = np.asarray(v)
    if v.shape != (rs.ambient_dim,):
        raise ValueError(
            f"expected vector of length {rs.ambient_dim}, got shape {v.shape}"
        )
    return complex(np.prod(rs.positive_roots @ v.astype(complex)))


def min_root_pairing(rs: RootSystem, v) -> float:
    """min over positive roots of |<alpha, v>|; zero iff v lies on a wall."""
    v = np.asarray(v)
    return float(np.min(np.abs(rs.positive_roots @ v)))
