"""Spherical functions on the chamber and the modified first-moment map.

Three closed forms, all alternating sums over the Weyl group evaluated in
the log domain:

* ``semicharacter``   -- the positive semicharacter prod sinh<a,x>/<a,x>,
* ``spherical_psi``   -- the flat (orbit hypergroup) spherical function,
* ``spherical_phi``   -- the group spherical function, psi / semicharacter,
* ``m1_closed``       -- the chamber-valued moment map driving the walk limit.

The alternating-sum prefactor is pinned by the normalization psi_lambda(0)=1:
with rho the *sum* of positive roots it is pi(rho) / 2**n_roots, i.e.
pi(rho/2).  This is cross-checked against the Haar-integral Monte Carlo
oracle in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .roots import RootSystem, min_root_pairing

#: regularity threshold on min |<alpha, x>|, |<alpha, lambda>|
EPS_REG = 1e-8

#: magnitude of the randomized wall perturbations
_PERTURB = 1e-5

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class SignedLogValue:
    """A real number sign * exp(log_magnitude), safe against overflow."""

    sign: int
    log_magnitude: float

    @classmethod
    def from_real(cls, x: float) -> "SignedLogValue":
        if x == 0.0:
            return cls(0, 0.0)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue(0, 0.0)
        return SignedLogValue(self.sign * other.sign,
                              self.log_magnitude + other.log_magnitude)

    def value(self) -> float:
        return 0.0 if self.sign == 0 else self.sign * math.exp(self.log_magnitude)


def signed_logsumexp(logs, signs) -> SignedLogValue:
    """Sum of sign_i * exp(log_i) with a running max shift."""
    logs = np.asarray(logs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    live = signs != 0
    if not live.any():
        return SignedLogValue(0, 0.0)
    m = logs[live].max()
    total = float(np.sum(signs[live] * np.exp(logs[live] - m)))
    if total == 0.0:
        return SignedLogValue(0, 0.0)
    return SignedLogValue(1 if total > 0 else -1, m + math.log(abs(total)))


@dataclass(frozen=True)
class SphericalValue:
    value: complex
    regularized: bool = False
    est_abs_error: float = 0.0


@lru_cache(maxsize=None)
def _weyl_arrays(family: str, rank: int):
    from .roots import build_root_system, enumerate_weyl

    rs = build_root_system(family, rank)
    elements = enumerate_weyl(rs)
    perms = np.array([w.perm for w in elements])
    signs = np.array([w.signs for w in elements], dtype=float)
    dets = np.array([w.det_sign for w in elements], dtype=float)
    return perms, signs, dets


def _weyl_images(rs: RootSystem, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All w.x stacked as rows, plus the det signs."""
    perms, signs, dets = _weyl_arrays(rs.family, rs.rank)
    return signs * x[perms], dets


def _log_sinhc(t):
    """log(sinh t / t), elementwise, stable at 0 and for large |t|."""
    t = np.abs(np.asarray(t, dtype=float))
    small = t < 1e-4
    ts = np.where(small, t, 0.0)
    tl = np.where(small, 1.0, t)
    out_small = np.log1p(ts * ts / 6.0 + ts**4 / 120.0)
    out_large = tl + np.log1p(-np.exp(-2.0 * tl)) - np.log(2.0 * tl)
    return np.where(small, out_small, out_large)


def log_semicharacter(rs: RootSystem, x) -> float:
    x = _check_vec(rs, x)
    return float(np.sum(_log_sinhc(rs.positive_roots @ x)))


def semicharacter(rs: RootSystem, x) -> float:
    """psi_{-i rho}(x) = prod sinh<a,x>/<a,x>; strictly positive, 1 at x=0."""
    return math.exp(log_semicharacter(rs, x))


def log_semicharacter_rows(rs: RootSystem, xs) -> np.ndarray:
    """log_semicharacter applied to each row of ``xs``."""
    xs = np.asarray(xs, dtype=float)
    return np.sum(_log_sinhc(xs @ rs.positive_roots.T), axis=-1)


def _check_vec(rs: RootSystem, v, dtype=float) -> np.ndarray:
    v = np.asarray(v, dtype=dtype)
    if v.shape != (rs.ambient_dim,):
        raise ValueError(
            f"expected vector of length {rs.ambient_dim}, got shape {v.shape}"
        )
    return v


def _log_pi(rs: RootSystem, v) -> complex:
    # complex log of the alternating polynomial; caller guarantees no factor is 0
    return complex(np.sum(np.log((rs.positive_roots @ v).astype(complex))))


def _log_c0(rs: RootSystem) -> float:
    # normalization constant pi(rho/2), in logs
    return float(np.sum(np.log(rs.positive_roots @ rs.rho))) - rs.n_positive_roots * _LOG2


def _psi_regular(rs: RootSystem, lam: np.ndarray, x: np.ndarray) -> complex:
    wx, dets = _weyl_images(rs, x)
    z = 1j * (wx @ lam)
    m = float(z.real.max())
    s = complex(np.sum(dets * np.exp(z - m)))
    log_ratio = _log_c0(rs) + m - _log_pi(rs, x) - _log_pi(rs, 1j * lam)
    return s * complex(np.exp(log_ratio))


def _phi_regular(rs: RootSystem, lam: np.ndarray, x: np.ndarray) -> complex:
    wx, dets = _weyl_images(rs, x)
    zn = 1j * (wx @ lam)
    zd = wx @ rs.rho
    mn = float(zn.real.max())
    md = float(zd.max())
    sn = complex(np.sum(dets * np.exp(zn - mn)))
    sd = float(np.sum(dets * np.exp(zd - md)))
    log_pi_rho = float(np.sum(np.log(rs.positive_roots @ rs.rho)))
    log_ratio = log_pi_rho - _log_pi(rs, 1j * lam) + (mn - md)
    return (sn / sd) * complex(np.exp(log_ratio))


def _perturbed_average(fn, rs, lam, x) -> SphericalValue:
    # 0/0 on a chamber wall; the function itself is smooth, so average a few
    # nearby regular evaluations and report the spread
    rng = np.random.default_rng(0x5EED)
    vals = []
    for _ in range(4):
        dx = rng.standard_normal(x.shape)
        dx *= _PERTURB / np.linalg.norm(dx)
        if rs.family == "A":
            dx -= dx.mean()
        dl = rng.standard_normal(x.shape)
        dl *= _PERTURB / np.linalg.norm(dl)
        vals.append(fn(rs, lam + dl, x + dx))
    vals = np.array(vals)
    mean = complex(vals.mean())
    spread = float(np.max(np.abs(vals - mean)))
    return SphericalValue(mean, True, spread)


def _eval_spherical(fn, rs: RootSystem, lam, x) -> SphericalValue:
    lam = _check_vec(rs, lam, dtype=complex)
    x = _check_vec(rs, x)
    if not x.any() or not lam.any():
        return SphericalValue(1.0 + 0.0j)
    gap_x = min_root_pairing(rs, x)
    gap_l = min_root_pairing(rs, lam)
    if min(gap_x, gap_l) < EPS_REG:
        return _perturbed_average(fn, rs, lam, x)
    return SphericalValue(fn(rs, lam, x))


def spherical_psi(rs: RootSystem, lam, x) -> SphericalValue:
    """Spherical function of the orbit hypergroup (Harish-Chandra sum form).

    W-invariant in both arguments; equals the Haar integral of
    exp(i<lambda, k.x>) over the compact group.  Near chamber walls the value
    is obtained by perturb-and-average with ``regularized=True``.
    """
    return _eval_spherical(_psi_regular, rs, lam, x)


def spherical_phi(rs: RootSystem, lam, x) -> SphericalValue:
    """Spherical function of the double-coset hypergroup: psi / semicharacter."""
    return _eval_spherical(_phi_regular, rs, lam, x)


def _m1_regular(rs: RootSystem, x: np.ndarray) -> np.ndarray:
    wx, dets = _weyl_images(rs, x)
    e = wx @ rs.rho
    m = float(e.max())
    terms = dets * np.exp(e - m)
    den = float(terms.sum())
    num = terms @ wx
    shift = rs.positive_roots.T @ (1.0 / (rs.positive_roots @ rs.rho))
    return num / den - shift


def m1_closed(rs: RootSystem, x) -> np.ndarray:
    """The modified moment map m1(x), a chamber point with ||m1(x)|| <= ||x||.

    Alternating-sum closed form; exact 0 at x = 0, perturb-and-average on
    chamber walls.
    """
    x = _check_vec(rs, x)
    if not x.any():
        return np.zeros(rs.ambient_dim)
    if min_root_pairing(rs, x) < EPS_REG:
        rng = np.random.default_rng(0x5EED)
        vals = []
        for _ in range(4):
            dx = rng.standard_normal(x.shape)
            dx *= _PERTURB / np.linalg.norm(dx)
            if rs.family == "A":
                dx -= dx.mean()
            vals.append(_m1_regular(rs, x + dx))
        return np.mean(vals, axis=0)
    return _m1_regular(rs, x)


def m1_mc(rs: RootSystem, x, n: int, rng, chunk: int = 100_000):
    """Monte-Carlo estimate of m1(x) from the defining orbit integral.

    Averages (k.x) * exp(<rho, k.x>) over Haar-random orbit elements and
    divides by the closed-form semicharacter.  Returns (estimate, stderr),
    both per coordinate.  Families A, B and D have matrix realizations;
    family C is rejected (use the B<->C spherical-function identity).
    """
    from . import kernels

    x = _check_vec(rs, x)
    if rs.family == "C":
        raise ValueError(
            "family C has no matrix orbit realization; its spherical data "
            "coincides with family B (B<->C identity)"
        )
    if not x.any():
        return np.zeros(rs.ambient_dim), np.zeros(rs.ambient_dim)

    # weights rescaled by exp(-<rho, x>) so they stay in [0, 1]
    c = float(rs.rho @ x)
    log_norm = log_semicharacter(rs, x) - c

    sums = np.zeros(rs.ambient_dim)
    sq_sums = np.zeros(rs.ambient_dim)
    done = 0
    while done < n:
        m = min(chunk, n - done)
        v = kernels.orbit_diagonal_batch(rs, x, m, rng)
        w = np.exp(v @ rs.rho - c)
        vw = v * w[:, None]
        sums += vw.sum(axis=0)
        sq_sums += (vw * vw).sum(axis=0)
        done += m
    mean = sums / n
    var = np.maximum(sq_sums / n - mean**2, 0.0)
    scale = math.exp(-log_norm)
    return mean * scale, np.sqrt(var / n) * scale


def m1_expectation(rs: RootSystem, atoms, weights) -> np.ndarray:
    """Integral of m1 against a finite measure sum_i weights_i * delta_atoms_i."""
    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if atoms.shape[0] != weights.shape[0]:
        raise ValueError("one weight per atom required")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1 within 1e-12")
    out = np.zeros(rs.ambient_dim)
    for a, w in zip(atoms, weights):
        if w:
            out += w * m1_closed(rs, a)
    return out
