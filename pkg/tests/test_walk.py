import json
import math

import numpy as np
import pytest

from chamberwalk import kernels, walk
from chamberwalk.roots import build_root_system
from chamberwalk.special import m1_closed, m1_expectation, semicharacter
from chamberwalk.walk import (
    CrosscheckReport,
    ProductAccumulator,
    WalkConfig,
    euclidean_walk_crosscheck,
    mz_rate_scan,
    qr_accumulate,
    rejection_rate,
    run_group_walk,
    sample_orbit_weighted,
    substream,
    tilted_orbit_batch,
)


def test_substream_determinism_and_independence():
    a1 = substream(7, 0).standard_normal(4)
    a2 = substream(7, 0).standard_normal(4)
    b = substream(7, 1).standard_normal(4)
    c = substream(8, 0).standard_normal(4)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    assert not np.array_equal(a1, c)


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(d=2, atoms=[[1.0, -1.0]], weights=[0.5], n_steps=10)  # not a prob vector
    with pytest.raises(ValueError):
        WalkConfig(d=2, atoms=[[-1.0, 1.0]], weights=[1.0], n_steps=10)  # not in chamber
    with pytest.raises(ValueError):
        WalkConfig(d=2, atoms=[[1.0, -1.0]], weights=[1.0], n_steps=0)
    with pytest.raises(ValueError):
        WalkConfig(d=2, atoms=[[6.0, -6.0]], weights=[1.0], n_steps=10)  # norm cap
    with pytest.raises(ValueError):
        WalkConfig(d=2, atoms=[[1.0, -1.0]], weights=[1.0], n_steps=10, r_exponent=2.0)


def test_walk_config_from_json():
    cfg = WalkConfig.from_json(json.dumps({
        "d": 2, "atoms": [[0.5, -0.5]], "weights": [1.0], "n_steps": 64, "seed": 3,
    }))
    assert cfg.d == 2 and cfg.n_steps == 64 and cfg.seed == 3
    assert cfg.n_replicas == 1 and cfg.r_exponent == 1.0


def test_accumulator_matches_direct_product():
    rng = substream(2, 0)
    for d in (2, 3):
        x = np.linspace(0.2, -0.2, d)
        x -= x.mean()
        acc = ProductAccumulator(d)
        prod = np.eye(d, dtype=complex)
        for _ in range(40):
            z = kernels.sample_biinvariant(x, rng)
            acc = qr_accumulate(acc, z)
            prod = prod @ z
        assert np.allclose(acc.readout(), kernels.log_singular_spectrum(prod), atol=1e-8)


def test_accumulator_survives_long_products():
    # 5000 steps would overflow a naive product (log sigma ~ 0.5 * 5000)
    rng = substream(2, 1)
    x = np.array([1.0, -1.0])
    acc = ProductAccumulator(2)
    for _ in range(5000):
        acc.update(kernels.sample_biinvariant(x, rng))
    out = acc.readout()
    assert np.all(np.isfinite(out))
    assert abs(out.sum()) < 1e-9
    # per-step drift approaches m1(x) ~ 0.5373
    assert abs(out[0] / 5000 - 0.5373147207275482) < 0.05


def test_run_group_walk_converges_to_m1():
    cfg = WalkConfig(d=2, atoms=[[0.5, -0.5]], weights=[1.0], n_steps=3000,
                     n_replicas=2, seed=5)
    rep = run_group_walk(cfg)
    rs = build_root_system("A", 1)
    assert np.allclose(rep.limit_c, m1_closed(rs, [0.5, -0.5]))
    assert rep.final_error <= 0.05
    assert len(rep.final_errors) == 2
    assert rep.checkpoints[-1] == 3000


def test_run_group_walk_mixture_limit():
    atoms = [[1.0, 0.0, -1.0], [0.5, 0.0, -0.5]]
    weights = [0.25, 0.75]
    cfg = WalkConfig(d=3, atoms=atoms, weights=weights, n_steps=2000, seed=6)
    rep = run_group_walk(cfg)
    rs = build_root_system("A", 2)
    assert np.allclose(rep.limit_c, m1_expectation(rs, np.array(atoms), np.array(weights)))
    assert rep.final_error <= 0.08


def test_run_group_walk_deterministic():
    cfg = WalkConfig(d=2, atoms=[[0.5, -0.5]], weights=[1.0], n_steps=200, seed=9)
    r1 = run_group_walk(cfg)
    r2 = run_group_walk(cfg)
    assert r1.to_json() == r2.to_json()
    assert r1.to_csv() == r2.to_csv()


def test_walk_report_csv_shape():
    cfg = WalkConfig(d=2, atoms=[[0.5, -0.5]], weights=[1.0], n_steps=100, seed=1)
    rep = run_group_walk(cfg)
    lines = rep.to_csv().strip().splitlines()
    assert lines[0] == "n,q1_over_n,q2_over_n,mz_scaled_dev"
    assert len(lines) == len(rep.checkpoints) + 1


def test_rejection_rate_closed_form():
    rs = build_root_system("A", 1)
    x = np.array([1.0, -1.0])
    assert np.isclose(rejection_rate(rs, x), math.sinh(2.0) / (2.0 * math.exp(2.0)))
    assert np.isclose(rejection_rate(rs, x), semicharacter(rs, x) * math.exp(-2.0))


def test_tilted_orbit_batch_acceptance_rate():
    rng = substream(3, 0)
    rs = build_root_system("A", 1)
    x = np.array([1.0, -1.0])
    mats, proposed = tilted_orbit_batch(2, x, 20_000, rng)
    rate = rejection_rate(rs, x)
    # proposals overshoot by design, so n/proposed only lower-bounds the
    # acceptance rate; the exact rate is E_Haar[exp(<rho, k.x> - <rho, x>)]
    assert 20_000 / proposed <= rate + 0.01
    u = kernels.haar_unitary_batch(2, 100_000, rng, special=True)
    v = (np.abs(u) ** 2) @ x
    observed = float(np.mean(np.exp(v @ rs.rho - float(rs.rho @ x))))
    assert abs(observed - rate) < 0.005
    # every accepted matrix is on the orbit: eigenvalues equal x
    for a in mats[:10]:
        assert np.allclose(np.sort(np.linalg.eigvalsh(a)), [-1.0, 1.0], atol=1e-10)


def test_tilted_orbit_tilt_direction():
    # e_rho tilting shifts the mean diagonal toward the chamber: the mean of
    # a_11 equals m1(x)_1 in expectation
    rng = substream(3, 1)
    x = np.array([1.0, -1.0])
    mats, _ = tilted_orbit_batch(2, x, 100_000, rng)
    rs = build_root_system("A", 1)
    diag = np.einsum("nii->ni", mats).real
    m1 = m1_closed(rs, x)
    assert np.allclose(diag.mean(axis=0), m1, atol=0.01)


def test_tilted_orbit_guards():
    with pytest.raises(ValueError):
        tilted_orbit_batch(2, [-1.0, 1.0], 10, substream(3, 2))
    with pytest.raises(ValueError):
        tilted_orbit_batch(2, [31.0, -31.0], 10, substream(3, 3))


def test_sample_orbit_weighted_family_guard():
    rs = build_root_system("B", 2)
    with pytest.raises(ValueError):
        sample_orbit_weighted(rs, np.array([2.0, 1.0]), substream(3, 4))


def test_crosscheck_equality_in_law():
    cfg = WalkConfig(d=2, atoms=[[0.5, -0.5]], weights=[1.0], n_steps=30,
                     n_replicas=500, seed=4)
    rep = euclidean_walk_crosscheck(cfg)
    assert isinstance(rep, CrosscheckReport)
    assert rep.passed
    assert len(rep.ks_distances) == 2
    assert np.isclose(rep.critical_1pct, 1.628 * math.sqrt(2.0 / 500.0))


def test_crosscheck_horizon_guard():
    cfg = WalkConfig(d=2, atoms=[[0.5, -0.5]], weights=[1.0], n_steps=500,
                     n_replicas=10, seed=4)
    with pytest.raises(ValueError):
        euclidean_walk_crosscheck(cfg)


def test_mz_rate_scan_negative_slope():
    cfg = WalkConfig(d=2, atoms=[[0.5, -0.5]], weights=[1.0], n_steps=4096,
                     seed=11, r_exponent=1.0)
    ns, devs, slope = mz_rate_scan(cfg)
    assert ns[-1] == 4096
    # scaled deviation n^{-1}(q(S_n) - n c) must trend to zero: CLT rate -1/2
    assert slope < -0.1
