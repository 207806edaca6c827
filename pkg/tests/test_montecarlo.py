"""Tests for the network simulator: geometry, scheduling, SINR, estimates."""

import math

import numpy as np
import pytest

from fdcell.analytic import NetworkParams
from fdcell.montecarlo import (
    LinkSamples,
    MetricEstimate,
    NetworkRealization,
    SimulationConfig,
    collect_link_samples,
    estimate_metric,
    link_components,
    metric_from_samples,
    sample_realization,
    scheduled_ue_statistics,
    sinr_sample,
)
from fdcell.pulse import DL, UL, CrossFactors

REF = NetworkParams(beta=0.0)
SMALL = SimulationConfig(area_side=6000.0, window_side=1500.0, n_realizations=50, seed=5)


def make_factors(eff_u: float, eff_d: float) -> CrossFactors:
    return CrossFactors(i_u=1.0, i_d=1.0, c_u=math.sqrt(eff_u), c_d=math.sqrt(eff_d))


# ---------------------------------------------------------------------------
# realization sampling
# ---------------------------------------------------------------------------

def test_realization_deterministic_per_seed():
    a = sample_realization(REF, SMALL, 3)
    b = sample_realization(REF, SMALL, 3)
    assert np.array_equal(a.bs_xy, b.bs_xy)
    assert np.array_equal(a.scheduled_ue, b.scheduled_ue)
    c = sample_realization(REF, SMALL, 4)
    assert not np.array_equal(a.bs_xy, c.bs_xy)


def test_expected_bs_count():
    # Poisson mean lam * area = 400; 200 seeds keep the total within 3 sigma
    sim = SimulationConfig(n_realizations=1, seed=11)
    total = sum(sample_realization(REF, sim, i).n_bs for i in range(200))
    mean = REF.lam * sim.area_side**2 * 200
    assert abs(total - mean) < 3.0 * math.sqrt(mean)


def test_association_is_nearest_bruteforce():
    real = sample_realization(REF, SMALL, 1)
    d = np.sqrt(((real.ue_xy[:, None, :] - real.bs_xy[None, :, :]) ** 2).sum(axis=2))
    assert np.array_equal(np.argmin(d, axis=1), real.association)


def test_one_scheduled_ue_per_nonempty_cell():
    real = sample_realization(REF, SMALL, 2)
    counts = np.bincount(real.association, minlength=real.n_bs)
    for b in range(real.n_bs):
        if counts[b] == 0:
            assert real.scheduled_ue[b] == -1
        else:
            u = real.scheduled_ue[b]
            assert real.association[u] == b


def test_power_control_and_classes():
    real = sample_realization(REF, SMALL, 7)
    ok = real.scheduled_ue >= 0
    r = real.service_distance[ok]
    pw = real.ul_tx_power[ok]
    assert np.all(pw <= REF.p_u_max + 1e-15)
    inv = REF.rho * r**REF.eta
    assert np.allclose(pw, np.minimum(inv, REF.p_u_max))
    assert np.array_equal(real.is_ccu[ok], inv <= REF.p_u_max)
    assert np.array_equal(real.is_ccu[ok], r <= REF.r_boundary)


def test_unbounded_power_means_all_ccu():
    p = NetworkParams(p_u_max=math.inf, beta=0.0)
    real = sample_realization(p, SMALL, 3)
    ok = real.scheduled_ue >= 0
    assert bool(np.all(real.is_ccu[ok]))


def test_ue_intensity_floor_enforced():
    with pytest.raises(ValueError):
        sample_realization(REF, SimulationConfig(ue_intensity=1e-5), 0)


def test_window_must_be_inside_area():
    with pytest.raises(ValueError):
        SimulationConfig(area_side=1000.0, window_side=1000.0)


# ---------------------------------------------------------------------------
# SINR construction
# ---------------------------------------------------------------------------

def _single_cell_realization() -> NetworkRealization:
    bs = np.array([[0.0, 0.0]])
    ue = np.array([[100.0, 0.0]])
    return NetworkRealization(
        bs_xy=bs,
        ue_xy=ue,
        association=np.array([0]),
        scheduled_ue=np.array([0]),
        service_distance=np.array([100.0]),
        ul_tx_power=np.array([min(REF.rho * 100.0**4, REF.p_u_max)]),
        is_ccu=np.array([True]),
    )


def test_single_cell_sinr_is_pure_snr():
    # one BS, no interferers: SINR = P_ro h / N_o exactly
    real = _single_cell_realization()
    p = NetworkParams(beta=0.0, n_o=1e-12)
    sim = SimulationConfig(area_side=1000.0, window_side=900.0, fading=False)
    rng = np.random.default_rng(0)
    ul = sinr_sample(real, UL, make_factors(0.5, 0.5), p, rng, sim)
    assert ul.shape == (1,)
    assert ul[0] == pytest.approx(p.rho / p.n_o, rel=1e-12)
    dl = sinr_sample(real, DL, make_factors(0.5, 0.5), p, rng, sim)
    assert dl[0] == pytest.approx(p.p_d * 100.0**-4.0 / p.n_o, rel=1e-12)


def test_single_cell_with_si_and_leakage():
    real = _single_cell_realization()
    p = NetworkParams(beta=1e-8, n_o=1e-12)
    sim = SimulationConfig(area_side=1000.0, window_side=900.0, fading=False)
    rng = np.random.default_rng(0)
    eff = 0.25
    ul = sinr_sample(real, UL, make_factors(eff, eff), p, rng, sim)
    assert ul[0] == pytest.approx(p.rho / (p.beta * eff * p.p_d + p.n_o), rel=1e-12)
    dl = sinr_sample(real, DL, make_factors(eff, eff), p, rng, sim)
    own_pw = real.ul_tx_power[0]
    assert dl[0] == pytest.approx(p.p_d * 100.0**-4.0 / (p.beta * eff * own_pw + p.n_o), rel=1e-12)


def test_orthogonal_leakage_matches_independent_hd_implementation():
    # with fading off and eff_cross = 0 the samples must equal a brute-force
    # half-duplex SINR computed by explicit loops over the realization
    p = NetworkParams(beta=0.0, n_o=1e-12)
    sim = SimulationConfig(area_side=6000.0, window_side=2000.0, fading=False, seed=5)
    real = sample_realization(p, sim, 0)
    rng = np.random.default_rng(1)
    got = sinr_sample(real, UL, make_factors(0.0, 0.0), p, rng, sim)

    expected = []
    active = [b for b in range(real.n_bs) if real.scheduled_ue[b] >= 0]
    for b in active:
        x, y = real.bs_xy[b]
        if abs(x) > sim.window_side / 2 or abs(y) > sim.window_side / 2:
            continue
        r0 = real.service_distance[b]
        num = p.rho if real.is_ccu[b] else p.p_u_max * r0**-p.eta
        interf = 0.0
        for other in active:
            if other == b:
                continue
            u = real.scheduled_ue[other]
            d = math.dist(real.ue_xy[u], real.bs_xy[b])
            interf += real.ul_tx_power[other] * d**-p.eta
        expected.append(num / (interf + p.n_o))
    assert got == pytest.approx(np.array(expected), rel=1e-12)


def test_fading_redrawn_per_call_geometry_fixed():
    p = REF
    sim = SimulationConfig(area_side=6000.0, window_side=2000.0, seed=5)
    real = sample_realization(p, sim, 0)
    f = make_factors(0.3, 0.3)
    a = sinr_sample(real, UL, f, p, np.random.default_rng(1), sim)
    b = sinr_sample(real, UL, f, p, np.random.default_rng(1), sim)
    c = sinr_sample(real, UL, f, p, np.random.default_rng(2), sim)
    assert np.array_equal(a, b)
    assert a.shape == c.shape and not np.array_equal(a, c)


# ---------------------------------------------------------------------------
# estimates
# ---------------------------------------------------------------------------

def test_degenerate_unit_sinr_stream():
    n = 64
    ones = np.ones(n)
    samples = LinkSamples(signal=ones, intra=ones, cross=np.zeros(n), si=np.zeros(n))
    p = NetworkParams(beta=0.0, n_o=0.0)
    out = metric_from_samples(samples, "outage", UL, 0.0, p, theta=1.0)
    assert out.mean == 0.0  # strict inequality at SINR == theta
    eff = metric_from_samples(samples, "effective_rate", UL, 0.0, p, theta=1.0, bandwidth=1e6)
    assert eff.mean == pytest.approx(1e6 * math.log2(2.0))


def test_bep_of_infinite_sinr_stream_is_zero():
    n = 16
    samples = LinkSamples(
        signal=np.full(n, 1e30), intra=np.ones(n), cross=np.zeros(n), si=np.zeros(n)
    )
    est = metric_from_samples(samples, "bep", UL, 0.0, NetworkParams(beta=0.0, n_o=0.0))
    assert est.mean == 0.0


def test_outage_monotone_in_leakage_same_samples():
    samples = collect_link_samples(REF, SMALL)[UL]
    outs = [
        metric_from_samples(samples, "outage", UL, e, REF, theta=1.0).mean
        for e in (0.0, 0.2, 0.5, 1.0)
    ]
    assert all(b >= a for a, b in zip(outs, outs[1:]))


def test_estimate_metric_requires_enough_realizations():
    with pytest.raises(ValueError):
        estimate_metric(
            "outage", UL, 0.1, REF, SimulationConfig(n_realizations=10), theta=1.0
        )


def test_metric_estimate_validation():
    with pytest.raises(ValueError):
        MetricEstimate(mean=0.5, ci_halfwidth=0.1, n_samples=0)
    with pytest.raises(ValueError):
        MetricEstimate(mean=0.5, ci_halfwidth=-0.1, n_samples=5)


def test_collect_thread_count_invariance():
    one = collect_link_samples(REF, SMALL, threads=1)
    four = collect_link_samples(REF, SMALL, threads=4)
    for d in (UL, DL):
        assert np.array_equal(one[d].signal, four[d].signal)
        assert np.array_equal(one[d].intra, four[d].intra)
        assert np.array_equal(one[d].cross, four[d].cross)
        assert np.array_equal(one[d].si, four[d].si)


def test_estimate_metric_end_to_end_deterministic():
    sim = SimulationConfig(area_side=6000.0, window_side=1500.0, n_realizations=40, seed=9)
    a = estimate_metric("bep", UL, 0.2, REF, sim)
    b = estimate_metric("bep", UL, 0.2, REF, sim, threads=3)
    assert a == b
    assert a.n_samples > 0 and 0.0 < a.mean < 0.5


# ---------------------------------------------------------------------------
# distribution diagnostics
# ---------------------------------------------------------------------------

def test_typical_ue_distance_is_rayleigh():
    # control for the geometry code: a uniformly chosen UE (not the per-cell
    # pick) has an exactly Rayleigh nearest-BS distance; KS at the 1% level
    sim = SimulationConfig(n_realizations=6, seed=21)
    dists = []
    for i in range(sim.n_realizations):
        real = sample_realization(REF, sim, i)
        lim = sim.area_side / 2 - 3000.0
        inner = (np.abs(real.ue_xy[:, 0]) < lim) & (np.abs(real.ue_xy[:, 1]) < lim)
        d = np.sqrt(((real.ue_xy[inner] - real.bs_xy[real.association[inner]]) ** 2).sum(axis=1))
        dists.append(d)
    r = np.sort(np.concatenate(dists))
    n = len(r)
    cdf = 1.0 - np.exp(-math.pi * REF.lam * r**2)
    emp_hi = np.arange(1, n + 1) / n
    emp_lo = np.arange(0, n) / n
    ks = max(np.max(np.abs(emp_hi - cdf)), np.max(np.abs(emp_lo - cdf)))
    assert ks < 1.628 / math.sqrt(n)


def test_scheduled_ue_statistics_shapes():
    powers, ccu = scheduled_ue_statistics(REF, SimulationConfig(n_realizations=3, seed=2))
    assert len(powers) == len(ccu) > 0
    assert np.all(powers <= REF.p_u_max + 1e-15)
    assert np.all(powers > 0)


def test_uplink_outage_matches_analytic_within_ci_plus_margin():
    # the closed-form uplink outage as a cross-check: agreement within the
    # campaign CI plus a 5% allowance for the independence-assumption bias
    from fdcell.analytic import LinkContext, outage
    from fdcell.pulse import DuplexConfig

    eff = 0.2081  # uplink leakage of the default pulse pair at alpha = 0.5
    sim = SimulationConfig(n_realizations=400, seed=17)
    samples = collect_link_samples(REF, sim, (UL,), threads=2)[UL]
    mc = metric_from_samples(samples, "outage", UL, eff, REF, theta=1.0)
    ana = outage(UL, 1.0, LinkContext(UL, 0.5, eff, duplex=DuplexConfig(1e6, 1e6, 0.5)), REF)
    assert abs(ana - mc.mean) <= mc.ci_halfwidth + 0.05 * ana
