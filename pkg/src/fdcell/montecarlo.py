"""Monte Carlo network simulation: the independent check on the analysis.

Each realization drops BS and UE Poisson point processes on a square,
associates every UE with its nearest BS, schedules one uniformly chosen UE
per non-empty cell, applies channel-inversion power control with a cap, and
draws unit-mean exponential fading per link.  SINR samples are collected for
test receivers inside a centered window to avoid edge effects.  Unlike the
analysis, the simulator keeps the true dependent point process (one
interfering UE per Voronoi cell, UE process coupled to the BS process).

Interference samples are stored as (signal, intra, cross, si) components so
a whole (alpha, beta) sweep can be evaluated on one set of realizations:
SINR = signal / (intra + ec*cross + beta*ec*si + N_o) with ec the effective
cross-mode power factor.  Reductions are performed in realization order, so
results are bit-identical for a fixed seed at any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import erfc as _sp_erfc

from .analytic import NetworkParams
from .pulse import UL, DL, CrossFactors


@dataclass(frozen=True)
class SimulationConfig:
    """Geometry and sampling plan for the simulation campaign."""

    area_side: float = 20_000.0
    window_side: float = 2_000.0
    ue_intensity: float = 2e-5
    n_realizations: int = 2000
    fading: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.area_side <= 0 or self.window_side <= 0:
            raise ValueError("sides must be positive")
        if self.window_side >= self.area_side:
            raise ValueError("collection window must sit strictly inside the area")
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")


@dataclass
class NetworkRealization:
    """One snapshot of the network with association and scheduling resolved.

    scheduled_ue[b] is -1 for cells with no associated UE; such BSs still
    transmit downlink (they remain cross-mode interferers) but produce no
    uplink sample and host no uplink interferer.
    """

    bs_xy: np.ndarray
    ue_xy: np.ndarray
    association: np.ndarray
    scheduled_ue: np.ndarray
    service_distance: np.ndarray
    ul_tx_power: np.ndarray
    is_ccu: np.ndarray
    resamples: int = 0

    @property
    def n_bs(self) -> int:
        return len(self.bs_xy)


@dataclass(frozen=True)
class MetricEstimate:
    """Monte Carlo mean with a 95% normal-approximation half width."""

    mean: float
    ci_halfwidth: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("estimate needs at least one sample")
        if self.ci_halfwidth < 0:
            raise ValueError("confidence half-width is nonnegative")


def _rng_for(seed: int, index: int) -> np.random.Generator:
    # counter-based generator with a per-realization substream: thread-count
    # independent and reproducible
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def _nearest_bs(ue_xy: np.ndarray, bs_xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of and distance to the nearest BS for every UE."""
    dist, idx = cKDTree(bs_xy).query(ue_xy, k=1)
    return np.asarray(idx, dtype=np.int64), np.asarray(dist)


def sample_realization(p: NetworkParams, sim: SimulationConfig, index: int = 0) -> NetworkRealization:
    """Draw one network snapshot; deterministic for a fixed (seed, index).

    Realizations whose window contains no BS are redrawn from the same
    substream and the attempt count is reported on the result.
    """
    if sim.ue_intensity < 20.0 * p.lam:
        raise ValueError("ue_intensity must be at least 20x the BS intensity")
    rng = _rng_for(sim.seed, index)
    area = sim.area_side**2
    half = sim.area_side / 2.0
    wh = sim.window_side / 2.0
    resamples = 0
    while True:
        n_bs = rng.poisson(p.lam * area)
        bs_xy = rng.uniform(-half, half, size=(n_bs, 2))
        in_win = (np.abs(bs_xy[:, 0]) <= wh) & (np.abs(bs_xy[:, 1]) <= wh)
        if n_bs > 0 and in_win.any():
            break
        resamples += 1

    n_ue = rng.poisson(sim.ue_intensity * area)
    ue_xy = rng.uniform(-half, half, size=(n_ue, 2))
    assoc, dist = _nearest_bs(ue_xy, bs_xy)

    # one uniformly selected UE per non-empty cell
    order = np.argsort(assoc, kind="stable")
    counts = np.bincount(assoc, minlength=n_bs)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    pick = rng.random(n_bs)
    sched = np.full(n_bs, -1, dtype=np.int64)
    nonempty = counts > 0
    sel = offsets[:-1][nonempty] + (pick[nonempty] * counts[nonempty]).astype(np.int64)
    sched[nonempty] = order[sel]

    r0 = np.where(sched >= 0, dist[np.clip(sched, 0, None)], np.nan)
    inv = p.rho * r0**p.eta
    ul_power = np.minimum(inv, p.p_u_max)
    is_ccu = inv <= p.p_u_max
    return NetworkRealization(
        bs_xy=bs_xy,
        ue_xy=ue_xy,
        association=assoc,
        scheduled_ue=sched,
        service_distance=r0,
        ul_tx_power=ul_power,
        is_ccu=is_ccu,
        resamples=resamples,
    )


@dataclass
class LinkSamples:
    """Per-test-receiver SINR components for one direction.

    signal = intended received power times its fading draw; intra / cross are
    the aggregate same-mode and opposite-mode interference sums; si is the
    pre-cancellation self-interference power (own node's opposite-direction
    transmit power).
    """

    signal: np.ndarray
    intra: np.ndarray
    cross: np.ndarray
    si: np.ndarray

    @classmethod
    def empty(cls) -> "LinkSamples":
        z = np.empty(0)
        return cls(z, z, z, z)

    @classmethod
    def concat(cls, parts: list["LinkSamples"]) -> "LinkSamples":
        return cls(
            signal=np.concatenate([q.signal for q in parts]) if parts else np.empty(0),
            intra=np.concatenate([q.intra for q in parts]) if parts else np.empty(0),
            cross=np.concatenate([q.cross for q in parts]) if parts else np.empty(0),
            si=np.concatenate([q.si for q in parts]) if parts else np.empty(0),
        )

    def __len__(self) -> int:
        return len(self.signal)

    def sinr(self, eff_cross: float, p: NetworkParams) -> np.ndarray:
        denom = self.intra + eff_cross * self.cross + p.beta * eff_cross * self.si + p.n_o
        return self.signal / denom


def _draw(rng, n, fading: bool) -> np.ndarray:
    return rng.exponential(size=n) if fading else np.ones(n)


def link_components(
    real: NetworkRealization,
    direction: str,
    p: NetworkParams,
    sim: SimulationConfig,
    rng: np.random.Generator,
) -> LinkSamples:
    """SINR components for every in-window test receiver of one direction.

    Uplink receivers are the in-window BSs with a scheduled UE; downlink
    receivers are the in-window scheduled UEs.  Fading is drawn fresh per
    link; geometry comes from the realization.
    """
    wh = sim.window_side / 2.0
    sched = real.scheduled_ue
    active = np.where(sched >= 0)[0]
    if len(active) == 0:
        return LinkSamples.empty()
    ue_act = sched[active]
    pw_act = real.ul_tx_power[active]
    fading = sim.fading

    if direction == UL:
        in_win = (np.abs(real.bs_xy[active, 0]) <= wh) & (np.abs(real.bs_xy[active, 1]) <= wh)
        tests = active[in_win]
        if len(tests) == 0:
            return LinkSamples.empty()
        pos = real.bs_xy[tests]
        r0 = real.service_distance[tests]
        p_ro = np.where(real.is_ccu[tests], p.rho, p.p_u_max * r0 ** (-p.eta))
        signal = p_ro * _draw(rng, len(tests), fading)

        # intra-mode: scheduled UEs of all other cells (own excluded via inf distance)
        d_ue = np.sqrt(((pos[:, None, :] - real.ue_xy[ue_act][None, :, :]) ** 2).sum(axis=2))
        own = tests[:, None] == active[None, :]
        d_ue = np.where(own, np.inf, d_ue)
        g = _draw(rng, d_ue.shape, fading)
        intra = (pw_act[None, :] * g * d_ue ** (-p.eta)).sum(axis=1)

        # cross-mode: every other BS transmits downlink
        d_bs = np.sqrt(((pos[:, None, :] - real.bs_xy[None, :, :]) ** 2).sum(axis=2))
        self_bs = tests[:, None] == np.arange(real.n_bs)[None, :]
        d_bs = np.where(self_bs, np.inf, d_bs)
        g = _draw(rng, d_bs.shape, fading)
        cross = (p.p_d * g * d_bs ** (-p.eta)).sum(axis=1)

        si = np.full(len(tests), p.p_d)
        return LinkSamples(signal=signal, intra=intra, cross=cross, si=si)

    if direction != DL:
        raise ValueError("direction must be 'ul' or 'dl'")

    ue_pos_act = real.ue_xy[ue_act]
    in_win = (np.abs(ue_pos_act[:, 0]) <= wh) & (np.abs(ue_pos_act[:, 1]) <= wh)
    k_test = np.where(in_win)[0]
    if len(k_test) == 0:
        return LinkSamples.empty()
    pos = ue_pos_act[k_test]
    serving = active[k_test]
    r0 = real.service_distance[serving]
    signal = p.p_d * r0 ** (-p.eta) * _draw(rng, len(k_test), fading)

    # intra-mode: all BSs except the serving one
    d_bs = np.sqrt(((pos[:, None, :] - real.bs_xy[None, :, :]) ** 2).sum(axis=2))
    own_bs = serving[:, None] == np.arange(real.n_bs)[None, :]
    d_bs = np.where(own_bs, np.inf, d_bs)
    g = _draw(rng, d_bs.shape, fading)
    intra = (p.p_d * g * d_bs ** (-p.eta)).sum(axis=1)

    # cross-mode: scheduled UEs of all other cells
    d_ue = np.sqrt(((pos[:, None, :] - ue_pos_act[None, :, :]) ** 2).sum(axis=2))
    own_ue = k_test[:, None] == np.arange(len(active))[None, :]
    d_ue = np.where(own_ue, np.inf, d_ue)
    g = _draw(rng, d_ue.shape, fading)
    cross = (pw_act[None, :] * g * d_ue ** (-p.eta)).sum(axis=1)

    si = real.ul_tx_power[serving]
    return LinkSamples(signal=signal, intra=intra, cross=cross, si=si)


def sinr_sample(
    real: NetworkRealization,
    direction: str,
    factors: CrossFactors,
    p: NetworkParams,
    rng: np.random.Generator,
    sim: SimulationConfig | None = None,
) -> np.ndarray:
    """SINR draws for all in-window test receivers of one realization."""
    sim = sim or SimulationConfig()
    comp = link_components(real, direction, p, sim, rng)
    return comp.sinr(factors.eff_cross(direction), p)


def collect_link_samples(
    p: NetworkParams,
    sim: SimulationConfig,
    directions: tuple[str, ...] = (UL, DL),
    threads: int = 1,
) -> dict[str, LinkSamples]:
    """Run the whole campaign and return per-direction component samples.

    Realizations are independent work units; the concatenation is done in
    realization order so the result never depends on the thread count.  The
    'resamples' entry counts empty-window redraws across the campaign.
    """

    def one(i: int):
        real = sample_realization(p, sim, i)
        rng = _rng_for(sim.seed ^ 0x5EED, i)
        return {d: link_components(real, d, p, sim, rng) for d in directions}, real.resamples

    if threads <= 1:
        parts = [one(i) for i in range(sim.n_realizations)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(sim.n_realizations)))
    out: dict = {d: LinkSamples.concat([q[d] for q, _ in parts]) for d in directions}
    out["resamples"] = sum(r for _, r in parts)
    return out


def _estimate(values: np.ndarray) -> MetricEstimate:
    n = len(values)
    if n == 0:
        raise ValueError("no samples collected; enlarge the window or realization count")
    mean = float(values.mean())
    ci = 1.96 * float(values.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return MetricEstimate(mean=mean, ci_halfwidth=ci, n_samples=n)


def metric_from_samples(
    samples: LinkSamples,
    metric: str,
    direction: str,
    eff_cross: float,
    p: NetworkParams,
    theta: float | None = None,
    bandwidth: float | None = None,
) -> MetricEstimate:
    """Evaluate one metric on collected component samples.

    bep: mean of omega1*erfc(sqrt(omega2*SINR)); outage: empirical
    P{SINR < theta}; ergodic_rate: mean BW log2(1+SINR); effective_rate:
    BW log2(1+theta) (1 - outage).
    """
    sinr = samples.sinr(eff_cross, p)
    if metric == "bep":
        w1, w2 = p.omega(direction)
        return _estimate(w1 * _sp_erfc(np.sqrt(w2 * sinr)))
    if metric == "outage":
        if theta is None:
            raise ValueError("outage needs theta")
        return _estimate((sinr < theta).astype(float))
    if metric == "ergodic_rate":
        if bandwidth is None:
            raise ValueError("rate metrics need the channel bandwidth")
        return _estimate(bandwidth * np.log2(1.0 + sinr))
    if metric == "effective_rate":
        if theta is None or bandwidth is None:
            raise ValueError("effective rate needs theta and the channel bandwidth")
        out = _estimate((sinr < theta).astype(float))
        scale = bandwidth * math.log2(1.0 + theta)
        return MetricEstimate(
            mean=scale * (1.0 - out.mean),
            ci_halfwidth=scale * out.ci_halfwidth,
            n_samples=out.n_samples,
        )
    raise ValueError(f"unknown metric {metric!r}")


def estimate_metric(
    metric: str,
    direction: str,
    eff_cross: float,
    p: NetworkParams,
    sim: SimulationConfig,
    theta: float | None = None,
    bandwidth: float | None = None,
    threads: int = 1,
) -> MetricEstimate:
    """Full-campaign Monte Carlo estimate of one metric."""
    if sim.n_realizations < 30:
        raise ValueError("need at least 30 realizations for the CI normal approximation")
    samples = collect_link_samples(p, sim, (direction,), threads=threads)[direction]
    return metric_from_samples(samples, metric, direction, eff_cross, p, theta=theta, bandwidth=bandwidth)


def scheduled_ue_statistics(
    p: NetworkParams,
    sim: SimulationConfig,
    margin: float = 3_000.0,
    min_samples: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Transmit powers and CCU flags of scheduled UEs in interior cells.

    margin keeps BSs at least that far from the area edge so truncated
    border cells do not contaminate the service-distance statistics.  Keeps
    drawing realizations past n_realizations until min_samples is reached.
    """
    powers: list[np.ndarray] = []
    flags: list[np.ndarray] = []
    lim = sim.area_side / 2.0 - margin
    if lim <= 0:
        raise ValueError("margin leaves no interior region")
    total = 0
    i = 0
    while i < sim.n_realizations or total < min_samples:
        real = sample_realization(p, sim, i)
        ok = (
            (real.scheduled_ue >= 0)
            & (np.abs(real.bs_xy[:, 0]) < lim)
            & (np.abs(real.bs_xy[:, 1]) < lim)
        )
        powers.append(real.ul_tx_power[ok])
        flags.append(real.is_ccu[ok])
        total += int(ok.sum())
        i += 1
    return np.concatenate(powers), np.concatenate(flags)
