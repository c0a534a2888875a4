"""Seeded Monte Carlo engine: samplers, per-scheme trial evaluators and block aggregation.

Trials are grouped into fixed-size blocks. Block ``b`` draws all of its
randomness from ``SeedSequence(seed, spawn_key=(b,))`` in a single call, so
trial ``t`` always sees the same users whatever the number of workers or
the size of the final partial block. Block aggregates are merged in block
order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from pinchsim.config import get_block_size, get_worker_count
from pinchsim.errors import (
    ConfigurationError,
    ParameterDomainError,
    SingularityError,
)
from pinchsim.logging_utils import get_logger
from pinchsim.models import (
    NomaAreasDeployment,
    NomaPairDeployment,
    PhysicalParams,
    Point3,
    RectangleDeployment,
    SplitSquareDeployment,
    SquareDeployment,
    TrialPlan,
)
from pinchsim.services.array import (
    build_noma_coefficients,
    effective_channels,
    place_antennas_with_fallback,
    sic_decode_table,
    sic_rates,
)
from pinchsim.services.geometry import (
    DerivedConstants,
    dbm_to_watts,
    derive_constants,
    waveguide_for_region,
)
from pinchsim.services.miso import (
    channel_matrix,
    conventional_scenario,
    local_search,
    mrc_beamformer,
    paired_waveguides,
    pinching_scenario,
    refine_search,
    sinr_curves,
    zf_beamformer,
)
from pinchsim.services.single_antenna import LN2

LOGGER = get_logger(__name__)

SINGLE_REGION = (SquareDeployment, RectangleDeployment)
MULTI_AREA = (NomaPairDeployment, NomaAreasDeployment)

SCHEME_DEPLOYMENTS: Dict[str, tuple] = {
    "conventional": SINGLE_REGION + MULTI_AREA,
    "pinching-1": SINGLE_REGION + MULTI_AREA,
    "pinching-N-oma": SINGLE_REGION,
    "noma": MULTI_AREA,
    "miso-mrc": (SplitSquareDeployment,),
    "miso-zf": (SplitSquareDeployment,),
    "miso-bound": (SplitSquareDeployment,),
    "miso-search": (SplitSquareDeployment,),
}


def block_generator(seed: int, block: int, prng: str = "pcg64") -> np.random.Generator:
    """Independent stream for one block of trials."""

    sequence = np.random.SeedSequence(seed, spawn_key=(block,))
    if prng == "pcg64":
        return np.random.Generator(np.random.PCG64(sequence))
    if prng == "philox":
        return np.random.Generator(np.random.Philox(sequence))
    raise ParameterDomainError(f"unknown generator {prng!r}")


def _region_bounds(deployment, region_indices: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    regions = deployment.regions()
    lows, spans = [], []
    for index in region_indices:
        if not 0 <= index < len(regions):
            raise ParameterDomainError(
                f"region index {index} out of range for a deployment with {len(regions)} region(s)"
            )
        region = regions[index]
        lows.append((region.x_min, region.y_min))
        spans.append((region.side_x, region.side_y))
    return np.array(lows), np.array(spans)


def sample_users(
    deployment, region_indices: Sequence[int], num_trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniform users, one per listed region per trial; returns (num_trials, K, 3)."""

    lows, spans = _region_bounds(deployment, region_indices)
    unit = rng.random((num_trials, len(region_indices), 2))
    users = np.zeros((num_trials, len(region_indices), 3))
    users[..., :2] = lows[None, :, :] + unit * spans[None, :, :]
    return users


def sample_user(deployment, region_index: int, rng: np.random.Generator) -> Point3:
    return Point3.of(*sample_users(deployment, [region_index], 1, rng)[0, 0])


def user_slots(plan: TrialPlan) -> List[int]:
    """Region index of every user drawn in one trial."""

    deployment = plan.deployment
    if isinstance(deployment, SINGLE_REGION):
        return [0] * plan.num_users
    return list(range(len(deployment.regions())))


def _exact_sum(values: np.ndarray) -> np.ndarray:
    """Correctly rounded sum over the trial axis."""

    if values.shape[0] == 0:
        return np.zeros(values.shape[1:])
    return np.apply_along_axis(math.fsum, 0, values)


@dataclass(frozen=True)
class BlockAggregate:
    """Count, mean and sum of squared deviations, per (power, column)."""

    count: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "BlockAggregate":
        count = values.shape[0]
        mean = _exact_sum(values) / count
        return cls(count=count, mean=mean, m2=_exact_sum((values - mean) ** 2))

    def merge(self, other: "BlockAggregate") -> "BlockAggregate":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        return BlockAggregate(
            count=total,
            mean=self.mean + delta * (other.count / total),
            m2=self.m2 + other.m2 + delta * delta * (self.count * other.count / total),
        )


@dataclass(frozen=True)
class SweepPoint:
    power_dbm: float
    means: Dict[str, float]
    stderrs: Dict[str, float]
    num_trials: int


@dataclass(frozen=True)
class SweepResult:
    scheme: str
    powers_dbm: Tuple[float, ...]
    columns: Tuple[str, ...]
    num_trials: int
    mean: np.ndarray
    stderr: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.mean[:, self.columns.index(name)]

    def points(self) -> List[SweepPoint]:
        return [
            SweepPoint(
                power_dbm=power,
                means={name: float(self.mean[i, j]) for j, name in enumerate(self.columns)},
                stderrs={name: float(self.stderr[i, j]) for j, name in enumerate(self.columns)},
                num_trials=self.num_trials,
            )
            for i, power in enumerate(self.powers_dbm)
        ]


def _log2_1p(x: np.ndarray) -> np.ndarray:
    return np.log1p(x) / LN2


def _waveguide_y(deployment) -> float:
    if isinstance(deployment, SINGLE_REGION):
        return deployment.center.y
    return 0.0


def _conventional_antenna(deployment, height: float) -> np.ndarray:
    if isinstance(deployment, SINGLE_REGION):
        return np.array([deployment.center.x, deployment.center.y, height])
    return np.array([0.0, 0.0, height])


@dataclass(frozen=True)
class _SchemeContext:
    plan: TrialPlan
    params: PhysicalParams
    consts: DerivedConstants
    power_w: np.ndarray

    @property
    def snr(self) -> np.ndarray:
        """Transmit SNR P / sigma^2 for every sweep point."""

        return self.power_w / self.consts.noise_power_w


def _columns_for(plan: TrialPlan) -> Tuple[str, ...]:
    scheme = plan.scheme
    if scheme in ("conventional", "pinching-1"):
        if isinstance(plan.deployment, MULTI_AREA):
            count = len(plan.deployment.regions())
            return ("rate",) + tuple(f"r{m}" for m in range(1, count + 1))
        return ("rate",)
    if scheme == "pinching-N-oma":
        return ("rate", "bound_exact", "bound_clustered")
    if scheme == "noma":
        m_users = len(plan.deployment.regions())
        names = ["sum"] + [f"r{m}" for m in range(1, m_users + 1)] + ["oma_sum", "gap"]
        if m_users == 2:
            names.append("gap_highsnr")
        return tuple(names)
    return ("sum", "r1", "r2", "rmin")


def _tdma_columns(ctx: _SchemeContext, rates: np.ndarray) -> np.ndarray:
    """Time-shared sum rate, plus per-area rates when every user has its own area."""

    shares = rates / rates.shape[2]
    total = shares.sum(axis=2)[..., None]
    if isinstance(ctx.plan.deployment, MULTI_AREA):
        return np.concatenate([total, shares], axis=2)
    return total


def _eval_conventional(ctx: _SchemeContext, users: np.ndarray) -> np.ndarray:
    antenna = _conventional_antenna(ctx.plan.deployment, ctx.params.waveguide_height_m)
    dist_sq = np.sum((users - antenna) ** 2, axis=-1)
    gamma = ctx.consts.eta * ctx.snr
    return _tdma_columns(ctx, _log2_1p(gamma[None, :, None] / dist_sq[:, None, :]))


def _eval_pinching_single(ctx: _SchemeContext, users: np.ndarray) -> np.ndarray:
    y_wg = _waveguide_y(ctx.plan.deployment)
    d = ctx.params.waveguide_height_m
    dist_sq = (users[..., 1] - y_wg) ** 2 + d * d
    gamma = ctx.consts.eta * ctx.snr
    return _tdma_columns(ctx, _log2_1p(gamma[None, :, None] / dist_sq[:, None, :]))


def _eval_pinching_oma(ctx: _SchemeContext, users: np.ndarray) -> np.ndarray:
    deployment = ctx.plan.deployment
    waveguide = waveguide_for_region(deployment.x_extent(), _waveguide_y(deployment), ctx.params)
    n_trials, m_users, _ = users.shape
    n_ant = ctx.plan.num_antennas
    eta = ctx.consts.eta
    d = ctx.params.waveguide_height_m
    per_antenna = ctx.snr / n_ant
    out = np.zeros((n_trials, ctx.snr.shape[0], 3))
    for t in range(n_trials):
        for m in range(m_users):
            coords = users[t, m]
            array = place_antennas_with_fallback(
                Point3.of(*coords), n_ant, waveguide, ctx.params
            )
            gain = abs(effective_channels(coords[None, :], array.x, waveguide, ctx.consts)[0]) ** 2
            r = np.sqrt((array.x - coords[0]) ** 2 + (waveguide.y_offset_m - coords[1]) ** 2 + d * d)
            coherent = float(np.sum(1.0 / r)) ** 2 * eta
            clustered = n_ant * n_ant * eta / ((waveguide.y_offset_m - coords[1]) ** 2 + d * d)
            out[t, :, 0] += _log2_1p(gain * per_antenna)
            out[t, :, 1] += _log2_1p(coherent * per_antenna)
            out[t, :, 2] += _log2_1p(clustered * per_antenna)
    return out / m_users


def _eval_noma(ctx: _SchemeContext, users: np.ndarray) -> np.ndarray:
    deployment = ctx.plan.deployment
    waveguide = waveguide_for_region(deployment.x_extent(), 0.0, ctx.params)
    n_trials, m_users, _ = users.shape
    alloc = build_noma_coefficients(m_users)
    d = ctx.params.waveguide_height_m
    antenna_x = np.clip(users[..., 0], waveguide.x_min_m, waveguide.x_max_m)
    flat_users = users.reshape(-1, 3)
    flat_antennas = np.repeat(antenna_x, m_users, axis=0)
    gains = (
        np.abs(effective_channels(flat_users, flat_antennas, waveguide, ctx.consts)) ** 2
    ).reshape(n_trials, m_users)
    order = np.argsort(gains, axis=1, kind="stable")
    ranked_gains = np.take_along_axis(gains, order, axis=1)
    table = sic_decode_table(
        ranked_gains / ctx.consts.noise_power_w, alloc.alphas, ctx.power_w / m_users
    )
    ranked = sic_rates(table)
    noma_sum = ranked.sum(axis=2)

    dist_sq = users[..., 1] ** 2 + d * d
    oma_snr = m_users * m_users * ctx.snr[None, :, None] * ctx.consts.eta / dist_sq[:, None, :]
    oma_sum = _log2_1p(oma_snr).mean(axis=2)

    columns = [noma_sum[..., None], ranked, oma_sum[..., None], (noma_sum - oma_sum)[..., None]]
    if m_users == 2:
        dist = np.sqrt(np.take_along_axis(dist_sq, order, axis=1))
        highsnr = np.log2(dist[:, 0] / dist[:, 1]) - 3.0
        columns.append(np.broadcast_to(highsnr[:, None, None], noma_sum.shape + (1,)))
    return np.concatenate(columns, axis=2)


def _eval_miso(ctx: _SchemeContext, users: np.ndarray) -> np.ndarray:
    plan = ctx.plan
    deployment = plan.deployment
    waveguides = paired_waveguides(deployment.side_m, ctx.params, center=deployment.center)
    rhos = ctx.snr
    out = np.empty((users.shape[0], rhos.shape[0], 4))
    for t in range(users.shape[0]):
        pair = (Point3.of(*users[t, 0]), Point3.of(*users[t, 1]))
        if plan.miso_antennas == "pinching":
            scenario = pinching_scenario(pair, waveguides, rho=float(rhos[0]))
        else:
            scenario = conventional_scenario(pair, ctx.params, float(rhos[0]), center=deployment.center)
        if plan.scheme == "miso-search":
            if plan.search_domain == "D2":
                result = local_search(
                    scenario,
                    ctx.params,
                    window_wavelengths=plan.search_window_wavelengths,
                    step_wavelengths=plan.search_step_wavelengths,
                )
            else:
                result = refine_search(scenario, ctx.params)
            sinrs = sinr_curves(channel_matrix(result.scenario, ctx.params), result.beamformer, rhos)
        else:
            H = channel_matrix(scenario, ctx.params)
            if plan.scheme == "miso-bound":
                sinrs = rhos[:, None] * H.norms_sq[None, :]
            elif plan.scheme == "miso-mrc":
                sinrs = sinr_curves(H, mrc_beamformer(H), rhos)
            else:
                try:
                    sinrs = sinr_curves(H, zf_beamformer(H), rhos)
                except SingularityError:
                    # zero forcing serves nobody on collinear channels
                    LOGGER.warning(
                        "Zero forcing undefined for trial %s",
                        t,
                        extra={"event": "harness.miso.singular", "payload": {"trial": t, "users": users[t]}},
                    )
                    sinrs = np.zeros((rhos.shape[0], 2))
        rates = _log2_1p(sinrs)
        out[t, :, 0] = rates.sum(axis=1)
        out[t, :, 1:3] = rates
        out[t, :, 3] = rates.min(axis=1)
    return out


_EVALUATORS = {
    "conventional": _eval_conventional,
    "pinching-1": _eval_pinching_single,
    "pinching-N-oma": _eval_pinching_oma,
    "noma": _eval_noma,
    "miso-mrc": _eval_miso,
    "miso-zf": _eval_miso,
    "miso-bound": _eval_miso,
    "miso-search": _eval_miso,
}


def check_plan(plan: TrialPlan) -> None:
    """Reject scheme and deployment combinations that have no meaning."""

    allowed = SCHEME_DEPLOYMENTS[plan.scheme]
    if not isinstance(plan.deployment, allowed):
        raise ConfigurationError(
            f"scheme {plan.scheme!r} cannot run on a {plan.deployment.kind!r} deployment",
            key_path="plan.deployment.kind",
        )
    if plan.scheme == "miso-search" and plan.miso_antennas == "conventional":
        raise ConfigurationError(
            "the placement search needs pinching antennas", key_path="plan.miso_antennas"
        )
    if plan.scheme == "noma" and plan.num_antennas not in (1, len(plan.deployment.regions())):
        raise ConfigurationError(
            "NOMA places exactly one antenna per user", key_path="plan.num_antennas"
        )


def evaluate_trials(
    plan: TrialPlan, params: PhysicalParams, users: np.ndarray
) -> np.ndarray:
    """Per-trial rates of shape (trials, powers, columns) for pre-drawn users."""

    ctx = _SchemeContext(
        plan=plan,
        params=params,
        consts=derive_constants(params),
        power_w=dbm_to_watts(np.asarray(plan.sweep_dbm, dtype=float)),
    )
    return _EVALUATORS[plan.scheme](ctx, users)


def run_block(
    plan: TrialPlan, params: PhysicalParams, block: int, num_trials: int
) -> BlockAggregate:
    rng = block_generator(plan.seed, block, plan.prng)
    users = sample_users(plan.deployment, user_slots(plan), num_trials, rng)
    return BlockAggregate.from_samples(evaluate_trials(plan, params, users))


def run_sweep(
    plan: TrialPlan,
    params: PhysicalParams,
    *,
    workers: Optional[int] = None,
    block_size: Optional[int] = None,
) -> SweepResult:
    """Average a scheme's per-trial rates over plan.num_trials seeded trials."""

    check_plan(plan)
    block_size = block_size or get_block_size()
    if block_size < 1:
        raise ParameterDomainError("block size must be at least 1")
    n_jobs = get_worker_count(workers)
    full, rest = divmod(plan.num_trials, block_size)
    sizes = [block_size] * full + ([rest] if rest else [])
    LOGGER.info(
        "Running %s trials of %s over %s block(s)",
        plan.num_trials,
        plan.scheme,
        len(sizes),
        extra={
            "event": "harness.sweep.start",
            "payload": {
                "scheme": plan.scheme,
                "trials": plan.num_trials,
                "blocks": len(sizes),
                "workers": n_jobs,
            },
        },
    )
    if n_jobs == 1 or len(sizes) == 1:
        aggregates = [run_block(plan, params, b, n) for b, n in enumerate(sizes)]
    else:
        aggregates = Parallel(n_jobs=n_jobs)(
            delayed(run_block)(plan, params, b, n) for b, n in enumerate(sizes)
        )

    total = aggregates[0]
    for aggregate in aggregates[1:]:
        total = total.merge(aggregate)
    if total.count > 1:
        stderr = np.sqrt(total.m2 / (total.count - 1)) / math.sqrt(total.count)
    else:
        stderr = np.full_like(total.mean, np.nan)
    result = SweepResult(
        scheme=plan.scheme,
        powers_dbm=tuple(plan.sweep_dbm),
        columns=_columns_for(plan),
        num_trials=total.count,
        mean=total.mean,
        stderr=stderr,
    )
    LOGGER.info(
        "Sweep finished",
        extra={
            "event": "harness.sweep.complete",
            "payload": {"scheme": plan.scheme, "trials": total.count, "columns": list(result.columns)},
        },
    )
    return result


__all__ = [
    "BlockAggregate",
    "SweepPoint",
    "SweepResult",
    "block_generator",
    "check_plan",
    "evaluate_trials",
    "run_block",
    "run_sweep",
    "sample_user",
    "sample_users",
    "user_slots",
]
