import math

import numpy as np
import pytest

from pinchsim.errors import ConfigurationError, ParameterDomainError, SingularityError
from pinchsim.logging_utils import get_log_manager
from pinchsim.models import (
    NomaPairDeployment,
    SnrOperatingPoint,
    SplitSquareDeployment,
    SquareDeployment,
    TrialPlan,
)
from pinchsim.services import harness
from pinchsim.services.harness import (
    BlockAggregate,
    block_generator,
    check_plan,
    evaluate_trials,
    run_sweep,
    sample_users,
    user_slots,
)
from pinchsim.services.single_antenna import ergodic_sum_rate_pinching


def _plan(**overrides) -> TrialPlan:
    base = {"seed": 7, "num_trials": 200, "sweep_dbm": (0.0, 30.0)}
    base.update(overrides)
    return TrialPlan(**base)


def test_block_streams_are_reproducible_and_distinct() -> None:
    first = block_generator(11, 0).random(4)

    assert np.array_equal(first, block_generator(11, 0).random(4))
    assert not np.array_equal(first, block_generator(11, 1).random(4))
    assert block_generator(11, 0, "philox").random() != block_generator(11, 0).random()
    with pytest.raises(ParameterDomainError):
        block_generator(11, 0, "mt19937")


def test_users_fall_inside_their_regions() -> None:
    deployment = NomaPairDeployment()
    users = sample_users(deployment, [0, 1], 500, block_generator(3, 0))

    assert users.shape == (500, 2, 3)
    assert np.all(users[..., 2] == 0.0)
    for index, region in enumerate(deployment.regions()):
        assert np.all((users[:, index, 0] >= region.x_min) & (users[:, index, 0] <= region.x_max))
        assert np.all((users[:, index, 1] >= region.y_min) & (users[:, index, 1] <= region.y_max))
    with pytest.raises(ParameterDomainError):
        sample_users(deployment, [2], 1, block_generator(3, 0))


def test_uniform_users_have_the_region_mean() -> None:
    n = 100_000
    users = sample_users(SquareDeployment(side_m=10.0), [0], n, block_generator(5, 0))

    tolerance = 3.0 * (10.0 / math.sqrt(12.0)) / math.sqrt(n)
    assert abs(users[:, 0, 0].mean()) < tolerance
    assert abs(users[:, 0, 1].mean()) < tolerance


def test_a_short_block_is_a_prefix_of_a_long_one() -> None:
    deployment = SquareDeployment()
    short = sample_users(deployment, [0, 0], 50, block_generator(9, 4))
    long = sample_users(deployment, [0, 0], 100, block_generator(9, 4))

    assert np.array_equal(short, long[:50])


def test_user_slots() -> None:
    assert user_slots(_plan(num_users=3)) == [0, 0, 0]
    assert user_slots(_plan(deployment=NomaPairDeployment(), scheme="noma", num_users=2)) == [0, 1]


def test_block_merge_matches_the_pooled_sample(rng) -> None:
    values = rng.normal(size=(90, 2, 3))
    a = BlockAggregate.from_samples(values[:20])
    b = BlockAggregate.from_samples(values[20:55])
    c = BlockAggregate.from_samples(values[55:])
    pooled = BlockAggregate.from_samples(values)

    for merged in (a.merge(b).merge(c), a.merge(b.merge(c))):
        assert merged.count == 90
        np.testing.assert_allclose(merged.mean, pooled.mean, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(merged.m2, pooled.m2, rtol=1e-12)


def test_block_mean_survives_cancellation() -> None:
    column = [1e16, 1.0, -1e16, 1.0]
    values = np.array([[[x, 1e9 + x / 1e16]] for x in column])

    aggregate = BlockAggregate.from_samples(values)

    assert aggregate.mean[0, 0] == 0.5
    assert aggregate.mean[0, 1] == math.fsum(values[:, 0, 1]) / 4
    expected_m2 = math.fsum((x - 0.5) ** 2 for x in column)
    assert aggregate.m2[0, 0] == pytest.approx(expected_m2, rel=1e-15)


def test_block_mean_of_offset_samples_matches_the_exact_sum(rng) -> None:
    values = 1e12 + rng.normal(size=(4096, 3, 4))

    aggregate = BlockAggregate.from_samples(values)

    exact = np.array([[math.fsum(values[:, i, j]) for j in range(4)] for i in range(3)]) / 4096
    assert np.array_equal(aggregate.mean, exact)


def test_plan_checks() -> None:
    with pytest.raises(ConfigurationError) as excinfo:
        check_plan(_plan(scheme="noma"))
    assert excinfo.value.key_path == "plan.deployment.kind"
    with pytest.raises(ConfigurationError):
        check_plan(_plan(scheme="miso-zf"))
    with pytest.raises(ConfigurationError):
        check_plan(
            _plan(deployment=SplitSquareDeployment(), scheme="miso-search", miso_antennas="conventional")
        )
    with pytest.raises(ConfigurationError):
        check_plan(_plan(deployment=NomaPairDeployment(), scheme="noma", num_antennas=3))


def test_conventional_rate_for_a_user_under_the_antenna(params, constants) -> None:
    plan = _plan(scheme="conventional", sweep_dbm=(30.0,))
    users = np.zeros((1, 1, 3))

    rates = evaluate_trials(plan, params, users)

    gamma = constants.eta / constants.noise_power_w
    assert rates.shape == (1, 1, 1)
    assert rates[0, 0, 0] == pytest.approx(math.log2(1.0 + gamma / 9.0), rel=1e-12)


def test_results_do_not_depend_on_the_worker_count(params) -> None:
    plan = _plan(num_trials=300)

    serial = run_sweep(plan, params, workers=1, block_size=64)
    parallel = run_sweep(plan, params, workers=2, block_size=64)

    assert np.array_equal(serial.mean, parallel.mean)
    assert np.array_equal(serial.stderr, parallel.stderr)
    assert serial.num_trials == 300


def test_single_trial_has_no_standard_error(params) -> None:
    result = run_sweep(_plan(num_trials=1), params, workers=1)

    assert result.num_trials == 1
    assert np.all(np.isnan(result.stderr))
    assert result.points()[0].means["rate"] == pytest.approx(float(result.mean[0, 0]))


def test_single_pinching_antenna_sweep_matches_the_exact_rate(params) -> None:
    plan = _plan(num_trials=20_000, deployment=SquareDeployment(side_m=10.0), sweep_dbm=(30.0,))

    result = run_sweep(plan, params, workers=1)

    exact = ergodic_sum_rate_pinching(
        SnrOperatingPoint(transmit_power_dbm=30.0, params=params, region_side_m=10.0)
    )
    assert abs(float(result.column("rate")[0]) - exact) < 4.0 * float(result.stderr[0, 0])


def test_multi_antenna_oma_attains_its_bound(params) -> None:
    plan = _plan(num_trials=20, scheme="pinching-N-oma", num_antennas=2, sweep_dbm=(20.0,))

    result = run_sweep(plan, params, workers=1)

    assert result.columns == ("rate", "bound_exact", "bound_clustered")
    assert float(result.column("rate")[0]) == pytest.approx(float(result.column("bound_exact")[0]), abs=1e-6)
    assert float(result.column("rate")[0]) == pytest.approx(float(result.column("bound_clustered")[0]), rel=1e-2)


def test_noma_columns_are_consistent(params) -> None:
    plan = _plan(
        num_trials=300,
        deployment=NomaPairDeployment(),
        scheme="noma",
        num_users=2,
        num_antennas=2,
        sweep_dbm=(50.0,),
    )

    result = run_sweep(plan, params, workers=1)

    assert result.columns == ("sum", "r1", "r2", "oma_sum", "gap", "gap_highsnr")
    total = result.column("r1") + result.column("r2")
    np.testing.assert_allclose(result.column("sum"), total, rtol=1e-12)
    np.testing.assert_allclose(result.column("gap"), result.column("sum") - result.column("oma_sum"), atol=1e-9)
    assert float(result.column("r1")[0]) < float(result.column("r2")[0])


def test_miso_schemes_are_ordered(params) -> None:
    common = {
        "num_trials": 40,
        "deployment": SplitSquareDeployment(),
        "num_users": 2,
        "num_antennas": 2,
        "sweep_dbm": (30.0,),
    }
    rmin = {
        scheme: float(run_sweep(_plan(scheme=scheme, **common), params, workers=1).column("rmin")[0])
        for scheme in ("miso-mrc", "miso-zf", "miso-bound")
    }

    assert rmin["miso-mrc"] <= rmin["miso-bound"]
    assert rmin["miso-zf"] <= rmin["miso-bound"]


def test_miso_search_beats_the_closest_points(params) -> None:
    common = {
        "num_trials": 3,
        "deployment": SplitSquareDeployment(),
        "num_users": 2,
        "num_antennas": 2,
        "sweep_dbm": (30.0,),
        "search_window_wavelengths": 0.5,
    }
    zf = run_sweep(_plan(scheme="miso-zf", **common), params, workers=1)
    search = run_sweep(_plan(scheme="miso-search", **common), params, workers=1)

    assert float(search.column("rmin")[0]) >= float(zf.column("rmin")[0]) - 1e-9
    assert search.columns == ("sum", "r1", "r2", "rmin")


def test_conventional_miso_antennas_run(params) -> None:
    plan = _plan(
        num_trials=10,
        deployment=SplitSquareDeployment(),
        scheme="miso-mrc",
        miso_antennas="conventional",
        num_users=2,
        num_antennas=2,
    )

    result = run_sweep(plan, params, workers=1)

    assert np.all(np.isfinite(result.mean))


def test_singular_zero_forcing_scores_zero_for_the_trial(params, monkeypatch) -> None:
    def collinear(H):
        raise SingularityError("user channels are collinear; zero forcing is undefined")

    monkeypatch.setattr(harness, "zf_beamformer", collinear)
    plan = _plan(
        deployment=SplitSquareDeployment(),
        scheme="miso-zf",
        num_users=2,
        num_antennas=2,
        sweep_dbm=(10.0, 30.0),
    )
    users = sample_users(plan.deployment, user_slots(plan), 3, block_generator(2, 0))
    cursor = get_log_manager().latest_cursor()

    rates = evaluate_trials(plan, params, users)

    assert rates.shape == (3, 2, 4)
    assert np.all(rates == 0.0)
    events = get_log_manager().get_logs(after=cursor, event_prefix="harness.miso.singular")
    assert [event["payload"]["trial"] for event in events] == [0, 1, 2]
