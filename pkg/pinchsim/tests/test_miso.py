import math

import numpy as np
import pytest

from pinchsim.errors import (
    DegenerateInputError,
    InfeasiblePlacementError,
    ParameterDomainError,
    SearchFailureError,
    ShapeError,
    SingularityError,
)
from pinchsim.models import Point3
from pinchsim.services.geometry import Waveguide
from pinchsim.services.miso import (
    FEED_INVARIANCE_RTOL,
    FEED_PHASE_ULPS,
    BeamformingMatrix,
    algorithm1_search,
    channel_matrix,
    conventional_scenario,
    feed_invariance_rtol,
    gain_matrix,
    local_search,
    mrc_beamformer,
    orthogonality_residual,
    paired_waveguides,
    phase_matched_beamformer,
    phase_resolution,
    pinching_scenario,
    refine_search,
    sinr,
    sinr_curves,
    sinr_upper_bound,
    span_grid,
    symmetric_f,
    symmetric_feasible_placement,
    symmetric_scenario,
    window_grid,
    zf_beamformer,
)


def _random_channel(rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))


@pytest.fixture()
def split_users():
    return (Point3.of(2.0, 8.5, 0.0), Point3.of(-3.0, -9.0, 0.0))


@pytest.fixture()
def scenario(params, split_users, rho_30dbm):
    return pinching_scenario(split_users, paired_waveguides(20.0, params), rho_30dbm)


@pytest.fixture()
def placement(params):
    return symmetric_feasible_placement(-5.0, 5.0, 20.0, params.waveguide_height_m, params)


def test_sinr_of_orthogonal_channels() -> None:
    assert sinr(np.eye(2), np.eye(2), 2.0).tolist() == [2.0, 2.0]
    curves = sinr_curves(np.eye(2), np.eye(2), np.array([1.0, 10.0]))
    assert curves.shape == (2, 2)
    assert curves[:, 0].tolist() == [1.0, 10.0]


def test_mrc_matches_its_closed_form(rng) -> None:
    for _ in range(20):
        h = _random_channel(rng)
        rho = 50.0
        values = sinr(h, mrc_beamformer(h), rho)
        norms = np.sum(np.abs(h) ** 2, axis=1)
        cross = abs(np.vdot(h[0], h[1])) ** 2
        assert values[0] == pytest.approx(rho * norms[0] / (rho * cross / norms[1] + 1.0), rel=1e-9)
        assert values[1] == pytest.approx(rho * norms[1] / (rho * cross / norms[0] + 1.0), rel=1e-9)
        assert np.diag(gain_matrix(h, mrc_beamformer(h))) == pytest.approx(norms, rel=1e-12)


def test_zero_forcing_removes_interference(rng) -> None:
    for _ in range(50):
        h = _random_channel(rng)
        rho = float(10.0 ** rng.uniform(-1.0, 3.0))
        zf = zf_beamformer(h)
        products = np.abs(h.conj() @ zf.p)
        norms = np.sum(np.abs(h) ** 2, axis=1)
        cross = abs(np.vdot(h[0], h[1])) ** 2
        assert products[0, 1] <= 1e-12 * math.sqrt(norms[0])
        assert products[1, 0] <= 1e-12 * math.sqrt(norms[1])
        values = sinr(h, zf, rho)
        assert values[0] == pytest.approx(rho * (norms[0] - cross / norms[1]), rel=1e-9)
        assert np.all(values <= sinr_upper_bound(h, rho) * (1 + 1e-12))


def test_beamformer_input_checks() -> None:
    with pytest.raises(SingularityError):
        zf_beamformer(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(DegenerateInputError):
        zf_beamformer(np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(DegenerateInputError):
        mrc_beamformer(np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(ShapeError):
        zf_beamformer(np.ones((3, 2)))
    with pytest.raises(ParameterDomainError):
        BeamformingMatrix(p=np.ones((2, 2)))


def test_channel_matrix_uses_spherical_path_loss(params, constants, scenario, split_users) -> None:
    H = channel_matrix(scenario, params)
    r = math.hypot(8.5 - 20.0 / 3.0, params.waveguide_height_m)

    assert H.h.shape == (2, 2)
    assert abs(H.h[0, 0]) == pytest.approx(math.sqrt(constants.eta) / r, rel=1e-12)
    assert scenario.antennas[0].x == split_users[0].x
    assert H.norms_sq == pytest.approx(np.sum(np.abs(H.h) ** 2, axis=1))


def test_conventional_antennas_straddle_the_centre(params, constants, split_users, rho_30dbm) -> None:
    conventional = conventional_scenario(split_users, params, rho_30dbm)

    assert conventional.waveguide_lengths().tolist() == [0.0, 0.0]
    xs = sorted(antenna.x for antenna in conventional.antennas)
    assert xs == pytest.approx([-constants.wavelength_m / 4.0, constants.wavelength_m / 4.0])


def test_phase_matched_beamformer_is_mrc(params, scenario) -> None:
    H = channel_matrix(scenario, params)

    np.testing.assert_allclose(phase_matched_beamformer(scenario, params).p, mrc_beamformer(H).p, atol=1e-10)


def _zf_sinr(scenario, params) -> np.ndarray:
    H = channel_matrix(scenario, params)
    return sinr(H, zf_beamformer(H), scenario.rho)


def _matched_sinr(scenario, params) -> np.ndarray:
    return sinr(channel_matrix(scenario, params), phase_matched_beamformer(scenario, params), scenario.rho)


@pytest.mark.parametrize("feeds", [(0.0, 3.7), (-10.0, 10.0), (9.5, -9.5)])
def test_sinrs_do_not_depend_on_the_feeds(params, scenario, feeds) -> None:
    moved = scenario.with_feeds(*feeds)
    rtol = feed_invariance_rtol(scenario, moved, params)

    assert rtol < 1e-6
    np.testing.assert_allclose(_zf_sinr(moved, params), _zf_sinr(scenario, params), rtol=rtol, atol=0.0)
    np.testing.assert_allclose(
        _matched_sinr(moved, params), _matched_sinr(scenario, params), rtol=rtol, atol=0.0
    )


def test_feed_tolerance_tracks_the_phase_resolution(params, scenario) -> None:
    moved = scenario.with_feeds(-10.0, 10.0)

    assert phase_resolution(moved, params) > FEED_INVARIANCE_RTOL
    assert feed_invariance_rtol(scenario, moved, params) >= FEED_PHASE_ULPS * phase_resolution(moved, params)
    near = scenario.with_feeds(scenario.antennas[0].x, scenario.antennas[1].x)
    assert phase_resolution(near, params) < phase_resolution(moved, params)


def test_symmetric_f_is_odd_about_the_midpoint() -> None:
    assert symmetric_f(0.0, -5.0, 5.0, 20.0, 3.0) == pytest.approx(0.0, abs=1e-12)
    xs = np.linspace(-5.0, 5.0, 101)
    values = [symmetric_f(float(x), -5.0, 5.0, 20.0, 3.0) for x in xs]
    assert np.all(np.diff(values) > 0)


def test_symmetric_placement_meets_both_constraints(params, constants, placement, rho_30dbm) -> None:
    scenario = symmetric_scenario(placement, 20.0, params, rho_30dbm)
    report = orthogonality_residual(scenario, params)
    H = channel_matrix(scenario, params)
    diagonal = np.abs(np.diag(H.h.conj() @ phase_matched_beamformer(scenario, params).p))

    assert placement.k % 2 != 0
    assert placement.f_value_m == pytest.approx(placement.k * constants.wavelength_m / 4.0, abs=1e-12)
    assert 0.0 <= placement.delta_m <= 10.0
    assert report.constraint1_residual_m < 1e-10
    assert report.constraint2_residual < 1e-12
    assert report.cross_term < 1e-8 * diagonal[0]
    assert report.cross_term_reverse < 1e-8 * diagonal[1]
    np.testing.assert_allclose(
        sinr(H, zf_beamformer(H), rho_30dbm), sinr_upper_bound(H, rho_30dbm), rtol=1e-9
    )


def test_moving_off_the_solution_breaks_orthogonality(params, constants, placement, rho_30dbm) -> None:
    scenario = symmetric_scenario(placement, 20.0, params, rho_30dbm)
    shift = constants.wavelength_m / 16.0
    moved = scenario.with_antenna_x(scenario.antennas[0].x + shift, scenario.antennas[1].x - shift)
    report = orthogonality_residual(moved, params)
    H = channel_matrix(moved, params)
    diagonal = np.abs(np.diag(H.h.conj() @ phase_matched_beamformer(moved, params).p))

    assert report.constraint2_residual < 1e-12
    assert report.constraint1_residual_m > 1e-4
    assert report.cross_term > 1e-3 * diagonal[0]


def test_symmetric_placement_rejects_close_users(params) -> None:
    with pytest.raises(InfeasiblePlacementError) as excinfo:
        symmetric_feasible_placement(0.0, 0.001, 20.0, params.waveguide_height_m, params)
    assert excinfo.value.achievable_range[1] == 0.0
    with pytest.raises(ParameterDomainError):
        symmetric_feasible_placement(1.0, 1.0, 20.0, params.waveguide_height_m, params)


def test_candidate_grids() -> None:
    waveguide = Waveguide(y_offset_m=0.0, height_m=3.0, x_min_m=-0.6, x_max_m=5.0)

    assert window_grid(0.0, 1.0, 0.25, waveguide).tolist() == [-0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0]
    assert span_grid(Waveguide(0.0, 3.0, 0.0, 1.0), 0.25).tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ParameterDomainError):
        window_grid(0.0, 1.0, 0.0, waveguide)


def test_single_cell_search_is_plain_zero_forcing(params, scenario) -> None:
    x1, x2 = scenario.antennas[0].x, scenario.antennas[1].x

    result = algorithm1_search(scenario, np.array([x1]), np.array([x2]), params, keep_grid=True)

    H = channel_matrix(scenario, params)
    np.testing.assert_allclose(result.sinrs, sinr(H, zf_beamformer(H), scenario.rho), rtol=1e-12)
    assert result.indices == (0, 0)
    assert result.min_sinr_grid[0, 0] == pytest.approx(result.min_sinr, rel=1e-8)


def test_search_finds_the_orthogonal_placement(params, constants, placement, rho_30dbm) -> None:
    scenario = symmetric_scenario(placement, 20.0, params, rho_30dbm)
    x1, x2 = scenario.antennas[0].x, scenario.antennas[1].x
    step = constants.wavelength_m / 10.0
    grid2 = x2 + step * np.arange(-5, 6)

    result = algorithm1_search(scenario, np.array([x1]), grid2, params)

    target = float(np.min(sinr_upper_bound(channel_matrix(scenario, params), rho_30dbm)))
    assert result.indices == (0, 5)
    assert result.min_sinr >= target * (1 - 1e-6)


def test_larger_grids_never_do_worse(params, constants, scenario) -> None:
    x1, x2 = scenario.antennas[0].x, scenario.antennas[1].x
    step = constants.wavelength_m / 7.0
    small = algorithm1_search(scenario, x1 + step * np.arange(3), x2 + step * np.arange(3), params)
    large = algorithm1_search(scenario, x1 + step * np.arange(9), x2 + step * np.arange(9), params)

    assert large.min_sinr >= small.min_sinr * (1 - 1e-12)
    assert np.min(large.bound_sinrs) >= np.min(small.bound_sinrs) * (1 - 1e-12)


def test_search_ties_keep_the_first_cell(params, scenario) -> None:
    x1, x2 = scenario.antennas[0].x, scenario.antennas[1].x

    result = algorithm1_search(scenario, np.array([x1, x1]), np.array([x2, x2]), params)

    assert result.indices == (0, 0)


def test_search_fails_when_every_cell_is_singular(params, rho_30dbm) -> None:
    user = Point3.of(1.0, 0.0, 0.0)
    waveguides = paired_waveguides(20.0, params)
    shared = pinching_scenario((user, user), waveguides, rho_30dbm)

    with pytest.raises(SearchFailureError):
        algorithm1_search(shared, np.array([0.0, 1.0]), np.array([0.5, 1.0]), params)


def test_search_needs_waveguides(params, split_users, rho_30dbm) -> None:
    conventional = conventional_scenario(split_users, params, rho_30dbm)

    with pytest.raises(ParameterDomainError):
        algorithm1_search(conventional, np.array([0.0]), np.array([0.0]), params)
    with pytest.raises(ParameterDomainError):
        local_search(conventional, params)


def test_local_search_improves_on_the_closest_points(params, constants, scenario) -> None:
    H = channel_matrix(scenario, params)
    baseline = float(np.min(sinr(H, zf_beamformer(H), scenario.rho)))

    result = local_search(scenario, params, window_wavelengths=2.0, step_wavelengths=0.25)

    assert result.min_sinr >= baseline * (1 - 1e-12)
    for found, antenna in zip(result.antenna_x, scenario.antennas):
        assert abs(found - antenna.x) <= 2.0 * constants.wavelength_m + 1e-12


def test_refined_search_keeps_the_coarse_winner(params, constants, rho_30dbm) -> None:
    users = (Point3.of(0.1, 8.0, 0.0), Point3.of(-0.2, -9.0, 0.0))
    waveguides = paired_waveguides(20.0, params, x_extent=(-0.3, 0.3))
    template = pinching_scenario(users, waveguides, rho_30dbm)
    wl = constants.wavelength_m

    coarse = algorithm1_search(
        template, span_grid(waveguides[0], wl), span_grid(waveguides[1], wl), params
    )
    refined = refine_search(template, params)

    assert refined.min_sinr >= coarse.min_sinr * (1 - 1e-12)
    assert all(-0.3 <= x <= 0.3 for x in refined.antenna_x)
