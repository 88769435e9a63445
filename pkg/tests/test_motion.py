import numpy as np
import pytest

from searchtrack.core import AgentPose, BernoulliTrack, ObjectState, action_space, unroll_action
from searchtrack.motion import (
    CvModel,
    SensorModel,
    detection_probability,
    distance,
    eta,
    eta_many,
    gen_clutter,
    invert_measurement,
    measure,
    measurement_function,
    p_d_of_distance,
    pims,
    predict_object,
    wrap_angle,
)


@pytest.mark.parametrize(
    "x, expected",
    [((0, 1, 0, 0), (1, 1, 0, 0)), ((5, 0, 7, 0), (5, 0, 7, 0)), ((2, -1, 3, 2), (1, -1, 5, 2))],
)
def test_cv_prediction_examples(x, expected):
    out = predict_object(ObjectState.from_array(x), CvModel(T0=1.0))
    assert out.as_array().tolist() == list(expected)


def test_cv_transition_composes():
    m = CvModel(T0=0.5)
    np.testing.assert_allclose(m.transition(3), m.F @ m.F @ m.F)


def test_process_noise_covariance_matches_samples(rng):
    m = CvModel()
    x = ObjectState(0, 0, 0, 0)
    draws = np.array([predict_object(x, m, True, rng).as_array() for _ in range(20000)])
    np.testing.assert_allclose(np.cov(draws.T), m.Q, atol=0.05)


@pytest.mark.parametrize("d, expected", [(200.0, 0.98), (300.0, 0.18), (400.0, 0.0), (10.0, 0.98)])
def test_detection_law_examples(d, expected):
    assert float(p_d_of_distance(d, SensorModel())) == pytest.approx(expected, abs=1e-12)


def test_detection_probability_non_increasing_in_distance():
    d = np.linspace(0, 500, 1001)
    assert np.all(np.diff(p_d_of_distance(d, SensorModel())) <= 0)


def test_distance_lifts_ground_points_to_height_one():
    p = AgentPose.at(0, 0, 1)
    assert float(distance([100.0, 0.0], p)) == pytest.approx(np.sqrt(100**2 + 29**2))


def test_noiseless_range_bearing_measurement(rng):
    p = AgentPose(0.0, 0.0, 30.0, 1)
    m = measure(p, ObjectState(100, 0, 0, 0), SensorModel(r_d=1e6), rng, noiseless=True)
    assert m.value[0] == 0.0
    assert m.value[1] == pytest.approx(np.linalg.norm([100, 0, 1 - 30]))


def test_noise_scale_at_100m():
    s = SensorModel()
    sig = s.noise_std(100.0)
    assert sig[1] == pytest.approx(10.5)
    assert sig[0] == pytest.approx(2 * np.pi / 180 + 1.7e-3)


def test_vision_noiseless_returns_position(rng):
    s = SensorModel(kind="vision", r_d=1e6)
    m = measure(AgentPose.at(0, 0, 1), ObjectState(12.5, 0, -3.0, 0), s, rng, noiseless=True)
    assert m.value.tolist() == [12.5, -3.0]


def test_bearing_of_coincident_point_is_zero():
    z = measurement_function([5.0, 5.0], AgentPose.at(5, 5, 1), SensorModel())
    assert z[0] == 0.0


def test_wrap_angle_range():
    a = wrap_angle(np.linspace(-10, 10, 1001))
    assert np.all(a > -np.pi) and np.all(a <= np.pi)
    assert wrap_angle(-np.pi) == pytest.approx(np.pi)


def test_invert_measurement_round_trip():
    s = SensorModel()
    p = AgentPose.at(100, 200, 2)
    pos = np.array([250.0, 120.0])
    np.testing.assert_allclose(invert_measurement(measurement_function(pos, p, s), p, s), pos)


def test_missed_detection_beyond_reach(rng):
    p = AgentPose.at(0, 0, 1)
    assert all(measure(p, ObjectState(1000, 0, 0, 0), SensorModel(), rng) is None for _ in range(100))


def test_clutter_rate_zero_never_fires(rng):
    s = SensorModel(clutter_rate=0.0)
    assert all(gen_clutter("a", AgentPose.at(0, 0, 1), s, rng) is None for _ in range(1000))


def test_clutter_frequency(rng):
    s = SensorModel(clutter_rate=0.2)
    p = AgentPose.at(0, 0, 1)
    hits = sum(gen_clutter("a", p, s, rng) is not None for _ in range(100_000))
    assert abs(hits / 1e5 - (1 - np.exp(-0.2))) < 0.01
    assert 1 - np.exp(-0.2) == pytest.approx(0.1813, abs=1e-4)


def test_clutter_stays_in_window(rng):
    for kind in ("range_bearing", "vision"):
        s = SensorModel(kind=kind, clutter_rate=5.0)
        p = AgentPose.at(10, 20, 1)
        draws = [gen_clutter("a", p, s, rng) for _ in range(500)]
        zs = np.array([m.value for m in draws if m is not None])
        if kind == "range_bearing":
            assert np.all((zs[:, 1] >= 0) & (zs[:, 1] <= s.max_range))
        else:
            assert np.all(np.hypot(zs[:, 0] - 10, zs[:, 1] - 20) <= s.max_range)


def test_eta_many_matches_eta(rng):
    s = SensorModel()
    parts = np.column_stack([rng.uniform(0, 400, 50), rng.normal(size=50), rng.uniform(0, 400, 50), rng.normal(size=50)])
    poses = [AgentPose.at(100, 100, 1), AgentPose.at(300, 50, 2), AgentPose.at(0, 0, 3)]
    zs = [None, np.array([0.3, 150.0]), np.array([1.0, 250.0])]
    for rule in ("clutter", "paper"):
        s = SensorModel(update_rule=rule)
        many = eta_many(zs, parts, poses, s)
        for i, (z, p) in enumerate(zip(zs, poses)):
            np.testing.assert_allclose(many[i], eta(z, parts, p, s), rtol=1e-12, atol=1e-300)


def _plans(x, y, n_agents=1, heading=8, horizon=2):
    acts = action_space(10.0)
    return [unroll_action(AgentPose.at(x, y, s + 1), acts[heading], horizon) for s in range(n_agents)]


def _static_track(x, y):
    return BernoulliTrack("7", 0.9, [[x, 0, y, 0]], [1.0])


def test_pims_detects_when_close():
    out = pims([_static_track(50, 0)], _plans(0, 0, 2), SensorModel(), CvModel())
    assert all("7" in step[s] for step in out for s in range(2))


def test_pims_empty_when_far():
    out = pims([_static_track(400, 0)], _plans(0, 0, 2), SensorModel(), CvModel())
    assert all(step[s] == {} for step in out for s in range(2))


def test_pims_threshold_is_inclusive():
    # agent placed at height 1 so the 3D distance is exactly 260 m
    plan = unroll_action(AgentPose(0.0, 0.0, 1.0, 1), action_space(10.0)[8], 1)
    s = SensorModel()
    assert float(detection_probability(plan.poses[0], [260.0, 0.0], s)) == 0.5
    out = pims([_static_track(260, 0)], [plan], s, CvModel())
    assert "7" in out[0][0]
    m = out[0][0]["7"]
    np.testing.assert_allclose(m.value, measurement_function([260.0, 0.0], plan.poses[0], s))


def test_pims_propagates_estimate():
    track = BernoulliTrack("7", 0.9, [[0, 100, 0, 0]], [1.0])  # reaches x=300 after 3 steps
    plans = _plans(0, 0, horizon=3)
    out = pims([track], plans, SensorModel(), CvModel())
    assert ["7" in step[0] for step in out] == [True, True, False]
