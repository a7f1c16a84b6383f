import numpy as np
import pytest

from grassclust import synthgen as sg
from grassclust.errors import ConfigError, InputError
from grassclust.louvain import ClusterAssignment


def test_db_convention():
    assert sg.db_to_std(-10.0) == pytest.approx(10 ** -0.5)
    assert sg.db_to_std(sg.NO_NOISE) == 0.0


def test_clean_connectivity_noise_level():
    spec = sg.StateSpec(((0, 1, 2, 3, 4), (5, 6, 7, 8, 9)), mu=0.0, sigma_db=-10.0)
    M = sg.gen_connectivity(spec, 0)
    truth = (spec.node_labels[:, None] == spec.node_labels[None, :]).astype(float)
    resid = (M - truth)[np.triu_indices(10)]
    np.testing.assert_allclose(M, M.T)
    assert resid.std() == pytest.approx(0.3162, abs=0.08)


def test_outlier_count():
    spec = sg.StateSpec(((0, 1, 2, 3, 4), (5, 6, 7, 8, 9)), mu=0.2, sigma_db=sg.NO_NOISE)
    M = sg.gen_connectivity(spec, 3)
    truth = (spec.node_labels[:, None] == spec.node_labels[None, :]).astype(float)
    outlier = M - truth
    assert np.count_nonzero(np.isclose(outlier, 0.2, rtol=0, atol=1e-12)) == 36
    assert np.count_nonzero(np.abs(outlier) > 1e-12) == 36


def test_noise_disabled_is_exact():
    spec = sg.StateSpec(((0, 1), (2, 3)), mu=0.0, sigma_db=sg.NO_NOISE, n_outlier_entries=0)
    np.testing.assert_array_equal(sg.gen_connectivity(spec, 1), np.kron(np.eye(2), np.ones((2, 2))))


def test_too_many_outliers():
    with pytest.raises(ConfigError):
        sg.gen_connectivity(sg.StateSpec(((0, 1), (2,)), n_outlier_entries=8), 0)


def test_state_spec_validation():
    with pytest.raises(ConfigError):
        sg.StateSpec(((0, 1), (1, 2)))
    with pytest.raises(ConfigError):
        sg.StateSpec(((0, 1), (2, 3)), rhythm=(0.1,) * 3)
    with pytest.raises(ConfigError):
        sg.StateSpec(((0, 1),), rhythm=0.7)


def test_presets():
    assert [s.mu for s in sg.preset_states("d4")] == [0.2, 0.3, 0.4, 0.5]
    assert {s.sigma_db for s in sg.preset_states("d2")} == {-8.0}
    with pytest.raises(ConfigError):
        sg.preset_states("d9")


def test_default_dataset_shape_and_labels():
    ds = sg.gen_timeseries(sg.preset_states("d1"), 0)
    assert ds.series.shape == (600, 10)
    np.testing.assert_array_equal(ds.time_labels, np.repeat(np.arange(4), 150))
    ClusterAssignment.from_labels(ds.time_labels)
    for lab in ds.node_labels:
        ClusterAssignment(lab, int(lab.max()) + 1)
    assert ds.boundaries == [(0, 149), (150, 299), (300, 449), (450, 599)]


def test_determinism():
    a = sg.gen_timeseries(sg.preset_states("d5"), 11)
    b = sg.gen_timeseries(sg.preset_states("d5"), 11)
    np.testing.assert_array_equal(a.series, b.series)
    assert not np.array_equal(a.series, sg.gen_timeseries(sg.preset_states("d5"), 12).series)


def test_single_community_noise_free_columns_identical():
    spec = sg.StateSpec(((0, 1, 2, 3),), sigma_db=sg.NO_NOISE, n_outlier_entries=0, samples=80)
    Y = sg.gen_timeseries([spec], 4).series
    for j in range(1, 4):
        np.testing.assert_array_equal(Y[:, j], Y[:, 0])
    np.testing.assert_allclose(np.corrcoef(Y.T), 1.0)


def test_smoothed_latent_spectrum():
    rng = np.random.default_rng(0)
    x = sg.smooth_latent(20000, rng)
    # variance of white noise after five passes of the 3-tap smoother
    h = np.array([1.0])
    for _ in range(sg.SMOOTH_PASSES):
        h = np.convolve(h, sg.SMOOTH_TAPS)
    assert x.var() == pytest.approx(np.sum(h**2), rel=0.05)


def test_rhythm_peak_frequency():
    rng = np.random.default_rng(1)
    x = sg.smooth_latent(4096, rng, rhythm=0.1)
    f = np.fft.rfftfreq(x.size)[np.argmax(np.abs(np.fft.rfft(x)))]
    assert f == pytest.approx(0.1, abs=0.01)
    assert x.std() == pytest.approx(sg.LATENT_STD)


def test_persistent_latent_shared_across_states():
    comms = ((0, 1, 2), (3, 4, 5))
    states = [sg.StateSpec(comms, sigma_db=sg.NO_NOISE, n_outlier_entries=0, samples=50, latent_ids=("A", "B")),
              sg.StateSpec(comms, sigma_db=sg.NO_NOISE, n_outlier_entries=0, samples=50, latent_ids=("A", "C"))]
    ds = sg.gen_timeseries(states, 0)
    np.testing.assert_array_equal(ds.latent_labels[0], [0, 0, 0, 1, 1, 1])
    np.testing.assert_array_equal(ds.latent_labels[1], [0, 0, 0, 2, 2, 2])


def test_mismatched_node_counts():
    with pytest.raises(InputError):
        sg.gen_timeseries([sg.StateSpec(((0, 1),)), sg.StateSpec(((0, 1, 2),))], 0)


def test_ground_truth_is_json_ready():
    import json
    gt = sg.gen_timeseries(sg.preset_states("d1", samples=60), 2).ground_truth()
    back = json.loads(json.dumps(gt))
    assert back["time_labels"][:3] == [0, 0, 0] and len(back["node_labels_per_state"]) == 4


def test_linear_ss_guards():
    with pytest.raises(ConfigError):
        sg.LinearStateSpaceSpec.from_output_row([1.0, 0.0], 1.01 * np.eye(2), 3, np.ones(2))
    with pytest.raises(ConfigError):
        sg.LinearStateSpaceSpec(np.eye(2), 0.5 * np.eye(2) + [[0, 0.3], [0, 0]], np.ones(2))


def test_linear_ss_dead_state():
    spec = sg.LinearStateSpaceSpec.from_output_row([1.0, 2.0], np.zeros((2, 2)), 2, np.array([1.0, 1.0]))
    Y = sg.gen_linear_ss(spec, 10, 0)
    assert Y[0, 0] == 3.0
    np.testing.assert_array_equal(Y[1:], 0.0)


def test_linear_ss_deterministic():
    spec = sg.LinearStateSpaceSpec.from_output_row([1.0, 0.5], 0.9 * sg.rotation(0.4), 3, np.ones(2),
                                                  noise_upsilon=0.1, noise_omega=0.1)
    np.testing.assert_array_equal(sg.gen_linear_ss(spec, 50, 9), sg.gen_linear_ss(spec, 50, 9))
