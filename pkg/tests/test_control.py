"""Controller tests: classification, inference, resolution, smoothing."""
import itertools

import numpy as np
import pytest

from myoloop import _kernels_py
from myoloop.control import (
    ControllerConfig,
    ControllerState,
    Mode,
    PreparedRefs,
    calibrate_threshold,
    classify_discrete,
    control_step,
    infer_weights,
    prepare_live,
    resolve_antagonists,
    smooth_target,
    synthesize_references,
)
from myoloop.errors import ConfigError, InsufficientCalibration, NotCalibrated
from myoloop.signal import (
    DOF_POSES,
    Dof,
    EmgWindow,
    KdeModel,
    ReferenceActivity,
    default_pattern,
    synth_window,
)
from myoloop.transport import w1_1d


def ref_distance(live, ref):
    return np.mean([w1_1d(live[c], ref.bank[c]) for c in range(live.shape[0])])


def constant_reference(value, rid, dof, n=16):
    bank = np.full((8, n), float(value))
    kde = KdeModel(support=bank, bandwidth=np.full(8, 1e-3))
    return ReferenceActivity(id=rid, kde=kde, bank=bank,
                             target_pose=DOF_POSES[dof], dof=dof)


class TestConfig:
    def test_defaults(self):
        cfg = ControllerConfig()
        assert cfg.alpha == 0.3
        assert cfg.steps == 20
        assert cfg.lr == 0.5
        assert cfg.h == 1e-2
        assert cfg.mode is Mode.CONTINUOUS

    def test_json_round_trip(self):
        cfg = ControllerConfig(alpha=0.4, threshold=0.2, mode="discrete",
                               feedback_enabled=False)
        back = ControllerConfig.from_json(cfg.to_json())
        assert back == cfg

    @pytest.mark.parametrize("kwargs", [
        {"alpha": 0.0}, {"alpha": 1.2}, {"steps": 0}, {"lr": 0.0},
        {"h": 0.0}, {"threshold": -1.0}, {"mode": "discrete"},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ConfigError):
            ControllerConfig(**kwargs)

    def test_state_validation(self):
        with pytest.raises(ConfigError):
            ControllerState(prev_target=np.full(6, 1.5), prev_weights=np.zeros(3))


class TestPreparedRefs:
    def test_splits_rest(self, calibrated):
        _, refs, _, prepared = calibrated
        assert prepared.ids == ["I", "II", "III"]
        assert len(prepared.all_refs) == 4
        assert prepared.banks.shape == (3, 8, 64)
        assert prepared.groups == ["grasp", None, "grasp"]

    def test_rejects_empty(self):
        with pytest.raises(NotCalibrated):
            PreparedRefs([])

    def test_rejects_rest_only(self):
        with pytest.raises(NotCalibrated):
            PreparedRefs([constant_reference(0.0, "REST", Dof.REST)])

    def test_rejects_shape_mismatch(self):
        refs = [constant_reference(0.2, "I", Dof.I, n=16),
                constant_reference(0.4, "II", Dof.II, n=32)]
        with pytest.raises(NotCalibrated):
            PreparedRefs(refs)


class TestPrepareLive:
    def test_resamples_to_bank_length(self):
        rng = np.random.default_rng(0)
        w = EmgWindow(samples=np.abs(rng.standard_normal((8, 100))))
        live = prepare_live(w, 64)
        assert live.shape == (8, 64)
        assert (np.diff(live, axis=1) >= 0).all()

    def test_equal_length_only_sorted(self):
        rng = np.random.default_rng(1)
        w = EmgWindow(samples=np.abs(rng.standard_normal((8, 64))))
        live = prepare_live(w, 64)
        np.testing.assert_array_equal(live, np.sort(w.samples, axis=1))


class TestClassifyDiscrete:
    def test_exact_match(self, calibrated):
        _, refs, threshold, _ = calibrated
        for ref in refs:
            assert classify_discrete(ref.bank, refs, threshold) == ref.id

    def test_zero_live_is_rest(self, calibrated):
        _, refs, threshold, _ = calibrated
        live = np.zeros((8, 64))
        assert classify_discrete(live, refs, threshold) == "REST"

    def test_blend_rejected_at_tight_threshold(self, calibrated):
        # Halfway between two references, both distances stay far above
        # half the smallest within-reference spread.
        pat, refs, _, _ = calibrated
        rng = np.random.default_rng(77)
        intra = []
        for j, ref in enumerate(refs):
            a = np.zeros(3)
            if ref.dof is not Dof.REST:
                a[j] = 1.0
            w = synth_window(a, pat, 500, rng)
            intra.append(ref_distance(prepare_live(w, ref.n_bank), ref))
        theta = 0.5 * min(intra)
        mix = 0.5 * refs[0].bank + 0.5 * refs[1].bank
        assert ref_distance(mix, refs[0]) > theta
        assert ref_distance(mix, refs[1]) > theta
        assert classify_discrete(mix, refs, theta) is None

    def test_tie_breaks_low_index(self):
        refs = [constant_reference(0.5, "A", Dof.I),
                constant_reference(0.5, "B", Dof.II)]
        live = np.full((8, 16), 0.5)
        assert classify_discrete(live, refs, 0.1) == "A"

    def test_scale_argmin_invariance(self, calibrated):
        pat, refs, _, _ = calibrated
        rng = np.random.default_rng(88)
        w = synth_window(np.array([0.0, 0.8, 0.0]), pat, 200, rng)
        live = prepare_live(w, refs[0].n_bank)
        for lam in (0.25, 4.0):
            scaled_refs = [
                ReferenceActivity(
                    id=r.id, kde=KdeModel(support=r.kde.support * lam,
                                          bandwidth=r.kde.bandwidth * lam),
                    bank=r.bank * lam, target_pose=r.target_pose, dof=r.dof,
                    antagonist_group=r.antagonist_group)
                for r in refs
            ]
            assert classify_discrete(live * lam, scaled_refs, 1e9) == \
                classify_discrete(live, refs, 1e9)


class TestCalibrateThreshold:
    def test_zero_variance_gives_mu(self):
        # Constant recordings: the bank still carries floor-bandwidth
        # bootstrap noise, the identical held-out windows all land at the
        # same distance, so sigma vanishes and theta collapses to mu > 0.
        from myoloop.signal import record_reference
        recordings = [EmgWindow(samples=np.full((8, 64), 0.3))] * 3
        ref = record_reference(recordings, "I", Dof.I, DOF_POSES[Dof.I],
                               np.random.default_rng(12), "grasp")
        heldout = {"I": [EmgWindow(samples=np.full((8, 64), 0.3))] * 3}
        theta = calibrate_threshold([ref], heldout)
        mu = ref_distance(np.full((8, 64), 0.3), ref)
        assert theta == pytest.approx(mu, abs=1e-12)
        assert theta > 0

    def test_below_cross_reference_distances(self, calibrated):
        _, refs, threshold, _ = calibrated
        for a, b in itertools.permutations(refs, 2):
            assert ref_distance(a.bank, b) > threshold

    def test_homogeneous_in_intensity_scale(self, calibrated):
        pat, refs, _, _ = calibrated
        rng = np.random.default_rng(99)
        windows = {}
        for j, ref in enumerate(refs):
            a = np.zeros(3)
            if ref.dof is not Dof.REST:
                a[j] = 1.0
            windows[ref.id] = [synth_window(a, pat, 300, rng) for _ in range(3)]
        theta = calibrate_threshold(refs, windows)
        lam = 3.5
        scaled_refs = [
            ReferenceActivity(
                id=r.id, kde=KdeModel(support=r.kde.support * lam,
                                      bandwidth=r.kde.bandwidth * lam),
                bank=r.bank * lam, target_pose=r.target_pose, dof=r.dof,
                antagonist_group=r.antagonist_group)
            for r in refs
        ]
        scaled_windows = {
            rid: [EmgWindow(samples=w.samples * lam, t=w.t) for w in ws]
            for rid, ws in windows.items()
        }
        theta_scaled = calibrate_threshold(scaled_refs, scaled_windows)
        assert theta_scaled == pytest.approx(lam * theta, rel=1e-12)

    def test_insufficient_windows(self, calibrated):
        _, refs, _, _ = calibrated
        with pytest.raises(InsufficientCalibration):
            calibrate_threshold(refs, {r.id: [] for r in refs})


class TestInferWeights:
    def test_exact_bank_fixed_point(self, calibrated, continuous_cfg):
        _, refs, _, prepared = calibrated
        for j in range(3):
            e = np.zeros(3)
            e[j] = 1.0
            state = ControllerState(prev_target=np.zeros(6), prev_weights=e)
            w = infer_weights(prepared.banks[j], prepared, state, continuous_cfg)
            np.testing.assert_array_equal(w, e)

    def test_recovers_mixed_activation(self, calibrated, continuous_cfg):
        # True effort (0.6, 0.3, 0); compare against the 0.05-grid oracle.
        pat, _, _, prepared = calibrated
        a = np.array([0.6, 0.3, 0.0])
        window = synth_window(a, pat, 100, np.random.default_rng(42))
        live = prepare_live(window, prepared.n_bank)
        state = ControllerState.initial(3)
        w = infer_weights(live, prepared, state, continuous_cfg)
        assert np.abs(w - a).max() <= 0.1
        grid = np.array(list(itertools.product(np.arange(0, 1.0001, 0.05),
                                               repeat=3)))
        d_grid = _kernels_py.distance_batch(live, prepared.banks_permuted, grid)
        d_w = _kernels_py.distance_batch(live, prepared.banks_permuted,
                                         w[None, :])[0]
        assert d_w <= d_grid.min() + 0.05

    def test_zero_live_drives_weights_to_zero(self, calibrated, continuous_cfg):
        _, _, _, prepared = calibrated
        live = np.zeros((8, 64))
        for start in (np.full(3, 0.5), np.array([0.2, 0.4, 0.1])):
            state = ControllerState(prev_target=np.zeros(6), prev_weights=start)
            w = infer_weights(live, prepared, state, continuous_cfg)
            np.testing.assert_array_equal(w, np.zeros(3))


class TestResolveAntagonists:
    def test_max_within_group(self, calibrated):
        _, _, _, prepared = calibrated
        out = resolve_antagonists(np.array([0.7, 0.4, 0.2]), prepared)
        np.testing.assert_allclose(out, [0.7, 0.4, 0.0])

    def test_zero_passthrough(self, calibrated):
        _, _, _, prepared = calibrated
        out = resolve_antagonists(np.zeros(3), prepared)
        np.testing.assert_array_equal(out, np.zeros(3))

    def test_tie_keeps_lowest_index(self, calibrated):
        _, _, _, prepared = calibrated
        out = resolve_antagonists(np.array([0.5, 0.3, 0.5]), prepared)
        np.testing.assert_allclose(out, [0.5, 0.3, 0.0])

    def test_group_exclusivity_property(self, calibrated):
        _, _, _, prepared = calibrated
        rng = np.random.default_rng(3)
        for _ in range(50):
            out = resolve_antagonists(rng.uniform(0, 1, 3), prepared)
            assert (out[0] == 0.0) or (out[2] == 0.0)


class TestSmoothTarget:
    def test_geometric_decay(self, calibrated, continuous_cfg):
        _, _, _, prepared = calibrated
        p0 = np.array([1.0, 0.8, 0.6, 0.4, 0.2, 1.0])
        state = ControllerState(prev_target=p0.copy(), prev_weights=np.zeros(3))
        for k in range(1, 101):
            pose = smooth_target(np.zeros(3), prepared, state, continuous_cfg)
            np.testing.assert_allclose(pose, 0.7 ** k * p0, atol=1e-12)

    def test_blend_fixed_point(self, calibrated, continuous_cfg):
        _, _, _, prepared = calibrated
        w = np.array([0.5, 0.25, 0.0])
        blend = np.clip(w @ prepared.poses, 0, 1)
        state = ControllerState(prev_target=blend.copy(), prev_weights=w)
        pose = smooth_target(w, prepared, state, continuous_cfg)
        np.testing.assert_allclose(pose, blend, atol=1e-15)

    def test_power_grip_rise(self, calibrated, continuous_cfg):
        _, _, _, prepared = calibrated
        state = ControllerState.initial(3)
        e1 = np.array([1.0, 0.0, 0.0])
        for k in range(1, 101):
            pose = smooth_target(e1, prepared, state, continuous_cfg)
            np.testing.assert_allclose(pose[:5], np.full(5, 1 - 0.7 ** k),
                                       atol=1e-12)
            assert pose[5] == 0.0

    def test_convex_combination_bounds(self, calibrated, continuous_cfg):
        _, _, _, prepared = calibrated
        rng = np.random.default_rng(4)
        state = ControllerState(prev_target=rng.uniform(0, 1, 6),
                                prev_weights=np.zeros(3))
        for _ in range(50):
            prev = state.prev_target.copy()
            w = rng.uniform(0, 2, 3)  # deliberately out of range
            blend = np.clip(w @ prepared.poses, 0, 1)
            pose = smooth_target(w, prepared, state, continuous_cfg)
            assert ((pose >= np.minimum(prev, blend) - 1e-12)
                    & (pose <= np.maximum(prev, blend) + 1e-12)).all()
            assert ((pose >= 0) & (pose <= 1)).all()


class TestControlStep:
    def test_discrete_binary_activation(self, calibrated, discrete_cfg):
        _, refs, _, prepared = calibrated
        state = ControllerState.initial(3)
        window = EmgWindow(samples=prepared.banks[0])
        res = control_step(window, prepared, state, discrete_cfg)
        np.testing.assert_array_equal(res.pose, DOF_POSES[Dof.I])
        assert res.ref_id == "I"
        assert res.mode is Mode.DISCRETE

    def test_discrete_holds_on_no_match(self, calibrated):
        _, refs, threshold, prepared = calibrated
        cfg = ControllerConfig(mode="discrete", threshold=1e-9)
        hold = np.array([0.5, 0.5, 0.5, 0.5, 0.5, 0.0])
        state = ControllerState(prev_target=hold.copy(), prev_weights=np.zeros(3))
        rng = np.random.default_rng(5)
        window = EmgWindow(samples=np.abs(rng.standard_normal((8, 64))))
        res = control_step(window, prepared, state, cfg)
        np.testing.assert_array_equal(res.pose, hold)
        assert res.ref_id is None

    def test_continuous_follows_geometric_closure(self, calibrated,
                                                  continuous_cfg):
        _, _, _, prepared = calibrated
        state = ControllerState.initial(3)
        window = EmgWindow(samples=prepared.banks[0])
        for k in range(1, 21):
            res = control_step(window, prepared, state, continuous_cfg)
            np.testing.assert_allclose(res.pose[:5], np.full(5, 1 - 0.7 ** k),
                                       atol=1e-12)
        np.testing.assert_array_equal(res.weights, [1.0, 0.0, 0.0])
        assert res.distance == 0.0

    def test_alternating_input_stays_interior(self, calibrated, continuous_cfg):
        _, _, _, prepared = calibrated
        state = ControllerState.initial(3)
        on = EmgWindow(samples=prepared.banks[0])
        off = EmgWindow(samples=np.zeros((8, 64)))
        for k in range(40):
            res = control_step(on if k % 2 == 0 else off, prepared, state,
                               continuous_cfg)
            assert (res.pose[:5] > 0.0).all()
            assert (res.pose[:5] < 1.0).all()

    def test_warm_start_settles(self, calibrated, continuous_cfg):
        # Stationary input: consecutive inferred weights coincide within
        # 1e-3 after at most 10 steps.
        pat, _, _, prepared = calibrated
        window = synth_window(np.array([0.5, 0.2, 0.0]), pat, 100,
                              np.random.default_rng(6))
        state = ControllerState.initial(3)
        prev = state.prev_weights.copy()
        deltas = []
        for _ in range(10):
            res = control_step(window, prepared, state, continuous_cfg)
            deltas.append(np.abs(res.weights - prev).max())
            prev = res.weights.copy()
        assert deltas[-1] < 1e-3

    def test_discrete_requires_threshold(self, calibrated):
        _, _, _, prepared = calibrated
        cfg = ControllerConfig()
        cfg.mode = Mode.DISCRETE  # bypass constructor check
        state = ControllerState.initial(3)
        with pytest.raises(NotCalibrated):
            control_step(EmgWindow(samples=np.zeros((8, 64))), prepared,
                         state, cfg)


def test_synthesize_references_shape(calibrated):
    _, refs, threshold, _ = calibrated
    assert [r.id for r in refs] == ["I", "II", "III", "REST"]
    assert threshold > 0
    assert refs[3].dof is Dof.REST
    assert not refs[3].target_pose.any()
