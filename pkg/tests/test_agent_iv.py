import json
import random

import numpy as np
import pytest

from visa_agent.agents.iv import (
    PLANES,
    IvDecision,
    IvState,
    Volume,
    apply_iv,
    determine_action_iv,
    infer_main_view,
    slice_volume,
    update_positions,
)
from visa_agent.errors import OutOfBounds, StageFailure
from visa_agent.llm import MockBackend, MockScript


def backend_with(match, response) -> MockBackend:
    script = MockScript()
    script.add(match, json.dumps(response) if not isinstance(response, str) else response)
    return MockBackend(script)


BOUNDS_512 = {"axial": 512, "coronal": 512, "sagittal": 512}


class TestDetermineAction:
    def test_coronal_plus_100(self):
        backend = backend_with(
            'Command: "Coronal plus 100"',
            {"action": "SHOW_MOVE", "moves": {"coronal": {"rel": 100}}},
        )
        state = IvState(positions={"axial": 0, "coronal": 0, "sagittal": 0})
        decision = determine_action_iv("Coronal plus 100", state, backend)
        assert decision.action == "SHOW_MOVE"
        assert decision.moves == {"coronal": {"rel": 100}}

    def test_front_front_front_multiplies_default_step(self):
        backend = backend_with(
            'Command: "Move front, front, front"',
            {"action": "SHOW_MOVE", "moves": {"coronal": {"rel": 30}}},
        )
        state = IvState(positions={"axial": 0, "coronal": 0, "sagittal": 0})
        decision = determine_action_iv("Move front, front, front", state, backend)
        assert decision.moves == {"coronal": {"rel": 30}}

    def test_axial_zoom_in(self):
        backend = backend_with(
            'Command: "Axial zoom in"',
            {"action": "ZOOM_IN_MOVE", "main_view": "axial"},
        )
        state = IvState(positions={"axial": 0, "coronal": 0, "sagittal": 0})
        decision = determine_action_iv("Axial zoom in", state, backend)
        assert decision.action == "ZOOM_IN_MOVE"
        assert decision.main_view == "axial"

    def test_zoom_out_must_not_carry_moves(self):
        backend = backend_with(
            "Command:",
            {"action": "ZOOM_OUT", "moves": {"axial": {"rel": 5}}},
        )
        state = IvState(positions={"axial": 0, "coronal": 0, "sagittal": 0})
        with pytest.raises(StageFailure):
            determine_action_iv("Zoom out", state, backend)

    def test_prompt_carries_direction_lexicon(self):
        from visa_agent.agents.iv import build_iv_prompt

        prompt = build_iv_prompt("Move right", IvState(positions={"axial": 0, "coronal": 0, "sagittal": 0}))
        assert "right = sagittal +" in prompt
        assert "10 units" in prompt
        assert '"front, front, front"' in prompt

    def test_malformed_moves_fail(self):
        state = IvState(positions={"axial": 0, "coronal": 0, "sagittal": 0})
        for moves in ({"oblique": {"rel": 5}}, {"axial": {"rel": "ten"}}, {"axial": {"to": "edge"}}):
            backend = backend_with("Command:", {"action": "SHOW_MOVE", "moves": moves})
            with pytest.raises(StageFailure):
                determine_action_iv("Move", state, backend)


class TestUpdatePositions:
    def test_relative_move(self):
        p = {"axial": 0, "coronal": 100, "sagittal": 0}
        decision = IvDecision("SHOW_MOVE", moves={"coronal": {"rel": 30}})
        assert update_positions(p, decision, BOUNDS_512)["coronal"] == 130

    def test_clamp_at_lower_bound(self):
        p = {"axial": 5, "coronal": 0, "sagittal": 0}
        decision = IvDecision("SHOW_MOVE", moves={"axial": {"rel": -20}})
        assert update_positions(p, decision, BOUNDS_512)["axial"] == 0

    def test_clamp_at_upper_bound(self):
        p = {"axial": 500, "coronal": 0, "sagittal": 0}
        decision = IvDecision("SHOW_MOVE", moves={"axial": {"rel": 100}})
        assert update_positions(p, decision, BOUNDS_512)["axial"] == 511

    def test_named_targets(self):
        p = {"axial": 7, "coronal": 7, "sagittal": 7}
        decision = IvDecision(
            "SHOW_MOVE",
            moves={"axial": {"to": "middle"}, "coronal": {"to": "min"}, "sagittal": {"to": "max"}},
        )
        new = update_positions(p, decision, BOUNDS_512)
        assert new == {"axial": 256, "coronal": 0, "sagittal": 511}

    def test_absolute_target(self):
        p = {"axial": 0, "coronal": 0, "sagittal": 0}
        decision = IvDecision("SHOW_MOVE", moves={"sagittal": {"abs": 300}})
        assert update_positions(p, decision, BOUNDS_512)["sagittal"] == 300

    def test_reset_returns_to_middles(self):
        p = {"axial": 3, "coronal": 400, "sagittal": 77}
        decision = IvDecision("SHOW_MOVE", reset=True)
        assert update_positions(p, decision, BOUNDS_512) == {
            "axial": 256, "coronal": 256, "sagittal": 256,
        }


class TestSliceVolume:
    def test_gradient_axial_slice_is_constant(self):
        vol = Volume.gradient((8, 8, 8))
        image = slice_volume(vol, "axial", 5)
        assert image.shape == (8, 8)
        assert np.all(image == 5)

    def test_gradient_coronal_slice_is_ramp(self):
        vol = Volume.gradient((4, 4, 6))
        image = slice_volume(vol, "coronal", 2)
        # f(x, y, z) = z: every row along the z dimension ramps 0..5.
        assert image.shape == (4, 6)
        assert np.array_equal(image[0], np.arange(6))

    def test_degenerate_volume(self):
        vol = Volume.gradient((1, 1, 1))
        for plane in PLANES:
            assert slice_volume(vol, plane, 0).shape == (1, 1)

    def test_materialized_and_synthetic_agree(self):
        synth = Volume.gradient((6, 5, 4))
        real = Volume.gradient((6, 5, 4), materialize=True)
        for plane in PLANES:
            for index in range(synth.plane_dims()[plane]):
                assert np.array_equal(
                    slice_volume(synth, plane, index), slice_volume(real, plane, index)
                )

    def test_out_of_bounds(self):
        vol = Volume.gradient((4, 4, 4))
        with pytest.raises(OutOfBounds):
            slice_volume(vol, "axial", 4)

    def test_save_load_round_trip(self, tmp_path):
        vol = Volume.gradient((5, 6, 7), materialize=True)
        path = tmp_path / "vol.ctvol"
        vol.save(str(path))
        loaded = Volume.load(str(path))
        assert loaded.dims == (5, 6, 7)
        assert np.array_equal(loaded.voxels, vol.voxels)


class TestApply:
    def setup_method(self):
        self.vol = Volume.gradient((512, 512, 512))
        self.state = IvState(
            positions={"axial": 100, "coronal": 30, "sagittal": 200}, display="small_views"
        )

    def test_show_move_emits_150_keyframes_with_exact_endpoints(self):
        decision = IvDecision("SHOW_MOVE", moves={"coronal": {"rel": 100}})
        new_state, timeline = apply_iv(self.state, decision, self.vol, fps=30)
        assert new_state.positions["coronal"] == 130
        assert new_state.display == "small_views"
        assert len(timeline.keyframes) == 150
        first = timeline.keyframes[0][1]["positions"]
        last = timeline.keyframes[-1][1]["positions"]
        assert first == self.state.positions
        assert last == new_state.positions
        cors = [kf[1]["positions"]["coronal"] for kf in timeline.keyframes]
        assert cors == sorted(cors)

    def test_zoom_in_infers_view_from_single_moved_axis(self):
        decision = IvDecision("ZOOM_IN_MOVE", moves={"sagittal": {"rel": 50}})
        new_state, timeline = apply_iv(self.state, decision, self.vol)
        assert new_state.display == "zoom_view"
        assert new_state.main_view == "sagittal"
        assert timeline.directives[0].kind == "ct_zoom_view"

    def test_explicit_view_wins_over_inference(self):
        decision = IvDecision(
            "ZOOM_IN_MOVE", moves={"sagittal": {"rel": 50}}, main_view="axial"
        )
        new_state, _ = apply_iv(self.state, decision, self.vol)
        assert new_state.main_view == "axial"

    def test_zoom_out_keeps_positions(self):
        zoomed = IvState(
            positions=dict(self.state.positions), display="zoom_view", main_view="coronal"
        )
        new_state, timeline = apply_iv(zoomed, IvDecision("ZOOM_OUT"), self.vol)
        assert new_state.display == "small_views"
        assert new_state.positions == zoomed.positions
        assert timeline.directives[0].kind == "ct_small_views"

    def test_remove_clears_display(self):
        new_state, timeline = apply_iv(self.state, IvDecision("REMOVE"), self.vol)
        assert new_state.display == "none"
        assert timeline.directives[0].kind == "clear_overlay"
        assert timeline.keyframes == []

    def test_zoom_out_after_zoom_in_restores_small_views(self):
        zin, _ = apply_iv(self.state, IvDecision("ZOOM_IN_MOVE"), self.vol)
        assert zin.display == "zoom_view"
        zout, _ = apply_iv(zin, IvDecision("ZOOM_OUT"), self.vol)
        assert zout.display == "small_views"
        assert zout.positions == self.state.positions

    def test_remove_absorbs_until_next_show(self):
        removed, _ = apply_iv(self.state, IvDecision("REMOVE"), self.vol)
        still_removed, _ = apply_iv(removed, IvDecision("ZOOM_OUT"), self.vol)
        # ZOOM_OUT shows the small views again; REMOVE only holds until a
        # display-producing action arrives.
        assert removed.display == "none"
        shown, _ = apply_iv(removed, IvDecision("SHOW_MOVE"), self.vol)
        assert shown.display == "small_views"


class TestFuzzedSequences:
    def test_thousand_random_decisions_stay_in_bounds(self):
        rng = random.Random(20240809)
        vol = Volume.gradient((97, 512, 33))
        bounds = vol.plane_dims()
        state = IvState.default(vol)
        actions = ["SHOW_MOVE", "ZOOM_IN_MOVE", "ZOOM_OUT", "REMOVE"]
        for _ in range(1000):
            action = rng.choice(actions)
            moves = {}
            if action in ("SHOW_MOVE", "ZOOM_IN_MOVE"):
                for plane in PLANES:
                    roll = rng.random()
                    if roll < 0.4:
                        moves[plane] = {"rel": rng.randint(-700, 700)}
                    elif roll < 0.6:
                        moves[plane] = {"abs": rng.randint(-100, 700)}
                    elif roll < 0.7:
                        moves[plane] = {"to": rng.choice(["min", "middle", "max"])}
            decision = IvDecision(action, moves=moves)
            state, _ = apply_iv(state, decision, vol)
            for plane in PLANES:
                assert 0 <= state.positions[plane] < bounds[plane]

    def test_positions_persist_across_state_copies(self):
        vol = Volume.gradient((64, 64, 64))
        state = IvState.default(vol)
        state2, _ = apply_iv(state, IvDecision("SHOW_MOVE", moves={"axial": {"rel": 9}}), vol)
        snapshot = state2.copy()
        state3, _ = apply_iv(state2, IvDecision("SHOW_MOVE", moves={"axial": {"rel": 1}}), vol)
        assert snapshot.positions["axial"] == 41  # 32 + 9
        assert state3.positions["axial"] == 42


class TestInferMainView:
    def test_no_move_keeps_current(self):
        state = IvState(positions={"axial": 0, "coronal": 0, "sagittal": 0}, main_view="coronal")
        assert infer_main_view(IvDecision("ZOOM_IN_MOVE"), state) == "coronal"

    def test_multi_move_keeps_current(self):
        state = IvState(positions={"axial": 0, "coronal": 0, "sagittal": 0}, main_view="axial")
        decision = IvDecision(
            "ZOOM_IN_MOVE", moves={"coronal": {"rel": 1}, "sagittal": {"rel": 1}}
        )
        assert infer_main_view(decision, state) == "axial"
