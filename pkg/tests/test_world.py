"""Simulator, scene classifier, and world-model construction."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundling.errors import InvalidSpec, UnknownClassifier
from groundling.fixtures import default_cooccurrence, site1_spec, site2_spec
from groundling.symbols import PerceptionSymbol
from groundling.world import (
    CooccurrenceModel,
    LatentObject,
    WorldSpec,
    build_world_model,
    empty_world,
    load_observations,
    load_world,
    planar_distance,
    run_classifier,
    save_observations,
    save_world,
    simulate,
)


def full_classifiers(registry):
    return frozenset(registry.classifiers())


# --- simulation -----------------------------------------------------------

def test_simulation_is_deterministic(registry):
    spec = site1_spec()
    assert simulate(spec, registry) == simulate(spec, registry)


def test_sensed_objects_are_within_range(registry):
    spec = site1_spec()
    by_id = {o.id: o for o in spec.objects}
    for obs in simulate(spec, registry):
        for raw in obs.sensed:
            if raw.noisy:
                continue
            latent = by_id[raw.latent_id]
            assert planar_distance(obs.robot_pose, latent.pose) <= spec.sensing_range + 1e-9


def test_scene_label_maximizes_stored_scores(site_logs):
    for observations in site_logs.values():
        for obs in observations:
            scores = dict(obs.scene_scores)
            top = max(scores.values())
            winners = sorted(l for l, v in scores.items() if v == top)
            assert obs.scene_label == winners[0]


def test_site_fixture_zone_runs(site_logs):
    def runs(observations):
        out = []
        for obs in observations:
            if not out or out[-1][0] != obs.scene_label:
                out.append([obs.scene_label, 0])
            out[-1][1] += 1
        return [tuple(r) for r in out]

    assert runs(site_logs["site-1"]) == [
        ("hallway", 10), ("kitchen", 30), ("office", 10), ("lounge", 10)]
    assert runs(site_logs["site-2"]) == [
        ("parking_lot", 12), ("office", 30), ("laboratory", 18)]


# --- co-occurrence model ---------------------------------------------------

def test_cooccurrence_rows_are_distributions():
    model = default_cooccurrence()
    for label, row in model.table:
        total = sum(v for _, v in row)
        assert total == pytest.approx(1.0, abs=1e-12)
        assert all(v >= 0 for _, v in row)


def test_cooccurrence_rejects_unnormalizable_rows():
    with pytest.raises(InvalidSpec):
        CooccurrenceModel.from_dict(
            {"hallway": {"ball": -0.5, "cup": 1.5}}, characteristic=["ball"])
    with pytest.raises(InvalidSpec):
        CooccurrenceModel.from_dict(
            {"hallway": {"ball": 0.0}}, characteristic=["ball"])


def test_smoothed_log_prob_matches_formula():
    model = default_cooccurrence()
    k = len(model.characteristic)
    for label, row in model.table:
        for cls, p in row:
            expected = np.log((p + 1.0) / (1.0 + k))
            assert model.smoothed_log_prob(cls, label) == pytest.approx(expected)


def test_uninformative_frames_inherit_previous_label(site_logs):
    observations = site_logs["site-1"]
    characteristic = default_cooccurrence().characteristic
    for prev, obs in zip(observations, observations[1:]):
        informative = [r for r in obs.sensed
                       if r.apparent_class in characteristic]
        if not informative:
            assert obs.scene_label == prev.scene_label
            assert obs.scene_scores == prev.scene_scores


# --- classifiers and world building ----------------------------------------

def test_run_classifier_on_empty_input(registry):
    symbol = PerceptionSymbol("object_detector", "ball")
    assert run_classifier(symbol, (), registry) == ((), 0.0)


def test_run_classifier_rejects_unknown(registry, site_logs):
    with pytest.raises(UnknownClassifier):
        run_classifier(PerceptionSymbol("object_detector", "dragon"),
                       site_logs["site-1"], registry)


def test_build_finds_all_fixture_objects(registry, site_logs):
    world1 = build_world_model(site_logs["site-1"], full_classifiers(registry),
                               registry)
    world2 = build_world_model(site_logs["site-2"], full_classifiers(registry),
                               registry)
    assert len(world1.objects) == 37
    assert len(world2.objects) == 36


def test_object_ids_unique_and_provenance_nonempty(registry, site_logs):
    world = build_world_model(site_logs["site-1"], full_classifiers(registry),
                              registry)
    ids = [o.id for o in world.objects]
    assert len(set(ids)) == len(ids)
    assert all(o.provenance for o in world.objects)


def test_cost_ledger_additivity(registry, site_logs):
    world = build_world_model(site_logs["site-2"], full_classifiers(registry),
                              registry)
    assert world.total_cost == pytest.approx(
        sum(cost for _, cost in world.cost_ledger))


def test_one_object_three_waypoints_dedups_to_one(registry):
    spec = WorldSpec(
        name="micro", seed=5,
        objects=(LatentObject("ball-0", "ball", "red", (3.0, 0.5, 0.0),
                              "hallway"),),
        trajectory=((0.5, 0.0, 0.0), (1.5, 0.0, 0.0), (2.5, 0.0, 0.0)),
        cooccurrence=default_cooccurrence(),
    )
    observations = simulate(spec, registry)
    assert sum(len(o.sensed) for o in observations) == 3
    world = build_world_model(observations, full_classifiers(registry),
                              registry)
    assert len(world.objects) == 1
    assert len(world.objects[0].provenance) == 3


def test_dedup_idempotence(registry, site_logs):
    world = build_world_model(site_logs["site-1"], full_classifiers(registry),
                              registry)
    kept_ts = {t for o in world.objects for t in o.provenance}
    replay = [o for o in site_logs["site-1"] if o.t in kept_ts]
    rebuilt = build_world_model(replay, full_classifiers(registry), registry)
    assert rebuilt.object_ids() == world.object_ids()


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_build_monotone_under_subsets(registry, site_logs, data):
    observations = site_logs["site-1"]
    full = build_world_model(observations, full_classifiers(registry),
                             registry)
    keep_obs = data.draw(st.lists(st.booleans(), min_size=len(observations),
                                  max_size=len(observations)))
    subset_obs = tuple(o for o, keep in zip(observations, keep_obs) if keep)
    all_classifiers = sorted(full_classifiers(registry), key=lambda s: s.canon)
    keep_cls = data.draw(st.lists(st.booleans(), min_size=len(all_classifiers),
                                  max_size=len(all_classifiers)))
    subset_cls = frozenset(
        c for c, keep in zip(all_classifiers, keep_cls) if keep)
    small = build_world_model(subset_obs, subset_cls, registry)
    assert small.object_ids() <= full.object_ids()
    assert small.total_cost <= full.total_cost + 1e-9


def test_geometry_needs_both_bbox_and_pose(registry, site_logs):
    partial = frozenset(
        s for s in full_classifiers(registry) if s.kind != "pose_estimator")
    world = build_world_model(site_logs["site-1"], partial, registry)
    assert world.objects == ()


def test_empty_world_is_empty():
    world = empty_world()
    assert world.objects == () and world.total_cost == 0.0


# --- serialization ----------------------------------------------------------

def test_world_spec_round_trip(tmp_path, registry):
    spec = site2_spec()
    path = tmp_path / "site.yaml"
    save_world(spec, path)
    loaded = load_world(path)
    assert loaded == spec
    assert simulate(loaded, registry) == simulate(spec, registry)


def test_observation_log_round_trip(tmp_path, site_logs):
    path = tmp_path / "obs.jsonl"
    save_observations(site_logs["site-2"], path)
    assert load_observations(path) == site_logs["site-2"]


def test_unsupported_schema_rejected(tmp_path, site_logs):
    from groundling.errors import UnknownSchemaVersion
    path = tmp_path / "obs.jsonl"
    save_observations(site_logs["site-1"], path)
    lines = path.read_text().splitlines()
    lines[0] = lines[0].replace('"schema": 1', '"schema": 9')
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(UnknownSchemaVersion):
        load_observations(path)
