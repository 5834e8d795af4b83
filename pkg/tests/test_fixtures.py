"""Benchmark fixture guarantees the efficiency comparison relies on."""

from __future__ import annotations

import pytest

from groundling.errors import InvalidSpec
from groundling.fixtures import (
    benchmark_manifest,
    reference_world,
    site1_spec,
    site2_spec,
    site_spec,
)


def test_site_specs_have_advertised_sizes():
    assert len(site1_spec().objects) == 37
    assert len(site2_spec().objects) == 36


def test_site_objects_sit_in_their_declared_zone(site_logs, registry):
    from groundling.world import build_world_model
    for site, spec in (("site-1", site1_spec()), ("site-2", site2_spec())):
        world = build_world_model(site_logs[site],
                                  frozenset(registry.classifiers()), registry)
        latent_regions = {(o.cls, round(o.pose[0], 1), round(o.pose[1], 1)):
                          o.region for o in spec.objects}
        for detected in world.objects:
            key = (detected.cls, round(detected.pose[0], 1),
                   round(detected.pose[1], 1))
            assert latent_regions[key] == detected.region


def test_site_spec_rejects_unknown_name():
    with pytest.raises(InvalidSpec):
        site_spec("site-9")


def test_reference_world_covers_every_combination(registry, reference):
    combos = {}
    for obj in reference.objects:
        combos[(obj.cls, obj.color, obj.region)] = combos.get(
            (obj.cls, obj.color, obj.region), 0) + 1
    assert set(combos.values()) == {2}
    expected = (len(registry.object_classes) * len(registry.colors)
                * len(registry.scene_labels))
    assert len(combos) == expected


def test_manifest_targets_are_groundable(bench_report):
    by_case = {}
    for r in bench_report.results:
        by_case.setdefault((r.instruction, r.site), set()).add(r.grounding)
    assert len(by_case) == 6
    for groundings in by_case.values():
        assert len(groundings) == 1
        assert next(iter(groundings)).startswith("action[navigate_to:")


def test_manifest_covers_distinct_targets(bench_report):
    targets = {r.grounding for r in bench_report.results}
    assert len(targets) == 6
