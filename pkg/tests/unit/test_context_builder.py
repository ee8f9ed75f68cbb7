import numpy as np
import pytest

from mcenet.context import (
    VARIANTS,
    ContextBuilder,
    RasterKind,
    SceneConfig,
    UnknownVariantError,
    build_heat_map_raster,
    parse_variant,
)
from mcenet.dataio import AgentTrack, AgentType, make_windows


# --------------------------------------------------------------------- #
# VARIANT TAGS
# --------------------------------------------------------------------- #

@pytest.mark.parametrize(
    "tag, expected",
    [
        ("baseline", "baseline"),
        ("MCE", "baseline"),
        ("+gp", "gp"),
        ("MCE+hm+gp", "hm+gp"),
        ("gp+hm", "hm+gp"),
        ("+AP+GP", "ap+gp"),
        ("sm+gp", "sm+gp"),
        ("hm", "hm"),
    ],
)
def test_parse_variant(tag, expected):
    assert parse_variant(tag).tag == expected


@pytest.mark.parametrize("tag", ["ap", "hm+ap+gp", "gp+xyz", "sm"])
def test_unknown_variants(tag):
    with pytest.raises(UnknownVariantError):
        parse_variant(tag)


def test_baseline_disables_every_context():
    baseline = VARIANTS["baseline"]
    assert not baseline.use_grouping
    assert baseline.scene_kind is None
    assert len(VARIANTS) == 6


# --------------------------------------------------------------------- #
# BUILDER
# --------------------------------------------------------------------- #

@pytest.fixture()
def convoy(straight_track, dataset_of):
    """A and B walk 1 m apart; C walks 4 m from A, too far to be grouped."""
    return dataset_of(
        [
            straight_track(1, 16, origin=(10.0, 10.0), velocity=(0.6, 0.0)),
            straight_track(2, 16, origin=(10.0, 11.0), velocity=(0.6, 0.0)),
            straight_track(3, 16, origin=(10.0, 14.0), velocity=(0.6, 0.0), agent_type=AgentType.VEHICLE),
        ]
    )


def test_baseline_builds_nothing(convoy):
    sample = make_windows(convoy)[0]
    context = ContextBuilder(convoy, parse_variant("baseline")).build(sample)
    assert context.obs_occupancy is None and context.obs_scene is None


def test_group_members_are_excluded(convoy):
    builder = ContextBuilder(convoy, parse_variant("gp"))
    sample = next(s for s in make_windows(convoy) if s.agent_id == 1)
    context = builder.build(sample)

    assert builder.groups_for(sample).of(1) == {2}
    assert context.obs_occupancy.counts.shape == (8, 8, 8)
    assert context.fut_occupancy.counts.shape == (8, 8, 8)
    assert np.all(context.obs_occupancy.counts.sum(axis=(1, 2)) == 1)
    assert np.all(context.fut_occupancy.counts.sum(axis=(1, 2)) == 1)


def test_static_scene_is_shared(convoy):
    raster = build_heat_map_raster(convoy.tracks, (60, 60), convoy.meters_per_pixel)
    builder = ContextBuilder(convoy, parse_variant("hm+gp"), scene=SceneConfig(input_size=16), raster=raster)
    first, second = builder.build_all(make_windows(convoy))[:2]
    assert first.obs_scene.shape == (1, 16, 16, 3)
    assert first.obs_scene is first.fut_scene
    assert first.obs_scene is second.obs_scene


def test_per_step_crops(convoy):
    raster = build_heat_map_raster(convoy.tracks, (60, 60), convoy.meters_per_pixel)
    scene = SceneConfig(mode="per_step_crop", input_size=8, crop_size_m=4.0)
    context = ContextBuilder(convoy, parse_variant("hm"), scene=scene, raster=raster).build(make_windows(convoy)[0])
    assert context.obs_scene.shape == (8, 8, 8, 3)
    assert context.fut_scene.shape == (8, 8, 8, 3)


def test_scene_variant_needs_matching_raster(convoy):
    with pytest.raises(ValueError):
        ContextBuilder(convoy, parse_variant("hm+gp"))
    heat = build_heat_map_raster(convoy.tracks, (60, 60), convoy.meters_per_pixel)
    assert heat.kind is RasterKind.HEAT_MAP
    with pytest.raises(ValueError):
        ContextBuilder(convoy, parse_variant("ap+gp"), raster=heat)


def test_moving_group_members_leaves_the_grid_unchanged(straight_track, dataset_of):
    """B stays within grouping distance of A; its exact position never reaches A's grid."""
    c = straight_track(3, 16, origin=(10.0, 14.0), velocity=(0.6, 0.0))
    near = dataset_of([straight_track(1, 16, origin=(10.0, 10.0), velocity=(0.6, 0.0)),
                       straight_track(2, 16, origin=(10.0, 11.0), velocity=(0.6, 0.0)), c])
    shifted = dataset_of([straight_track(1, 16, origin=(10.0, 10.0), velocity=(0.6, 0.0)),
                          straight_track(2, 16, origin=(9.5, 9.0), velocity=(0.6, 0.0)), c])

    grids = []
    for ds in (near, shifted):
        sample = next(s for s in make_windows(ds) if s.agent_id == 1)
        context = ContextBuilder(ds, parse_variant("gp")).build(sample)
        grids.append((context.obs_occupancy.counts, context.fut_occupancy.counts))
    np.testing.assert_array_equal(grids[0][0], grids[1][0])
    np.testing.assert_array_equal(grids[0][1], grids[1][1])


@pytest.mark.parametrize("future_velocity", [(0.6, 0.0), (0.0, 0.6)])
def test_past_grid_ignores_where_a_standing_agent_goes(future_velocity, dataset_of, straight_track):
    """An agent standing still while observed faces +x, whichever way it leaves afterwards."""
    frames = np.arange(16)
    moved = np.clip(frames - 7, 0, None)[:, None] * np.asarray(future_velocity)
    still_then_leaves = AgentTrack(agent_id=1, agent_type=AgentType.PEDESTRIAN, frames=frames, positions=moved)
    bystander = straight_track(2, 16, origin=(3.0, 0.5), velocity=(0.0, 0.0))
    reference = dataset_of([
        AgentTrack(agent_id=1, agent_type=AgentType.PEDESTRIAN, frames=frames, positions=np.zeros((16, 2))),
        bystander,
    ])

    contexts = []
    for ds in (dataset_of([still_then_leaves, bystander]), reference):
        sample = next(s for s in make_windows(ds) if s.agent_id == 1 and s.obs_frames[0] == 0)
        contexts.append(ContextBuilder(ds, parse_variant("gp")).build(sample))

    np.testing.assert_array_equal(contexts[0].obs_occupancy.counts, contexts[1].obs_occupancy.counts)
    assert contexts[0].obs_occupancy.counts.sum() == 8
