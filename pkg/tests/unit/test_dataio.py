import numpy as np
import pytest
import yaml

from mcenet.dataio import (
    AgentTrack,
    AgentType,
    ResampleError,
    TrajectoryFormat,
    TrajectoryParseError,
    chronological_split,
    encode_agent_type,
    load_dataset,
    load_from_manifest,
    make_windows,
    offsets_to_positions,
    positions_to_offsets,
    resample,
    serialize_dataset,
)


def _write(tmp_path, text: str, name: str = "scene.txt"):
    path = tmp_path / name
    path.write_text(text)
    return path


# --------------------------------------------------------------------- #
# PARSING
# --------------------------------------------------------------------- #

def test_load_dataset_two_agents_ten_frames(tmp_path):
    """Two agents over ten frames parse into two tracks of length ten."""
    rows = ["# frame agent x y type"]
    for f in range(10):
        rows.append(f"{f} 1 {f * 0.5} 0.0 pedestrian")
        rows.append(f"{f},2,{f * 1.0},3.0,Vehicle")
    ds = load_dataset(_write(tmp_path, "\n".join(rows)), TrajectoryFormat(name="two"))

    assert ds.name == "two"
    assert [len(t) for t in ds.tracks] == [10, 10]
    assert ds.track(2).agent_type is AgentType.VEHICLE
    np.testing.assert_allclose(ds.track(1).positions[3], [1.5, 0.0])


def test_unknown_type_names_the_row(tmp_path):
    """A 'tram' token is rejected with the offending line number."""
    text = "0 1 0 0 pedestrian\n1 1 1 0 pedestrian\n\n2 1 2 0 tram\n"
    with pytest.raises(TrajectoryParseError) as info:
        load_dataset(_write(tmp_path, text))
    assert info.value.line == 4
    assert "tram" in str(info.value)


def test_duplicate_frame_agent_rejected(tmp_path):
    text = "0 1 0 0 cyclist\n0 1 0.5 0 cyclist\n"
    with pytest.raises(TrajectoryParseError) as info:
        load_dataset(_write(tmp_path, text))
    assert info.value.line == 2


def test_non_numeric_coordinate_rejected(tmp_path):
    with pytest.raises(TrajectoryParseError, match="not a number"):
        load_dataset(_write(tmp_path, "0 1 abc 0 pedestrian\n"))


def test_type_aliases_and_case():
    assert AgentType.parse("BIKER") is AgentType.CYCLIST
    assert AgentType.parse(" car ") is AgentType.VEHICLE
    with pytest.raises(ValueError):
        AgentType.parse("tram")


def test_four_column_file_uses_default_type(tmp_path):
    """Pedestrian-only benchmark files load when a default type is configured."""
    path = _write(tmp_path, "0 7 1.0 2.0\n10 7 1.5 2.0\n")
    ds = load_dataset(path, TrajectoryFormat(default_type=AgentType.PEDESTRIAN, frame_rate=2.5))
    assert ds.track(7).agent_type is AgentType.PEDESTRIAN
    assert ds.frame_rate == 2.5

    with pytest.raises(TrajectoryParseError):
        load_dataset(path)


def test_serialize_round_trip(tmp_path, small_dataset):
    """Loading a serialized dataset reproduces every record."""
    path = tmp_path / "out.txt"
    serialize_dataset(small_dataset, path)
    reloaded = load_dataset(path, TrajectoryFormat(name=small_dataset.name))

    original = {(f, t.agent_id, t.agent_type) + tuple(p) for t in small_dataset.tracks for f, p in zip(t.frames, t.positions)}
    restored = {(f, t.agent_id, t.agent_type) + tuple(p) for t in reloaded.tracks for f, p in zip(t.frames, t.positions)}
    assert original == restored


def test_manifest_resolves_relative_paths_and_resamples(tmp_path):
    rows = [f"{f} 1 {f * 0.1} 0 pedestrian" for f in range(20)]
    _write(tmp_path, "\n".join(rows), "traj.txt")
    manifest = tmp_path / "scene.yaml"
    manifest.write_text(
        yaml.safe_dump(
            {
                "name": "hbs",
                "trajectories": "traj.txt",
                "frame_rate": 10,
                "meters_per_pixel": 0.1,
                "target_fps": 2,
                "raster_shape": [50, 60],
                "rasters": {"aerial": "aerial.png"},
            }
        )
    )
    ds = load_from_manifest(manifest)
    assert ds.name == "hbs"
    assert ds.frame_rate == 2.0
    assert len(ds.track(1)) == 4
    assert ds.raster_shape == (50, 60)
    assert ds.rasters["aerial"] == [tmp_path / "aerial.png"]


# --------------------------------------------------------------------- #
# RESAMPLING AND SPLITTING
# --------------------------------------------------------------------- #

def test_resample_10_to_2_fps(straight_track, dataset_of):
    ds = dataset_of([straight_track(1, 20)], frame_rate=10.0)
    out = resample(ds, 2.0)
    assert out.frame_rate == 2.0
    assert out.track(1).frames.tolist() == [0, 5, 10, 15]


def test_resample_identity(straight_track, dataset_of):
    ds = dataset_of([straight_track(1, 20)], frame_rate=2.0)
    assert resample(ds, 2.0) is ds


def test_resample_non_integer_ratio(straight_track, dataset_of):
    ds = dataset_of([straight_track(1, 20)], frame_rate=25.0)
    with pytest.raises(ResampleError):
        resample(ds, 2.0)


def test_split_boundary_and_partition(straight_track, dataset_of):
    """Frames [0, 100) with fraction 0.3 split at frame 30; tracks are cut at the boundary."""
    ds = dataset_of(
        [
            straight_track(1, 100),
            straight_track(2, 21, start_frame=0),
            straight_track(3, 16, start_frame=25),
        ]
    )
    split = chronological_split(ds, 0.3)
    assert split.boundary_frame == 30
    assert max(split.test.frames) == 29
    assert min(split.train.frames) == 30

    assert 2 not in {t.agent_id for t in split.train.tracks}
    assert split.test.track(3).frames.tolist() == list(range(25, 30))
    assert split.train.track(3).frames.tolist() == list(range(30, 41))

    test_frames = {(t.agent_id, int(f)) for t in split.test.tracks for f in t.frames}
    train_frames = {(t.agent_id, int(f)) for t in split.train.tracks for f in t.frames}
    every = {(t.agent_id, int(f)) for t in ds.tracks for f in t.frames}
    assert test_frames.isdisjoint(train_frames)
    assert test_frames | train_frames == every


def test_windows_never_straddle_the_boundary(straight_track, dataset_of):
    whole = dataset_of([straight_track(3, 16, start_frame=25)])
    split = chronological_split(dataset_of([straight_track(0, 100), straight_track(3, 16, start_frame=25)]), 0.3)
    test_windows = [w for w in make_windows(split.test, T=2, T_prime=1) if w.agent_id == 3]
    train_windows = [w for w in make_windows(split.train, T=2, T_prime=1) if w.agent_id == 3]
    assert len(test_windows) == 3
    assert len(train_windows) == 9
    assert all(w.fut_frames[-1] < 30 for w in test_windows)
    assert all(w.obs_frames[0] >= 30 for w in train_windows)
    assert len(make_windows(whole, T=2, T_prime=1)) == 14


def test_split_rejects_bad_fraction(small_dataset):
    with pytest.raises(ValueError):
        chronological_split(small_dataset, 1.0)


# --------------------------------------------------------------------- #
# WINDOWS
# --------------------------------------------------------------------- #

@pytest.mark.parametrize("length, expected", [(16, 1), (15, 0), (17, 2), (30, 15)])
def test_window_counts(straight_track, dataset_of, length, expected):
    ds = dataset_of([straight_track(1, length)])
    assert len(make_windows(ds, T=8, T_prime=8, stride=1)) == expected


@pytest.mark.parametrize("length, stride", [(16, 1), (20, 3), (31, 2), (40, 5)])
def test_window_count_formula(straight_track, dataset_of, length, stride):
    ds = dataset_of([straight_track(1, length)])
    assert len(make_windows(ds, 8, 8, stride)) == max(0, (length - 16) // stride + 1)


def test_window_contents(straight_track, dataset_of):
    ds = dataset_of([straight_track(1, 16, velocity=(0.5, 0.0)), straight_track(2, 16, origin=(0, 3))])
    w = next(s for s in make_windows(ds) if s.agent_id == 1)
    assert w.obs_len == 8 and w.pred_len == 8
    assert w.obs_offsets.shape == (7, 2)
    assert w.fut_offsets.shape == (8, 2)
    np.testing.assert_allclose(w.fut_offsets[0], [0.5, 0.0])
    np.testing.assert_allclose(w.anchor, [3.5, 0.0])
    assert w.key == "scene_7_1"
    assert all(ids == frozenset({2}) for ids in w.neighbor_ids_per_step)


def test_window_skips_frame_gaps(dataset_of):
    frames = list(range(10)) + list(range(12, 22))
    track = AgentTrack(agent_id=1, agent_type="pedestrian", frames=frames, positions=np.zeros((20, 2)))
    windows = make_windows(dataset_of([track]), T=3, T_prime=2)
    assert len(windows) == 12
    for w in windows:
        assert np.all(np.diff(np.concatenate([w.obs_frames, w.fut_frames])) == 1)


# --------------------------------------------------------------------- #
# OFFSETS AND ONE-HOT
# --------------------------------------------------------------------- #

def test_positions_to_offsets_example():
    np.testing.assert_array_equal(positions_to_offsets([(0, 0), (1, 1), (2, 3)]), [(1, 1), (1, 2)])


def test_constant_positions_give_zero_offsets():
    assert not positions_to_offsets(np.full((5, 2), 3.0)).any()


def test_offsets_need_two_positions():
    with pytest.raises(ValueError):
        positions_to_offsets([(0.0, 0.0)])


def test_offsets_round_trip_random_walks():
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = np.cumsum(rng.normal(size=(int(rng.integers(2, 40)), 2)), axis=0)
        restored = np.vstack([p[:1], offsets_to_positions(p[0], positions_to_offsets(p))])
        np.testing.assert_allclose(restored, p, atol=1e-9, rtol=0)


def test_encode_agent_type():
    np.testing.assert_array_equal(encode_agent_type("pedestrian"), [1, 0, 0])
    np.testing.assert_array_equal(encode_agent_type(AgentType.CYCLIST), [0, 1, 0])
    np.testing.assert_array_equal(encode_agent_type("vehicle"), [0, 0, 1])
    for t in AgentType:
        assert encode_agent_type(t).sum() == 1
    with pytest.raises(ValueError):
        encode_agent_type("tram")
    with pytest.raises(ValueError):
        encode_agent_type(3)
