import numpy as np
import pytest

from mcenet.context import GridSpec, GroupAssignment, build_occupancy, headings

NO_GROUPS = GroupAssignment()


def _brute_force(target_id, target_positions, neighbors_per_step, groups, spec, step_headings):
    """Direct indicator sum over neighbors with explicit bin edges."""
    R, D = spec.num_orientation_bins, spec.num_distance_bins
    angle_edges = np.linspace(-np.pi, np.pi, R + 1)
    ring_edges = np.linspace(0.0, spec.max_radius, D + 1)
    out = np.zeros((len(target_positions), R, D), dtype=np.int64)
    for t, agents in enumerate(neighbors_per_step):
        for j, pos in agents.items():
            if j == target_id or j in groups.of(target_id):
                continue
            dx, dy = pos - target_positions[t]
            dist = np.hypot(dx, dy)
            if dist > spec.max_radius:
                continue
            theta = np.arctan2(dy, dx)
            if spec.reference_frame == "heading":
                theta = np.arctan2(np.sin(theta - step_headings[t]), np.cos(theta - step_headings[t]))
            for r in range(R):
                for d in range(D):
                    in_sector = angle_edges[r] <= theta < angle_edges[r + 1] or (r == R - 1 and theta == np.pi)
                    in_ring = ring_edges[d] <= dist < ring_edges[d + 1] or (d == D - 1 and dist == spec.max_radius)
                    out[t, r, d] += int(in_sector and in_ring)
    return out


# --------------------------------------------------------------------- #
# SINGLE-NEIGHBOR CASES
# --------------------------------------------------------------------- #

def test_single_neighbor_ahead():
    """A neighbor 2 m ahead of a +x heading target fills exactly one cell."""
    grid = build_occupancy(1, np.zeros((1, 2)), [{2: np.array([2.0, 0.0])}], NO_GROUPS, GridSpec(), np.array([0.0]))
    assert grid.counts.sum() == 1
    assert grid.counts[0, 4, 2] == 1
    assert grid.flat().shape == (1, 64)


def test_group_member_never_enters_the_grid():
    groups = GroupAssignment({1: frozenset({2}), 2: frozenset({1})})
    grid = build_occupancy(1, np.zeros((1, 2)), [{2: np.array([2.0, 0.0])}], groups, GridSpec(), np.array([0.0]))
    assert not grid.counts.any()


def test_two_neighbors_in_one_bin():
    neighbors = [{2: np.array([2.1, 0.1]), 3: np.array([2.4, 0.2])}]
    grid = build_occupancy(1, np.zeros((1, 2)), neighbors, NO_GROUPS, GridSpec(), np.array([0.0]))
    assert grid.counts.max() == 2
    assert grid.counts.sum() == 2


def test_neighbor_beyond_radius_is_ignored():
    grid = build_occupancy(1, np.zeros((1, 2)), [{2: np.array([8.01, 0.0])}], NO_GROUPS, GridSpec(), np.array([0.0]))
    assert not grid.counts.any()


def test_ring_boundaries_are_half_open():
    spec = GridSpec()
    assert spec.polar_bin(1.0, 0.0, 0.0)[1] == 1
    assert spec.polar_bin(8.0, 0.0, 0.0)[1] == 7
    assert spec.polar_bin(0.0, 0.0, 0.0)[1] == 0


def test_heading_rotates_the_grid():
    """A neighbor at a fixed bearing from the heading lands in the same cell for any heading."""
    spec = GridSpec()
    ahead = [spec.polar_bin(2 * np.cos(h + 0.3), 2 * np.sin(h + 0.3), h) for h in (0.3, 1.2, -2.0)]
    assert len(set(ahead)) == 1
    global_spec = GridSpec(reference_frame="global")
    assert global_spec.polar_bin(0.0, 2.0, 1.2) == global_spec.polar_bin(0.0, 2.0, -0.4)


def test_neighbor_order_does_not_matter():
    rng = np.random.default_rng(7)
    agents = {j: rng.uniform(-6, 6, size=2) for j in range(2, 12)}
    reversed_agents = dict(reversed(list(agents.items())))
    a = build_occupancy(1, np.zeros((1, 2)), [agents], NO_GROUPS, GridSpec(), np.array([0.5]))
    b = build_occupancy(1, np.zeros((1, 2)), [reversed_agents], NO_GROUPS, GridSpec(), np.array([0.5]))
    np.testing.assert_array_equal(a.counts, b.counts)


def test_step_count_mismatch():
    with pytest.raises(ValueError):
        build_occupancy(1, np.zeros((2, 2)), [{}], NO_GROUPS, GridSpec())


# --------------------------------------------------------------------- #
# HEADINGS
# --------------------------------------------------------------------- #

def test_headings_follow_latest_motion():
    path = np.array([[0, 0], [0, 0], [1, 0], [1, 0], [1, 1]], dtype=float)
    np.testing.assert_allclose(headings(path), [0.0, 0.0, 0.0, 0.0, np.pi / 2])


def test_stationary_path_faces_plus_x():
    assert not headings(np.full((6, 2), 4.0)).any()


# --------------------------------------------------------------------- #
# ORACLE
# --------------------------------------------------------------------- #

@pytest.mark.parametrize("frame", ["heading", "global"])
def test_build_occupancy_matches_brute_force(frame):
    rng = np.random.default_rng(11 if frame == "heading" else 12)
    spec = GridSpec(reference_frame=frame)
    for _ in range(250):
        steps = int(rng.integers(1, 9))
        target = rng.uniform(-3, 3, size=(steps, 2))
        num = int(rng.integers(0, 12))
        neighbors = [
            {j: target[t] + rng.uniform(-10, 10, size=2) for j in range(2, 2 + num) if rng.uniform() > 0.2}
            for t in range(steps)
        ]
        friends = frozenset(int(j) for j in rng.choice(np.arange(2, 2 + num), size=min(num, 2), replace=False)) if num else frozenset()
        groups = GroupAssignment({1: friends, **{j: frozenset({1}) for j in friends}} if friends else {})
        step_headings = headings(target)

        got = build_occupancy(1, target, neighbors, groups, spec, step_headings)
        expected = _brute_force(1, target, neighbors, groups, spec, step_headings)
        np.testing.assert_array_equal(got.counts, expected)

        for t, agents in enumerate(neighbors):
            in_range = sum(
                1 for j, p in agents.items() if j not in friends and np.hypot(*(p - target[t])) <= spec.max_radius
            )
            assert got.counts[t].sum() == in_range
