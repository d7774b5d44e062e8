"""Shared builders for trajectory test fixtures."""

import math

import numpy as np
import pytest

from trajeval import PenState, TrajPoint, Trajectory


def traj_from_strokes(strokes, side=64, eos=True):
    """Build a trajectory from [[(x, y), ...], ...] coordinate lists."""
    points = []
    for stroke in strokes:
        for j, (x, y) in enumerate(stroke):
            state = PenState.UP if j == len(stroke) - 1 else PenState.DOWN
            points.append(TrajPoint(float(x), float(y), state))
    if eos:
        last = points[-1]
        points.append(TrajPoint(last.x, last.y, PenState.EOS))
    return Trajectory(tuple(points), canvas_side=side)


def random_traj(rng, n_strokes=(1, 3), n_points=(2, 6), side=64, eos=True):
    """Random multi-stroke trajectory with coordinates strictly inside canvas."""
    strokes = []
    for _ in range(int(rng.integers(n_strokes[0], n_strokes[1] + 1))):
        m = int(rng.integers(n_points[0], n_points[1] + 1))
        xs = rng.uniform(0.0, side - 1.0, size=m)
        ys = rng.uniform(0.0, side - 1.0, size=m)
        strokes.append(list(zip(xs.tolist(), ys.tolist())))
    return traj_from_strokes(strokes, side=side, eos=eos)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


def euclid(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])
