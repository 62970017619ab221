import numpy as np
import pytest

from btob.map_core import ProjectiveDirection


def sample_directions(seed: int, count: int) -> list[ProjectiveDirection]:
    """Random canonical directions strictly inside the quadrant x > 0, z < 0."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a, b, c = rng.standard_normal(3)
        x, y, z = abs(a), b, -abs(c)
        if x < 1e-6 or -z < 1e-6:
            continue
        out.append(ProjectiveDirection.from_vector(x, y, z))
    return out


@pytest.fixture
def directions():
    return sample_directions
