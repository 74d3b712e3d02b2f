import numpy as np
import pytest

from tpsdvqa.video_io import LumaFrame


@pytest.fixture
def rng():
    return np.random.default_rng(20240815)


def frames_from_array(stack: np.ndarray) -> list[LumaFrame]:
    """Turn an (count, height, width) array into a frame list."""
    return [LumaFrame(stack[i]) for i in range(stack.shape[0])]


def random_frames(rng, width: int, height: int, count: int) -> list[LumaFrame]:
    """Uniform random uint8 frames."""
    stack = rng.integers(0, 256, size=(count, height, width), dtype=np.uint8)
    return frames_from_array(stack)
