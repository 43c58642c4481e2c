import numpy as np
import pytest

from syncdet import frames
from syncdet.markers import MarkerScheme


@pytest.fixture(scope="session")
def c1():
    return frames.load_code("c1")


@pytest.fixture(scope="session")
def c2():
    return frames.load_code("c2")


@pytest.fixture(scope="session")
def hamming():
    return frames.load_code("hamming74")


@pytest.fixture(scope="session")
def hamming_codewords(hamming):
    msgs = np.array([[(i >> j) & 1 for j in range(4)] for i in range(16)],
                    dtype=np.uint8)
    return hamming.encoder.encode(msgs)
