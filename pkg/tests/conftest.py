import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wmdecomp.corpus import DocumentVector
from wmdecomp.embeddings import EmbeddingStore

R2 = 1 / math.sqrt(2)
# 1 - 1/sqrt(2), cosine distance between (1, 0) and (1, 1)/sqrt(2)
C45 = 1 - R2


@pytest.fixture
def uvw():
    """u=(1,0), v=(0,1), w=(1,1)/sqrt(2) under cosine; indices 0, 1, 2."""
    return EmbeddingStore(["u", "v", "w"], [[1.0, 0.0], [0.0, 1.0], [R2, R2]], "cosine")


def dv(entries, doc_id="d"):
    return DocumentVector.from_dict(doc_id, entries)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
