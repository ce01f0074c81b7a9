from __future__ import annotations
from typing import NamedTuple, Tuple

import numpy as np
from numpy.typing import NDArray

# A vertex of a partite complex: (type, coset id).
Vertex = Tuple[int, int]
# A face: its vertices, sorted.
Face = Tuple[Vertex, ...]
# A batch of n matrices over R = F_p[t]/<t^s>: shape (n, d, d, s).
MatrixBatch = NDArray[np.int64]


class Verdict(NamedTuple):
    """Outcome of an exact check: truthy iff it passed.

    `detail` names the first violation when the check failed.
    """

    ok: bool
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok
