import numpy as np
import pytest

from pathagg import (Alphabet, HmmParams, HmmTopology, RegressionParams,
                     VisitCaps)


@pytest.fixture(scope="session")
def toy_a():
    """Two-state fixture: background B, counted M (cap 2).

    B starts with probability 1; B->B 0.6, B->M 0.4, M->B 1.0; emissions
    B: (a 0.8, b 0.2), M: (a 0.1, b 0.9); response beta=(5), no intercept,
    sigma=1.
    """
    alphabet = Alphabet(("a", "b"))
    topo = HmmTopology(
        alphabet=alphabet,
        state_count=2,
        start_distribution=np.array([1.0, 0.0]),
        allowed_transitions=frozenset({(0, 0), (0, 1), (1, 0)}),
        counted_states=(1,),
        state_labels=("background", "motif:0:0"),
    )
    params = HmmParams(
        topo,
        np.array([[0.6, 0.4], [1.0, 0.0]]),
        np.array([[0.8, 0.2], [0.1, 0.9]]),
    )
    caps = VisitCaps((2,))
    reg = RegressionParams(np.array([5.0]), None, 1.0)
    return params, caps, reg
