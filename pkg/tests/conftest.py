import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cslscert.automaton import Automaton, full_shift, golden_mean  # noqa: E402
from cslscert.system import SystemSpec  # noqa: E402


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def corpus_automata():
    """Strongly connected automata used across the suite."""
    return {
        "single_loop": full_shift(1),
        "full_shift_2": full_shift(2),
        "full_shift_3": full_shift(3),
        "golden_mean": golden_mean(),
        # three-cycle 0 -1-> 1 -2-> 2 -1-> 0 with a chord 0 -2-> 2
        "cycle_chord": Automaton(3, ((0, 1, 1), (1, 2, 2), (2, 0, 1), (0, 2, 2)), 2),
        # parallel edges with distinct labels between the same two nodes
        "two_node_multi": Automaton(2, ((0, 1, 1), (0, 1, 2), (1, 0, 1), (1, 1, 2)), 2),
        # period-2 graph, not primitive
        "alternating": Automaton(2, ((0, 1, 1), (1, 0, 2)), 2),
    }


@pytest.fixture(params=sorted(corpus_automata()))
def corpus_automaton(request):
    return corpus_automata()[request.param]


def random_stable_system(rng, automaton, n=2, target=0.9, cycle_len=6):
    """Random matrices scaled so the best cycle rate equals ``target``."""
    from cslscert.baseline import cjsr_lower

    mats = rng.standard_normal((automaton.alphabet_size, n, n))
    system = SystemSpec(mats, automaton)
    lower, _ = cjsr_lower(system, cycle_len)
    return system.scaled(target / lower)


@pytest.fixture
def half_identity():
    return SystemSpec(np.array([0.5 * np.eye(2)]), full_shift(1))
