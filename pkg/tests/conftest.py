import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import leidenmt as lm

settings.register_profile(
    "jit",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("jit")


# Zachary's karate club, the classic 34-vertex / 78-edge benchmark graph.
KARATE_EDGES = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8),
    (0, 10), (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31),
    (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30),
    (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32),
    (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33),
    (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32),
    (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27),
    (24, 31), (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32),
    (29, 33), (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
]

# Two unit-weight triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
BARBELL_EDGES = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]


def graph_from_edges(n, edges, weights=None):
    src = [u for u, _ in edges]
    dst = [v for _, v in edges]
    return lm.csr_from_undirected(n, src, dst, weights)


@pytest.fixture(scope="session")
def karate():
    return graph_from_edges(34, KARATE_EDGES)


@pytest.fixture(scope="session")
def barbell():
    return graph_from_edges(6, BARBELL_EDGES)


@pytest.fixture(scope="session")
def triangle():
    return graph_from_edges(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture(scope="session")
def path3():
    return graph_from_edges(3, [(0, 1), (1, 2)])


def write_edge_list(path, g):
    src = np.repeat(np.arange(g.num_vertices), np.diff(g.offsets))
    np.savetxt(path, np.column_stack([src, g.edges, g.weights]),
               fmt="%d %d %.17g")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels(karate):
    """Compile (or load from cache) every kernel before timed tests run."""
    for threads in (1, 2):
        cfg = lm.LeidenConfig(threads=threads,
                              refine_strategy=lm.RefineStrategy.RANDOM)
        result = lm.leiden(karate, cfg)
        lm.audit(karate, result.membership, threads=threads)
        lm.leiden(karate, lm.LeidenConfig(threads=threads))
