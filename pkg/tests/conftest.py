import time

import numpy as np
import pytest

import hardy_lab as hl

SESSION_T0 = time.monotonic()


def session_elapsed() -> float:
    return time.monotonic() - SESSION_T0


@pytest.fixture(scope="session")
def demo_cov10():
    return hl.build_covering(hl.profile_demo(), depth_max=10)


@pytest.fixture(scope="session")
def demo_cov8(demo_cov10):
    return hl.build_covering(hl.profile_demo(), depth_max=8)


@pytest.fixture(scope="session")
def demo_cov6():
    return hl.build_covering(hl.profile_demo(), depth_max=6)


@pytest.fixture(scope="session")
def flat_cov0():
    # the unit-square domain: the root cube of the flat profile alone
    return hl.build_covering(hl.profile_flat(2.0), depth_max=0)


def random_problem(rng, max_vertices=40, p=2.0):
    n = int(rng.integers(2, max_vertices + 1))
    tree = hl.random_tree(n, rng)
    lo, hi = np.log(1e-2), np.log(1e2)
    u = np.exp(rng.uniform(lo, hi, n - 1))
    v = np.exp(rng.uniform(lo, hi, n - 1))
    return hl.make_problem(tree, u, v, p)
