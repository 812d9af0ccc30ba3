import numpy as np
import pytest

from mbvqe.verify import (
    SUITES,
    check_backend_agreement,
    check_counts,
    check_decorated_edge,
    check_determinism,
    run_suites,
)


def test_suite_names():
    assert sorted(SUITES) == ["backend", "counts", "determinism", "eq-s1"]


def test_counts_pass():
    assert check_counts(1, np.random.default_rng(0)) == []


def test_decorated_edge_suite_passes(rng):
    assert check_decorated_edge(10, rng) == []


def test_backend_agreement_passes(rng):
    assert check_backend_agreement(5, rng) == []


def test_determinism_passes(rng):
    assert check_determinism(10, rng) == []


def test_run_suites_is_seeded():
    assert run_suites("eq-s1", trials=3, seed=4) == []
    with pytest.raises(KeyError):
        run_suites("nonsense")
