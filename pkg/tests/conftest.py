"""Shared fixtures: one calibrated session reused across test modules."""
import numpy as np
import pytest

from myoloop.control import ControllerConfig, PreparedRefs, synthesize_references
from myoloop.signal import default_pattern


@pytest.fixture(scope="session")
def calibrated():
    """Default pattern, references, threshold, and prepared banks."""
    pat = default_pattern()
    refs, threshold = synthesize_references(pat, np.random.default_rng(1000))
    prepared = PreparedRefs(refs, perm_seed=7)
    return pat, refs, threshold, prepared


@pytest.fixture()
def continuous_cfg():
    return ControllerConfig()


@pytest.fixture()
def discrete_cfg(calibrated):
    _, _, threshold, _ = calibrated
    return ControllerConfig(mode="discrete", threshold=threshold)
