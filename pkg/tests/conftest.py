import numpy as np
import pytest

from jointfade.config import PipelineConfig
from jointfade.pipeline import run_pipeline

# window-sized alignment matches the synthetic trace layout (one fade per window)
SYNTH_CFG = PipelineConfig(seed=1, align_M=10)


@pytest.fixture(scope="session")
def synth_run():
    return run_pipeline(SYNTH_CFG)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
