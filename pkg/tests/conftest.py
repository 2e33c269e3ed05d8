import os
import tempfile

os.environ.setdefault("ICGSCAN_HOME", tempfile.mkdtemp(prefix="icgscan-home-"))

import hypothesis  # noqa: E402
import numpy as np  # noqa: E402
import pytest  # noqa: E402

from icgscan.core import DelineationParams  # noqa: E402
from icgscan.synth import NoiseSpec, build_corpus  # noqa: E402

np.seterr(all="warn")

hypothesis.settings.register_profile("dev", max_examples=50, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))

NOISY = (
    NoiseSpec(kind="white", sigma=0.05),
    NoiseSpec(kind="baseline-drift", freq_hz=0.25, amplitude=0.2),
)


@pytest.fixture(scope="session")
def physiological_params() -> DelineationParams:
    return DelineationParams.physiological()


@pytest.fixture(scope="session")
def clean_corpus(physiological_params):
    return build_corpus(records_per_morphology=10, params=physiological_params)


@pytest.fixture(scope="session")
def noisy_corpus(physiological_params):
    return build_corpus(records_per_morphology=10, noise=NOISY, params=physiological_params)
