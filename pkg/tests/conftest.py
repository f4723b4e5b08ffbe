import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from gevrey_calculus.rings import GaussianRational

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)
gaussians = st.builds(GaussianRational, fractions, fractions)


@pytest.fixture
def rng():
    return random.Random(20240517)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
