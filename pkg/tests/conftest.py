import numpy as np
import pytest

import latticedesign as ld
from latticedesign import seqspace
from latticedesign.folding import designability_census


@pytest.fixture(scope="session")
def ens3():
    return ld.Ensemble.from_side(3)


@pytest.fixture(scope="session")
def ens4():
    return ld.Ensemble.from_side(4)


@pytest.fixture(scope="session")
def eps3():
    return ld.ground_truth_matrix(3)


@pytest.fixture(scope="session")
def seqs333():
    # all 1680 arrangements of {3,3,3} on 9 sites, lexicographic
    return seqspace.all_sequences((3, 3, 3))


@pytest.fixture(scope="session")
def census333(ens3, eps3, seqs333):
    return designability_census(ens3, (3, 3, 3), eps3, 3.0, 0.8, sequences=seqs333)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
