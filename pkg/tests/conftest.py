import math

import numpy as np
import pytest

from epcavity.core import RatioSpec, derive_params, g2_min

KAPPA_2 = 2.0
SYMMETRIC_MIRRORS = (2.25, 2.25, 0.5)
ASYMMETRIC_MIRRORS = (7.0, 1.5, 2.5)
P3_MIRRORS = (9.0, 1.5, 2.5)


def random_spec(rng, sign=None) -> RatioSpec:
    """A feasible spec with p, q log-uniform over roughly two decades."""
    p = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
    q = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
    k2 = rng.uniform(0.5, 3.0)
    g2 = g2_min(p, q, k2) * (1.0 + rng.uniform(1e-3, 1.5))
    if sign is None:
        sign = 1 if rng.random() < 0.5 else -1
    return RatioSpec(p, q, k2, g2, omega_c=rng.uniform(-5.0, 5.0), delta_1_sign=sign)


def random_mirrors(rng, spec: RatioSpec):
    kappa_e = (spec.p + 1.0) * spec.kappa_2
    kappa_int = rng.uniform(0.0, 0.5) * kappa_e
    total = kappa_e + kappa_int
    alpha = rng.uniform(0.1, 0.9) * total
    return alpha, total - alpha, kappa_int


def random_params(rng):
    spec = random_spec(rng)
    return derive_params(spec, random_mirrors(rng, spec))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def symmetric():
    """Builds symmetric-case params at a given g_2 with the default symmetric mirror split."""
    def make(g2, omega_c=0.0):
        return derive_params(RatioSpec(1.0, 1.0, KAPPA_2, g2, omega_c), SYMMETRIC_MIRRORS)
    return make


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
