import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from finsler.metrics import (
    euclidean_spec,
    randers,
    riemannian,
    second_matsumoto,
    spec_from_strings,
)

SPHERE_CONFORMAL = "(1 + (x1^2 + x2^2)/4)^-2"

CURVED_A2 = [["1 + 0.2*sin(x1)", "0.05*x1*x2"], ["0.05*x1*x2", "1 + 0.1*x2^2"]]
VARYING_B2 = ["0.18 + 0.04*x2", "0.1*x1"]

CURVED_A3 = [
    ["1 + 0.2*sin(x1)", "0.05*x1*x2", "0"],
    ["0.05*x1*x2", "1 + 0.1*x2^2", "0.03*x3"],
    ["0", "0.03*x3", "1 + 0.1*x1^2"],
]
VARYING_B3 = ["0.15 + 0.04*x2", "0.1*x3", "0.05*x1"]


@pytest.fixture(scope="session")
def euclid2():
    return euclidean_spec(2)


@pytest.fixture(scope="session")
def euclid3():
    return euclidean_spec(3)


@pytest.fixture(scope="session")
def sphere2():
    """Round 2-sphere of curvature 1 in the conformal chart."""
    return spec_from_strings(
        2, [[SPHERE_CONFORMAL, "0"], ["0", SPHERE_CONFORMAL]], ["0", "0"], riemannian()
    )


@pytest.fixture(scope="session")
def rigidity_spec():
    """Second approximate Matsumoto with flat alpha and parallel beta, |b| = 0.2."""
    return euclidean_spec(2, second_matsumoto(), b=["0.2", "0"])


@pytest.fixture(scope="session")
def randers_nonconst():
    """Randers with flat alpha and a genuinely nonconstant 1-form."""
    return spec_from_strings(
        2, [["1", "0"], ["0", "1"]], ["0.2 + 0.05*x2", "-0.05*x1"], randers()
    )


@pytest.fixture(scope="session")
def matsumoto2_curved():
    """Second approximate Matsumoto on a curved chart with varying beta."""
    return spec_from_strings(2, CURVED_A2, VARYING_B2, second_matsumoto())


@pytest.fixture(scope="session")
def riemann_curved():
    return spec_from_strings(2, CURVED_A2, ["0", "0"], riemannian())
