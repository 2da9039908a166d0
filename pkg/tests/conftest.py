import pytest
from hypothesis import settings

from unionholes.construction import ConstructionParams, build_body, choose_epsilon, predicted_nerve
from unionholes.topology import nerve_skeleton, verify_nerve_matches

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


class ExtremalCase:
    """Validated family for one m, with the nerve computed during validation."""

    def __init__(self, m: int):
        self.m = m
        self.params = ConstructionParams.for_m(m)
        self.ub = build_body(self.params)
        prediction = predicted_nerve(m)
        cache = {}

        def validate(fam):
            cx = nerve_skeleton(fam, 3)
            cache["cx"], cache["fam"] = cx, fam
            return verify_nerve_matches(cx, prediction)

        self.budget = choose_epsilon(self.ub, validate)
        self.eps = self.budget.eps
        self.family = cache["fam"]
        self.complex = cache["cx"]


_CASES = {}


def extremal_case(m: int) -> ExtremalCase:
    if m not in _CASES:
        _CASES[m] = ExtremalCase(m)
    return _CASES[m]


@pytest.fixture(scope="session")
def case1():
    return extremal_case(1)


@pytest.fixture(scope="session")
def case2():
    return extremal_case(2)


@pytest.fixture(scope="session")
def case3():
    return extremal_case(3)


@pytest.fixture(scope="session")
def family_m2(case2):
    return case2.family
