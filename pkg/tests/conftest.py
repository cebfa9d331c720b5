"""Shared fixtures: groups and kernel profiles are process-wide singletons.

The expensive validation battery runs at most once per profile per session;
``ensure_validated`` records the wall time of the first (real) run so the
acceptance test can assert the runtime budget no matter which test triggered
the battery.
"""

import time

import pytest

import fatoulab as F

_VALIDATION_TIMES: dict = {}


def ensure_validated(profile):
    """Validate a kernel profile once; return (report, elapsed_seconds)."""
    label = profile.group.label
    if profile.validation is None:
        t0 = time.time()
        F.validate_profile(profile)
        _VALIDATION_TIMES[label] = time.time() - t0
    return profile.validation, _VALIDATION_TIMES.get(label, 0.0)


@pytest.fixture(scope="session")
def g1():
    return F.euclidean_group(1)


@pytest.fixture(scope="session")
def g2():
    return F.euclidean_group(2)


@pytest.fixture(scope="session")
def g3():
    return F.euclidean_group(3)


@pytest.fixture(scope="session")
def gh():
    return F.heisenberg_group()


@pytest.fixture(scope="session")
def p1():
    return F.euclidean_profile(1)


@pytest.fixture(scope="session")
def p2():
    return F.euclidean_profile(2)


@pytest.fixture(scope="session")
def p3():
    return F.euclidean_profile(3)


@pytest.fixture(scope="session")
def ph():
    return F.heisenberg_profile()
