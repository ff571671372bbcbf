"""Shared fixtures: one validation context per session (tables are costly)."""

from __future__ import annotations

import warnings

import pytest

from hpsusp import config, validate


@pytest.fixture(scope="session")
def ctx() -> validate.ValidationContext:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return validate.ValidationContext()


@pytest.fixture(scope="session")
def bench_cfg():
    return config.bench_prototype(t0=30.0)


@pytest.fixture(scope="session")
def truck():
    return config.mining_truck(t0=30.0)


@pytest.fixture(scope="session")
def bench_table(ctx):
    """Four-frequency bench table at 30 degC (built once, reused)."""
    return ctx.table("bench30")
