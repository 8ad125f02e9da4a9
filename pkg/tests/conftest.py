from __future__ import annotations

import pytest

from minik.cli import build


@pytest.fixture
def check_source():
    """Parse + table + check; fails the test on table-construction errors."""

    def _check(source: str, file: str = "test.mk", strict: bool = False):
        checked, diags = build(source, file, strict=strict)
        assert checked is not None, f"table errors: {[d.render() for d in diags]}"
        return checked, diags

    return _check


def codes(diags) -> list[str]:
    return [d.code for d in diags]


def pytest_configure(config):
    config.addinivalue_line("markers", "properties: randomized law suites")
