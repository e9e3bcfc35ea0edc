"""One test per acceptance criterion, each printing its pass/fail line."""

import pytest
from conftest import ACCEPTANCE_LINES

from a2e import acceptance


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(acceptance.CHECKS))
def test_criterion(number):
    result = acceptance.run_one(number)
    print(result.line())
    ACCEPTANCE_LINES.append(result.line().splitlines()[0])
    assert result.passed, result.detail
