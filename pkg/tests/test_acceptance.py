"""Every acceptance criterion at its stated tolerance and time budget.

Each test prints one PASS/FAIL line, visible even under output capture.
"""

import pytest

from dhlpotts import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number, capsys):
    res = acceptance.run(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
