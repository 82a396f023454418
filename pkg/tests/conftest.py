import numpy as np
import pytest
from hypothesis import settings, strategies as st

from closestring import encode_strings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def instances(draw, n=(1, 5), length=(1, 7), sigma=4):
    """Random small string sets over the first ``sigma`` DNA letters."""
    nn = draw(st.integers(*n))
    ll = draw(st.integers(*length))
    letters = "ACGT"[:sigma]
    rows = draw(st.lists(st.text(letters, min_size=ll, max_size=ll), min_size=nn, max_size=nn))
    return encode_strings(rows)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def at():
    return encode_strings(["AAA", "TTT"])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.VERDICTS, key=lambda k: (int(str(k).rstrip("b")), str(k))):
        ok, detail = mod.VERDICTS[n]
        terminalreporter.write_line(f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
