import numpy as np
import pytest

from zapvss import signalgen


@pytest.fixture(scope="session")
def small_echo():
    """Short sparse identification problem with a channel switch halfway."""
    L, n = 64, 3000
    x = signalgen.white_noise(n, 11)
    h_pre = signalgen.sparse_impulse(L, 4, 12)
    h_post = signalgen.sparse_impulse(L, 4, 13)
    y = np.concatenate([signalgen.synthesize_echo(x, h_pre)[:1500],
                        signalgen.synthesize_echo(x, h_post)[1500:]])
    d = y + signalgen.noise_at_snr(y, 30.0, 14)
    return x, d, h_pre, h_post, 1500


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
