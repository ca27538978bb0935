import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from fracsurv import chf  # noqa: E402
from fracsurv.model import ModelParams  # noqa: E402
from oracles import REFERENCE_SETS  # noqa: E402

BACKENDS = ["python"]
try:
    from fracsurv import _series  # noqa: F401

    BACKENDS.insert(0, "compiled")
except ImportError:
    pass


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = chf.BACKEND
    chf.use_backend(request.param)
    yield request.param
    chf.use_backend(previous)


@pytest.fixture(params=list(REFERENCE_SETS), ids=list(REFERENCE_SETS))
def ref_params(request):
    return request.param, ModelParams(*REFERENCE_SETS[request.param])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        ok, detail = results[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
