import time

import numpy as np
import pytest

from sciviz import ConvNetClassifier, SaliencyClassImpressions
from sciviz.config import Config
from sciviz.image import load_mnist


@pytest.fixture(scope="session")
def mnist():
    X_train, y_train, X_test, y_test = load_mnist()
    return X_train[..., None].astype(np.float64), y_train, X_test[..., None].astype(np.float64), y_test


@pytest.fixture(scope="session")
def trained(mnist):
    """The default classifier trained once per session; ``train_seconds_`` is wall time."""
    X_train, y_train, X_test, y_test = mnist
    start = time.perf_counter()
    clf = ConvNetClassifier().fit(X_train, y_train, X_test, y_test)
    clf.train_seconds_ = time.perf_counter() - start
    return clf


@pytest.fixture(scope="session")
def weights_file(trained, tmp_path_factory):
    path = tmp_path_factory.mktemp("weights") / "model.sciw"
    trained.save(path)
    return path


@pytest.fixture(scope="session")
def desk_params():
    return Config.preset("desk").params("synth")


@pytest.fixture(scope="session")
def desk(trained, mnist, desk_params):
    return SaliencyClassImpressions(trained, **desk_params).fit(mnist[0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, taken from the real test outcome

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[key] = (report.outcome, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split(".")[0])):
        outcome, detail = _ACCEPTANCE[key]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {key:>2}: {status}  {detail}")
