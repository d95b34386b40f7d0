import sys

import pytest
from PyQt6.QtCore import QCoreApplication

from utils.ffield import build_field


@pytest.fixture(scope="session")
def qapp():
    """Qt application needed by GridRunner signals"""
    app = QCoreApplication.instance() or QCoreApplication(sys.argv[:1])
    yield app


@pytest.fixture(scope="session")
def f11():
    return build_field(11, 1)


@pytest.fixture(scope="session")
def f121():
    return build_field(11, 2)


@pytest.fixture(scope="session")
def f9():
    return build_field(3, 2, (1, 0, 1))


@pytest.fixture(scope="session")
def f4():
    return build_field(2, 2)


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Keep the INI settings file and worker override out of the checkout"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("TADIC_WORKERS", raising=False)
