import os

import pytest

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


@pytest.fixture
def fixture_path():
    return lambda name: os.path.join(FIXTURES, name)


@pytest.fixture
def in_tmpdir(tmp_path, monkeypatch):
    """ Run in a scratch directory so biz_log.txt and outputs stay out of the tree. """
    monkeypatch.chdir(tmp_path)
    return tmp_path
