import logging

import pytest

from leafscope.config import _thread_cap


@pytest.mark.parametrize("raw,expected", [("", -1), ("3", 3)])
def test_thread_cap(monkeypatch, raw, expected):
    monkeypatch.setenv("LEAFSCOPE_THREADS", raw)
    assert _thread_cap() == expected


@pytest.mark.parametrize("raw", ["four", "2.5", "0", "-2"])
def test_bad_thread_cap_falls_back_to_all_cores(monkeypatch, caplog, raw):
    monkeypatch.setenv("LEAFSCOPE_THREADS", raw)
    with caplog.at_level(logging.WARNING, logger="leafscope.config"):
        assert _thread_cap() == -1
    assert "LEAFSCOPE_THREADS" in caplog.text
