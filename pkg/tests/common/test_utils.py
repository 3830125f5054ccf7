"""Tests for worker resolution, float formatting and the startup banner."""

import logging

import pytest

from common.constants import THREADS_ENV
from common.logger import Logger
from common.utils import format_float, log_banner, resolve_workers


class TestResolveWorkers:
    """Covers the thread-count policy used by the collision operator."""

    def test_explicit_request_without_cap(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """An explicit worker count is used as is when no cap is set."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_workers(3) == 3

    def test_environment_caps_the_request(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """BOBK_THREADS limits the worker count from above."""
        monkeypatch.setenv(THREADS_ENV, "2")
        assert resolve_workers(8) == 2
        assert resolve_workers(1) == 1

    def test_default_is_at_least_one(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Without a request the CPU count is used, never less than one."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_workers() >= 1

    @pytest.mark.parametrize("value", ["zero", "0", "-3"])
    def test_invalid_cap_is_rejected(self, monkeypatch: pytest.MonkeyPatch, value: str) -> None:
        """A cap that is not a positive integer raises ValueError naming the variable."""
        monkeypatch.setenv(THREADS_ENV, value)
        with pytest.raises(ValueError, match=THREADS_ENV):
            resolve_workers(4)


class TestFormatFloat:
    """format_float must give the shortest text that reads back to the same float."""

    def test_round_trip_text(self) -> None:
        """Values survive a text round trip bit for bit."""
        for value in (0.1, 1.0 / 3.0, 1e-300, -2.5e17):
            assert float(format_float(value)) == value

    def test_integers_are_written_as_floats(self) -> None:
        """Integral inputs are written with a decimal point."""
        assert format_float(3) == "3.0"


class TestLogBanner:
    """The banner lists every field on its own line."""

    def test_banner_fields_are_logged(self, logger: Logger, caplog: pytest.LogCaptureFixture) -> None:
        """App name, version and each field label appear in the log."""
        with caplog.at_level(logging.INFO):
            log_banner(logger, "bobylev-flow", "1.2.3", {"Scenario": "maxwellian", "Workers": "4"})
        text = caplog.text
        assert "bobylev-flow 1.2.3" in text
        assert "Scenario:" in text and "maxwellian" in text
        assert "Workers:" in text
