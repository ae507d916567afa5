#!/usr/bin/env python3
"""
Tests for report formatting, trace files, exit codes and environment settings.
"""

import logging
import math

import numpy as np
import pytest

from config import AppConfig
from exceptions.control_exceptions import (
    BinMisalignment, ConfigValidationError, DataFormatError, DegenerateSpeed, InsufficientExcitation,
    SingularRegression, ThetaOutOfRange,
)
from lti_core import TimeSeries
from utils.error.error_handler import exception_mapper, exit_code_for, exit_on_error, setup_logger
from utils.file.file_handler import FileHandler
from utils.text.text_processor import TextProcessor


class TestTextProcessor:

    @pytest.mark.parametrize("value,text", [
        (0.1, "0.1"), (1.0 / 3.0, "0.333333333"), (3, "3"), (True, "true"), (None, "none"),
        (math.nan, "nan"), (-math.inf, "-inf"), (-0.0, "0"), (np.float64(2.5), "2.5"),
    ])
    def test_format_number(self, value, text):
        assert TextProcessor.format_number(value) == text

    def test_format_polynomial(self):
        assert TextProcessor.format_polynomial([1.0, 5.44, 2.2]) == "s^2 + 5.44*s + 2.2"
        assert TextProcessor.format_polynomial([-1.0, 0.0, -2.0], "z") == "-z^2 - 2"
        assert TextProcessor.format_polynomial([0.0]) == "0"

    def test_key_value_lines(self):
        text = TextProcessor.key_value_lines([("kp", 1.5), ("dz_num", [1.0, -1.0])])
        assert text == "kp=1.5\ndz_num=[1, -1]\n"
        with pytest.raises(ValueError):
            TextProcessor.key_value_lines([("Bad-Key", 1)])


class TestFileHandler:

    def test_trace_round_trip(self, tmp_path):
        series = TimeSeries.from_input(np.sin(np.arange(50) * 0.1), 0.05, np.cos(np.arange(50) * 0.1))
        path = FileHandler.write_timeseries_csv(series, str(tmp_path / "trace.csv"))
        loaded = FileHandler.read_timeseries_csv(path)
        assert loaded.sample_time == pytest.approx(0.05)
        np.testing.assert_allclose(loaded.u, series.u, rtol=1e-8, atol=1e-9)
        with open(path, "rb") as handle:
            assert b"\r\n" not in handle.read()

    @pytest.mark.parametrize("content", [
        "t,u\n0,1\n0.05,2\n",
        "t,u,y\n0,1,0\n",
        "t,u,y\n0,1,0\n0.05,x,0\n",
        "t,u,y\n0,1,0\n0.05,,0\n",
    ])
    def test_bad_traces(self, tmp_path, content):
        path = tmp_path / "bad.csv"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(DataFormatError):
            FileHandler.read_timeseries_csv(str(path))

    def test_missing_trace(self, tmp_path):
        with pytest.raises(DataFormatError, match="absent.csv"):
            FileHandler.read_timeseries_csv(str(tmp_path / "absent.csv"))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigValidationError):
            FileHandler.load_json(str(path))

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        FileHandler.write_text_atomic("abc\n", str(tmp_path / "note.txt"))
        assert sorted(p.name for p in tmp_path.iterdir()) == ["note.txt"]


class TestErrorHandling:

    @pytest.mark.parametrize("error,code", [
        (ConfigValidationError("bad", key="plant.den"), 2),
        (ThetaOutOfRange(), 2),
        (BinMisalignment(), 2),
        (InsufficientExcitation(), 4),
        (DegenerateSpeed(), 3),
        (OSError("disk"), 3),
    ])
    def test_exit_code_for(self, error, code):
        assert exit_code_for(error) == code

    def test_exit_on_error(self, capsys):
        @exit_on_error()
        def failing():
            raise ConfigValidationError("unknown key", key="plant.poles")

        @exit_on_error()
        def interrupted():
            raise KeyboardInterrupt()

        @exit_on_error()
        def quiet():
            return None

        assert failing() == 2
        assert "plant.poles: unknown key" in capsys.readouterr().err
        assert interrupted() == 130
        assert quiet() == 0

    def test_exception_mapper(self):
        @exception_mapper({ZeroDivisionError: SingularRegression})
        def divide():
            return 1 / 0

        with pytest.raises(SingularRegression):
            divide()

    def test_setup_logger_does_not_stack_handlers(self):
        name = "trikectl.test"
        setup_logger(name, use_color=False)
        logger = setup_logger(name, level=logging.DEBUG, use_color=False)
        assert len(logger.handlers) == 1
        assert logger.level == logging.DEBUG


class TestAppConfig:

    def test_out_dir(self, monkeypatch):
        assert AppConfig.get_out_dir() == "./out"
        monkeypatch.setenv("TRIKECTL_OUT_DIR", "/tmp/runs")
        assert AppConfig.get_out_dir() == "/tmp/runs"

    @pytest.mark.parametrize("value,workers", [("4", 4), ("0", 1), ("many", 3)])
    def test_max_workers(self, monkeypatch, value, workers):
        monkeypatch.setenv("TRIKECTL_MAX_WORKERS", value)
        assert AppConfig.get_max_workers() == workers

    def test_log_level(self, monkeypatch):
        monkeypatch.setenv("TRIKECTL_LOG_LEVEL", "warning")
        assert AppConfig.get_log_level() == logging.WARNING
        monkeypatch.setenv("TRIKECTL_LOG_LEVEL", "chatty")
        assert AppConfig.get_log_level() == logging.INFO

    def test_no_color(self):
        assert AppConfig.use_color() is False
