#!/usr/bin/env python3
"""
File Handling Utilities
Atomic CSV, JSON and text output, and the t,u,y trace reader.
"""

import json
import logging
import os
import tempfile
from typing import Any, Dict

import numpy as np
import pandas as pd

from exceptions.control_exceptions import ConfigValidationError, DataFormatError, ModelError
from lti_core import TimeSeries

# Configure logging
logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"
TRACE_COLUMNS = ["t", "u", "y"]
UNIFORM_TOLERANCE = 1e-6


class FileHandler:
    """Utilities for handling files"""

    @staticmethod
    def ensure_directory(directory_path: str) -> bool:
        """
        Ensure a directory exists, creating it if necessary

        Args:
            directory_path: Path to the directory

        Returns:
            True if the directory was created, False if it already existed

        Raises:
            OSError: the directory cannot be created
        """
        if os.path.isdir(directory_path):
            return False
        os.makedirs(directory_path, exist_ok=True)
        logger.info(f"Created directory: {directory_path}")
        return True

    @staticmethod
    def _atomic_write(file_path: str, write) -> None:
        """Run write(handle) on a temp file next to file_path, then rename it into place."""
        directory = os.path.dirname(os.path.abspath(file_path))
        FileHandler.ensure_directory(directory)
        fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.splitext(file_path)[1])
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                write(handle)
            os.replace(temp_path, file_path)
        except BaseException:
            if os.path.exists(temp_path):
                os.remove(temp_path)
            raise

    @staticmethod
    def safe_write_csv(df: pd.DataFrame, file_path: str) -> str:
        """
        Write a DataFrame to CSV atomically with 9 significant digits

        Args:
            df: DataFrame to write
            file_path: Destination path

        Returns:
            The path written
        """
        FileHandler._atomic_write(
            file_path,
            lambda handle: df.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"),
        )
        logger.info(f"Wrote {len(df)} rows to {file_path}")
        return file_path

    @staticmethod
    def write_text_atomic(text: str, file_path: str) -> str:
        """Write a text file atomically."""
        FileHandler._atomic_write(file_path, lambda handle: handle.write(text))
        logger.debug(f"Wrote {file_path}")
        return file_path

    @staticmethod
    def load_json(file_path: str) -> Dict[str, Any]:
        """
        Load a JSON document

        Args:
            file_path: Path to JSON file

        Returns:
            The parsed document

        Raises:
            ConfigValidationError: missing file, invalid JSON or a non-object document
        """
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ConfigValidationError(f"File not found: {file_path}") from e
        except json.JSONDecodeError as e:
            raise ConfigValidationError(f"Invalid JSON in {file_path}: {e.msg} (line {e.lineno})") from e
        if not isinstance(data, dict):
            raise ConfigValidationError(f"{file_path} must hold a JSON object")
        return data

    @staticmethod
    def save_json(data: Dict[str, Any], file_path: str, indent: int = 2) -> str:
        """Save a document as JSON atomically, keys in insertion order."""
        FileHandler._atomic_write(
            file_path,
            lambda handle: handle.write(json.dumps(data, indent=indent) + "\n"),
        )
        logger.info(f"Saved JSON to {file_path}")
        return file_path

    @staticmethod
    def write_timeseries_csv(series: TimeSeries, file_path: str) -> str:
        """Write a trace with the t,u,y header."""
        return FileHandler.safe_write_csv(series.to_frame(), file_path)

    @staticmethod
    def read_timeseries_csv(file_path: str) -> TimeSeries:
        """
        Read a t,u,y trace

        Args:
            file_path: CSV path

        Returns:
            TimeSeries on the recorded grid

        Raises:
            DataFormatError: wrong header, missing or non-numeric values,
                or a time column that is not uniformly spaced
        """
        try:
            df = pd.read_csv(file_path)
        except FileNotFoundError as e:
            raise DataFormatError("File not found", path=file_path) from e
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise DataFormatError(f"Unreadable CSV: {e}", path=file_path) from e

        if list(df.columns) != TRACE_COLUMNS:
            raise DataFormatError(f"Header must be exactly {','.join(TRACE_COLUMNS)}, got {','.join(map(str, df.columns))}",
                                  path=file_path)
        if len(df) < 2:
            raise DataFormatError("Trace needs at least two samples", path=file_path)
        try:
            values = df.astype(float).to_numpy()
        except ValueError as e:
            raise DataFormatError(f"Non-numeric value: {e}", path=file_path) from e
        if not np.all(np.isfinite(values)):
            raise DataFormatError("Missing or non-finite values", path=file_path)

        t = values[:, 0]
        steps = np.diff(t)
        sample_time = float(np.mean(steps))
        if sample_time <= 0.0 or np.max(np.abs(steps - sample_time)) > UNIFORM_TOLERANCE * max(sample_time, 1.0):
            raise DataFormatError("Time column is not uniformly spaced", path=file_path)
        logger.debug(f"Read {len(t)} samples at T={sample_time:.6g} s from {file_path}")
        try:
            return TimeSeries(t, values[:, 1], values[:, 2])
        except ModelError as e:
            raise DataFormatError(str(e), path=file_path) from e

