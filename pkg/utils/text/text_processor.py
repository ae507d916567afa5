#!/usr/bin/env python3
"""
Text Processing Utilities
Key-value report lines and number formatting for CLI output.
"""

import logging
import math
import re
from typing import Any, Iterable, List, Tuple

# Configure logging
logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 9
_KEY_PATTERN = re.compile(r"^[a-z][a-z0-9_.]*$")


class TextProcessor:
    """Utilities for formatting report text"""

    @staticmethod
    def format_number(value: Any) -> str:
        """
        Format a value with 9 significant digits

        Args:
            value: Number, bool, None or any other value

        Returns:
            Text form; integers stay integral, None becomes "none"
        """
        if value is None:
            return "none"
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            if math.isnan(value):
                return "nan"
            if math.isinf(value):
                return "inf" if value > 0 else "-inf"
            text = f"{value:.{SIGNIFICANT_DIGITS}g}"
            return "0" if text == "-0" else text
        try:
            return TextProcessor.format_number(float(value))
        except (TypeError, ValueError):
            return str(value)

    @staticmethod
    def format_vector(values: Iterable[Any]) -> str:
        """Bracketed, comma-separated list of formatted numbers."""
        return "[" + ", ".join(TextProcessor.format_number(v) for v in values) + "]"

    @staticmethod
    def format_polynomial(coefficients: Iterable[float], variable: str = "s") -> str:
        """
        Human-readable polynomial in descending powers

        Args:
            coefficients: Highest power first
            variable: Name of the indeterminate

        Returns:
            e.g. "s^2 + 5.44*s + 2.2"
        """
        coefficients = [float(c) for c in coefficients]
        degree = len(coefficients) - 1
        terms: List[str] = []
        for index, c in enumerate(coefficients):
            if c == 0.0:
                continue
            power = degree - index
            magnitude = abs(c)
            if power == 0:
                body = TextProcessor.format_number(magnitude)
            else:
                factor = variable if power == 1 else f"{variable}^{power}"
                body = factor if magnitude == 1.0 else f"{TextProcessor.format_number(magnitude)}*{factor}"
            if not terms:
                terms.append(body if c > 0 else f"-{body}")
            else:
                terms.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(terms) if terms else "0"

    @staticmethod
    def key_value_lines(items: Iterable[Tuple[str, Any]]) -> str:
        """
        Render key=value lines, one per item, in the given order

        Raises:
            ValueError: a key is not lower-case dotted snake case
        """
        lines = []
        for key, value in items:
            if not _KEY_PATTERN.match(key):
                raise ValueError(f"Invalid report key: {key!r}")
            if isinstance(value, (list, tuple)):
                text = TextProcessor.format_vector(value)
            else:
                text = TextProcessor.format_number(value)
            lines.append(f"{key}={text}")
        return "\n".join(lines) + ("\n" if lines else "")

