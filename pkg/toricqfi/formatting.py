"""Common number formatting for CSV files and console tables."""

import math
from typing import Any, Optional

import numpy as np


def format_value(value: Any) -> str:
    """
    Format a value for CSV output.

    Floats use 17 significant digits so ``float()`` recovers them exactly and
    keep a decimal point when integral, so 1.0 reads back as a float; integers
    are written plainly and booleans as true/false.

    Args:
        value: Scalar to format

    Returns:
        CSV cell text
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        text = format(float(value), ".17g")
        return text + ".0" if text.lstrip("-").isdigit() else text
    return str(value)


def parse_value(text: str) -> Any:
    """Inverse of ``format_value`` for numbers; other text is returned unchanged."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def format_display(value: Optional[float], digits: int = 6) -> str:
    """Short form for console tables; nan shows as a dash."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    return f"{value:.{digits}g}"
