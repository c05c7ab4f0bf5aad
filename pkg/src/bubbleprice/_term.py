"""Terminal output for the command line: colours, vignette status labels and estimates.

Colour is off when stdout is not a tty, ``TERM=dumb`` or ``NO_COLOR`` is set.
"""

from __future__ import annotations

import os
import sys
from collections import Counter
from collections.abc import Iterable

_COLOR: bool | None = None

# status -> (label, ANSI codes), in summary order
_STATUSES: dict[str, tuple[str, tuple[int, ...]]] = {
    "pass": ("PASS", (32,)),
    "inconclusive": ("INCONCLUSIVE", (33,)),
    "fail": ("FAIL", (31, 1)),
    "error": ("ERROR", (31,)),
}
LABEL_WIDTH = max(len(label) for label, _ in _STATUSES.values())


def supports_color() -> bool:
    global _COLOR
    if _COLOR is None:
        _COLOR = (
            os.environ.get("NO_COLOR", "") == ""
            and os.environ.get("TERM", "") != "dumb"
            and hasattr(sys.stdout, "isatty")
            and sys.stdout.isatty()
        )
    return _COLOR


def force_color(enabled: bool | None) -> None:
    """Pin colour output on or off; ``None`` re-detects on next use."""
    global _COLOR
    _COLOR = enabled


def style(text: str, *codes: int) -> str:
    if not supports_color() or not codes:
        return text
    seq = ";".join(str(c) for c in codes)
    return f"\033[{seq}m{text}\033[0m"


def red(text: str) -> str:
    return style(text, 31)


def dim(text: str) -> str:
    return style(text, 2)


def bold(text: str) -> str:
    return style(text, 1)


def status_label(status: str) -> str:
    """Right-aligned vignette status; padding is applied before colouring."""
    label, codes = _STATUSES.get(status, (status.upper(), (33,)))
    return " " * max(0, LABEL_WIDTH - len(label)) + style(label, *codes)


def status_summary(statuses: Iterable[str]) -> str:
    """``2 passed, 1 inconclusive``: nonzero counts in a fixed order, coloured by status."""
    counts = Counter(statuses)
    words = {"pass": "passed", "inconclusive": "inconclusive", "fail": "failed", "error": "errored"}
    parts = [style(f"{counts[s]} {words[s]}", *codes) for s, (_, codes) in _STATUSES.items() if counts[s]]
    return ", ".join(parts) or "nothing run"


def estimate(value: float, stderr: float | None = None) -> str:
    """A price to seven places, with its standard error when there is one."""
    if stderr is None:
        return f"{value:.7f}"
    return f"{value:.7f} ± {stderr:.2e}"


def timing(seconds: float) -> str:
    return "  " + dim(f"({seconds:.1f}s)") if seconds >= 0.05 else ""
