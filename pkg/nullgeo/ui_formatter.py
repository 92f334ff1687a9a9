"""
UI Formatting module for console output
Renders verdict lines, tables and the fixture listing for the CLI
"""

import os
import sys
from typing import List, Optional


class UIFormatter:
    """Console UI formatting utilities"""

    # ANSI Color codes
    COLORS = {
        'RESET': '\033[0m',
        'BOLD': '\033[1m',
        'DIM': '\033[2m',
        'CYAN': '\033[36m',
        'GREEN': '\033[32m',
        'YELLOW': '\033[33m',
        'RED': '\033[31m',
    }

    # Symbols
    SYMBOLS = {
        'SUCCESS': '✓',
        'FAILURE': '✗',
        'WARNING': '⚠',
        'SKIPPED': '-',
        'BULLET': '•',
    }

    VERDICT_STYLE = {
        'pass': ('SUCCESS', 'GREEN'),
        'fail': ('FAILURE', 'RED'),
        'skipped': ('SKIPPED', 'DIM'),
    }

    @staticmethod
    def _supports_colors() -> bool:
        """Check if terminal supports colors"""
        return hasattr(sys.stdout, 'isatty') and sys.stdout.isatty() and os.name != 'nt'

    @staticmethod
    def _colorize(text: str, color: str) -> str:
        """Apply color to text if supported"""
        if not UIFormatter._supports_colors():
            return text

        color_code = UIFormatter.COLORS.get(color, '')
        reset_code = UIFormatter.COLORS['RESET']
        return f"{color_code}{text}{reset_code}"

    @staticmethod
    def header(title: str, width: int = 72) -> str:
        """Create a formatted header"""
        padded = f" {title} ".center(width, "=")
        return f"\n{padded}"

    @staticmethod
    def subheader(title: str, width: int = 72) -> str:
        """Create a formatted subheader"""
        border = "-" * width
        return f"\n{UIFormatter._colorize(title, 'CYAN')}\n{border}"

    @staticmethod
    def success(message: str, indent: int = 0) -> str:
        prefix = UIFormatter._colorize(UIFormatter.SYMBOLS['SUCCESS'], 'GREEN')
        return f"{' ' * indent}{prefix} {message}"

    @staticmethod
    def failure(message: str, indent: int = 0) -> str:
        prefix = UIFormatter._colorize(UIFormatter.SYMBOLS['FAILURE'], 'RED')
        return f"{' ' * indent}{prefix} {message}"

    @staticmethod
    def warning(message: str, indent: int = 0) -> str:
        prefix = UIFormatter._colorize(UIFormatter.SYMBOLS['WARNING'], 'YELLOW')
        return f"{' ' * indent}{prefix} {message}"

    @staticmethod
    def verdict_line(identity_id: str, verdict: str, max_residual: float, tolerance: float,
                     note: Optional[str] = None, indent: int = 2, name: Optional[str] = None) -> str:
        """
        One identity verdict

        Args:
            identity_id: Registry id
            verdict: pass, fail or skipped
            max_residual: Largest scaled residual
            tolerance: Tier tolerance
            note: Skip reason or other trailing text
            name: Descriptive name, shown after the id when it differs
        """
        symbol, color = UIFormatter.VERDICT_STYLE.get(verdict, ('SKIPPED', 'DIM'))
        prefix = UIFormatter._colorize(UIFormatter.SYMBOLS[symbol], color)
        label = identity_id if not name or name == identity_id else f"{identity_id} {name}"
        if verdict == 'skipped':
            body = f"{label:<44} skipped"
        else:
            relation = "<=" if verdict == 'pass' else "> "
            body = f"{label:<44} {max_residual:9.2e} {relation} {tolerance:.0e}"
        if note:
            body += f"  ({note})"
        return f"{' ' * indent}{prefix} {body}"

    @staticmethod
    def table(headers: List[str], rows: List[List[str]], col_widths: Optional[List[int]] = None) -> str:
        """Format a table"""
        if not col_widths:
            col_widths = [len(h) for h in headers]
            for row in rows:
                for i, cell in enumerate(row):
                    col_widths[i] = max(col_widths[i], len(str(cell)))

        header_row = " | ".join(h.ljust(w) for h, w in zip(headers, col_widths))
        separator = "-" * len(header_row)

        output = f"\n{header_row}\n{separator}"

        for row in rows:
            row_str = " | ".join(str(cell).ljust(w) for cell, w in zip(row, col_widths))
            output += f"\n{row_str}"

        return output

    @staticmethod
    def key_value_pair(key: str, value: str, indent: int = 2) -> str:
        return f"{' ' * indent}{key}: {value}"
