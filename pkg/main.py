"""
nullgeo - Main Entry Point

Launcher for running from a source checkout; the installed console script
is `nullgeo`.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from nullgeo.cli import main


if __name__ == '__main__':
    sys.exit(main())
