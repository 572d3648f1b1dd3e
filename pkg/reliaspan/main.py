"""
ReliaSpan - Command-Line Entry Point

    python -m reliaspan.main build --n 1024 --rho 0.25 --seed 7 --out spanner.json
"""
import sys

from reliaspan.cli.commands import dispatch
from reliaspan.core.logging import app_logger


def main() -> int:
    app_logger.debug(f"reliaspan {' '.join(sys.argv[1:])}")
    return dispatch(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
