"""
heardof - delivered predicates, strategies and heard-of predicates
Command-line entry point: python app.py <command> [options]
"""

import sys

from heardof.cli import main


if __name__ == "__main__":
    sys.exit(main())
