"""Entry point for ``python -m ssg_toolkit``."""
import sys

from ssg_toolkit.cli import main

if __name__ == "__main__":
    sys.exit(main())
