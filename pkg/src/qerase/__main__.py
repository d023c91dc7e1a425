"""Run the qerase command line as ``python -m qerase``."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
