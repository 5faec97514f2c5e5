"""
Main entry point for running gapminmax as a module.
Enables usage: python -m gapminmax
"""
import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
