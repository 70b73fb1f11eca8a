"""
Entry point for the scripts package.
This file allows you to run the toolkit directly with python -m scripts
"""
import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
