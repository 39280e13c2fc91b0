"""Allow running toricqfi as a module with -m flag."""

from .cli import main

if __name__ == "__main__":
    main()
