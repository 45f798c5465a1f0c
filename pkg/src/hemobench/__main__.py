"""Module entry point for python -m hemobench."""

from .cli import main_entry

if __name__ == "__main__":
    main_entry()
