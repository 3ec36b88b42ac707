"""Console launcher that applies thread limits before numerical imports.

BLAS backends size their thread pools when the numerics stack is first
imported, so the ``--threads`` bound must land in the environment before
that happens.  This module stays import-light for exactly that reason;
the real argument parsing lives in :mod:`fracheat.cli`.
"""

from __future__ import annotations

import os
import sys

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def _peek_threads(argv: list[str]) -> str:
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--threads="):
            return arg.split("=", 1)[1]
    return "1"


def main(argv: list[str] | None = None) -> int:
    """Set thread environment variables, then run the CLI."""
    argv = list(sys.argv[1:] if argv is None else argv)
    value = _peek_threads(argv)
    if value.isdigit() and int(value) >= 1:
        for var in _THREAD_VARS:
            os.environ[var] = value

    from fracheat.cli import main as _cli_main

    return _cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
