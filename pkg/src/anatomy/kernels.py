"""Backend selection for the hot BPE merge kernel.

The compiled extension is preferred when it built successfully; setting
ANATOMY_PURE_PYTHON=1 forces the fallback (used by the parity tests and
the benchmark). ``BACKEND`` records which implementation is active.
"""

import os

if os.environ.get("ANATOMY_PURE_PYTHON"):
    from anatomy._merge_py import merge_word

    BACKEND = "python"
else:
    try:
        from anatomy._merge_cy import merge_word  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from anatomy._merge_py import merge_word  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["merge_word", "BACKEND"]
