"""Scanner backend selection: compiled kernel when available, pure Python otherwise.

Set MULTIDIMER_PURE_PYTHON=1 to force the fallback (used by the benchmark
and the equivalence tests).
"""

from __future__ import annotations

import os

from multidimer.extract import _scan_py

if os.environ.get("MULTIDIMER_PURE_PYTHON"):
    scan = _scan_py.scan
    SCANNER_BACKEND = "python"
else:
    try:
        from multidimer.extract import _scan  # type: ignore[attr-defined]

        scan = _scan.scan
        SCANNER_BACKEND = "cython"
    except ImportError:
        scan = _scan_py.scan
        SCANNER_BACKEND = "python"

CHANGE_ID = _scan_py.CHANGE_ID
HEX_RUN = _scan_py.HEX_RUN
