"""Backend selection for the hot trajectory loops.

Imports the compiled extension when present, otherwise the numpy
fallback.  Set ``PARTASEP_KERNEL=python`` or ``PARTASEP_KERNEL=compiled``
to force a backend (the latter raises if the extension is missing).
Both backends draw from the bit generator in the same order, so results
are identical either way.
"""

from __future__ import annotations

import os

_forced = os.environ.get("PARTASEP_KERNEL", "").strip().lower()

if _forced == "python":
    from . import _kernels_py as _impl
elif _forced == "compiled":
    from . import _kernels as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND_NAME

engine_count = _impl.engine_count
evolve = _impl.evolve
evolve_measure = _impl.evolve_measure
evolve_density = _impl.evolve_density
hitting_time = _impl.hitting_time
