"""Hot loops of the interference metric and the tiered assignment.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` are used. Setting ``LOCPILOT_PURE_PYTHON=1`` forces
the fallback. Both backends return bit-identical results.
"""

import os

from . import _pykernels as python_backend

try:
    if os.environ.get("LOCPILOT_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "cython" if compiled_backend is not None else "python"

sinpi = backend.sinpi
dirichlet_cycles = backend.dirichlet_cycles
dirichlet_ratio = backend.dirichlet_ratio
pair_value = backend.pair_value
greedy_match = backend.greedy_match
tier_costs = backend.tier_costs
location_aware = backend.location_aware
total_interference = backend.total_interference
