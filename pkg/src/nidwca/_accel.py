"""Backend selection for the hot kernels.

``NIDWCA_BACKEND=numpy`` forces the pure-numpy path; the default is numba when
it imports.  ``NIDWCA_THREADS`` caps numba's worker count (0 or unset = auto).
"""
import os
import warnings

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

# an outdated system TBB is reported on every parallel compile; numba falls back to omp/workqueue
warnings.filterwarnings("ignore", message="The TBB threading layer requires")

HAVE_NUMBA = numba is not None


def requested_backend():
    name = os.environ.get("NIDWCA_BACKEND", "").strip().lower()
    if name in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(f"NIDWCA_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("NIDWCA_BACKEND=numba but numba is not installed")
    return name


def configure_threads():
    if not HAVE_NUMBA:
        return
    raw = os.environ.get("NIDWCA_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("NIDWCA_THREADS must be >= 0")
    if n:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


if HAVE_NUMBA:
    njit = numba.njit
    prange = numba.prange
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f

    prange = range
