"""FFT entry points with a process-wide worker count.

The worker count is read once, at import, from the WPSIM_THREADS environment
variable (default 1).  Results are bitwise reproducible for a fixed worker
count; changing it may reorder floating-point reductions inside the
transform, so runs are only guaranteed identical under the same setting.
"""

import os

import scipy.fft as _sfft

WORKERS = max(1, int(os.environ.get("WPSIM_THREADS", "1")))


def fft(a):
    return _sfft.fft(a, workers=WORKERS)


def ifft(a):
    return _sfft.ifft(a, workers=WORKERS)
