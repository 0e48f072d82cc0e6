"""Compiled inner loop for the real Parlett-Reid Pfaffian."""
import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


def _real_parlett_reid(a, tol):
    # returns (sign, log|Pf|, failed_step); failed_step = -1 on success
    n = a.shape[0]
    scale = np.abs(a).max()
    sign = 1.0
    logabs = 0.0
    for k in range(0, n - 1, 2):
        kp = k + 1
        best = abs(a[k + 1, k])
        for i in range(k + 2, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                kp = i
        if kp != k + 1:
            for j in range(k, n):
                t = a[k + 1, j]
                a[k + 1, j] = a[kp, j]
                a[kp, j] = t
            for i in range(k, n):
                t = a[i, k + 1]
                a[i, k + 1] = a[i, kp]
                a[i, kp] = t
            sign = -sign
        piv = a[k, k + 1]
        if abs(piv) <= tol * scale:
            return 0.0, 0.0, k // 2
        if piv < 0:
            sign = -sign
        logabs += np.log(abs(piv))
        m = n - k - 2
        tau = np.empty(m)
        col = np.empty(m)
        for i in range(m):
            tau[i] = a[k, k + 2 + i] / piv
            col[i] = a[k + 2 + i, k + 1]
        for i in range(m):
            ti = tau[i]
            ci = col[i]
            for j in range(m):
                a[k + 2 + i, k + 2 + j] += ti * col[j] - ci * tau[j]
    return sign, logabs, -1


real_parlett_reid = njit(cache=True)(_real_parlett_reid) if njit is not None else None
