"""Inertia, signature and Pfaffian-sign computations for dense matrices."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ._kernels import real_parlett_reid
from .errors import GapClosed, NearSingular, NotSelfAdjoint, OddDimension, OddSignature

DEFAULT_RELATIVE_TOL = 1e-8


@dataclass(frozen=True)
class Inertia:
    """Counts of positive, negative and (numerically) zero eigenvalues."""

    n_plus: int
    n_minus: int
    n_zero: int
    min_abs_eig: float
    tol: float

    @property
    def signature(self) -> int:
        return self.n_plus - self.n_minus


def _check_hermitian(m, tol=1e-10):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSelfAdjoint("matrix must be square")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > tol * scale:
        raise NotSelfAdjoint("matrix is not self-adjoint")
    return m


def _ldl_counts(m, shift):
    # Sylvester's law of inertia on the block diagonal of a Bunch-Kaufman factorization
    _, dblocks, _ = scipy.linalg.ldl(m - shift * np.eye(m.shape[0]), lower=True, hermitian=True)
    n = dblocks.shape[0]
    pos = neg = 0
    i = 0
    while i < n:
        if i + 1 < n and dblocks[i + 1, i] != 0:
            w = np.linalg.eigvalsh(dblocks[i:i + 2, i:i + 2])
            pos += int(np.sum(w > 0))
            neg += int(np.sum(w < 0))
            i += 2
        else:
            v = dblocks[i, i].real
            pos += int(v > 0)
            neg += int(v < 0)
            i += 1
    return pos, neg


def inertia(m, tol: Optional[float] = None, method: str = "eigh") -> Inertia:
    """Inertia of a self-adjoint matrix.

    Parameters
    ----------
    m : array_like
        Self-adjoint matrix.
    tol : float, optional
        Eigenvalues with modulus at most ``tol`` count as zero.  Defaults to
        ``1e-8 * ||m||``.
    method : {"eigh", "ldl"}
        ``"eigh"`` diagonalizes.  ``"ldl"`` counts signs in two shifted
        Bunch-Kaufman factorizations ``m -+ tol``, which is several times
        faster for large matrices; ``min_abs_eig`` is then NaN.

    Returns
    -------
    Inertia
    """
    m = _check_hermitian(m)
    if method == "eigh":
        w = np.linalg.eigvalsh(m)
        scale = np.abs(w).max() if w.size else 0.0
        tol = DEFAULT_RELATIVE_TOL * scale if tol is None else tol
        n_plus = int(np.sum(w > tol))
        n_minus = int(np.sum(w < -tol))
        min_abs = float(np.abs(w).min()) if w.size else np.inf
        return Inertia(n_plus, n_minus, len(w) - n_plus - n_minus, min_abs, tol)
    if method == "ldl":
        if tol is None:
            tol = DEFAULT_RELATIVE_TOL * np.linalg.norm(m, 1)
        n_plus, _ = _ldl_counts(m, tol)
        _, n_minus = _ldl_counts(m, -tol)
        return Inertia(n_plus, n_minus, m.shape[0] - n_plus - n_minus, float("nan"), tol)
    raise ValueError(f"unknown inertia method {method!r}")


def signature(m, tol: Optional[float] = None, method: str = "eigh") -> int:
    """Signature ``n_plus - n_minus``, raising :class:`GapClosed` on zero modes."""
    inert = inertia(m, tol=tol, method=method)
    if inert.n_zero:
        raise GapClosed(f"{inert.n_zero} eigenvalues within {inert.tol:.3g} of zero",
                        gap=inert.min_abs_eig)
    return inert.signature


def half_signature(m, tol: Optional[float] = None, method: str = "eigh") -> int:
    """Half of the signature of an invertible self-adjoint matrix."""
    sig = signature(m, tol=tol, method=method)
    if sig % 2:
        raise OddSignature(f"signature {sig} is odd")
    return sig // 2


def spectral_gap(m) -> float:
    """Smallest eigenvalue modulus of a self-adjoint matrix."""
    m = _check_hermitian(m)
    return float(np.abs(np.linalg.eigvalsh(m)).min())


def is_real(m, tol: float = 1e-10) -> bool:
    return bool(np.abs(np.imag(m)).max(initial=0.0) <= tol)


def is_skew(m, tol: float = 1e-10) -> bool:
    return bool(np.abs(m + m.T).max(initial=0.0) <= tol)


def _parlett_reid(a, tol):
    """Skew tridiagonalization with pivoting.

    Returns ``(sign, log|Pf|)``.  Each step eliminates one column pair; a
    row/column swap flips the sign and the pivot ``a[k, k+1]`` multiplies the
    Pfaffian.
    """
    if np.isrealobj(a) and real_parlett_reid is not None:
        sign, logabs, step = real_parlett_reid(np.array(a, dtype=float, order="C"), float(tol))
        if step >= 0:
            raise NearSingular(f"pivot below tolerance at step {step}")
        return sign, logabs
    a = np.array(a, dtype=float if np.isrealobj(a) else complex, copy=True)
    n = a.shape[0]
    scale = np.abs(a).max(initial=0.0)
    sign = 1.0 + 0j if np.iscomplexobj(a) else 1.0
    logabs = 0.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], k:] = a[[kp, k + 1], k:]
            a[k:, [k + 1, kp]] = a[k:, [kp, k + 1]]
            sign = -sign
        pivot = a[k, k + 1]
        if abs(pivot) <= tol * max(scale, np.finfo(float).tiny):
            raise NearSingular(f"pivot {abs(pivot):.3g} at step {k // 2}")
        sign = sign * pivot / abs(pivot)
        logabs += np.log(abs(pivot))
        if k + 2 < n:
            tau = a[k, k + 2:] / pivot
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return sign, logabs


def _householder(a, tol):
    """Pfaffian via orthogonal (unitary) reduction to tridiagonal form."""
    if np.iscomplexobj(a):
        raise ValueError("householder route is implemented for real matrices")
    t, q = scipy.linalg.hessenberg(np.asarray(a, dtype=float), calc_q=True)
    sdet, _ = np.linalg.slogdet(q)
    sup = np.diag(t, 1)[::2]
    scale = np.abs(a).max(initial=0.0)
    if np.any(np.abs(sup) <= tol * scale):
        raise NearSingular("zero superdiagonal entry in tridiagonal form")
    # Pf(Q^T A Q) = det(Q) Pf(A)
    sign = sdet * np.prod(np.sign(sup))
    return sign, float(np.sum(np.log(np.abs(sup))))


def pfaffian_slogdet(a, tol: float = 1e-12, method: str = "parlett-reid"):
    """Sign (or phase) and log-modulus of the Pfaffian of a skew-symmetric matrix.

    Parameters
    ----------
    a : array_like
        Skew-symmetric (``a.T == -a``) square matrix of even size.
    tol : float
        Relative pivot threshold; smaller pivots raise :class:`NearSingular`.
    method : {"parlett-reid", "householder"}

    Returns
    -------
    sign : float or complex
    logabs : float
    """
    a = np.asarray(a)
    n = a.shape[0]
    if a.ndim != 2 or n != a.shape[1]:
        raise ValueError("matrix must be square")
    if n % 2:
        raise OddDimension(f"Pfaffian of odd dimension {n} vanishes")
    if not is_skew(a, 1e-10 * max(np.abs(a).max(initial=0.0), 1.0)):
        raise ValueError("matrix is not skew-symmetric")
    if n == 0:
        return 1.0, 0.0
    if method == "parlett-reid":
        return _parlett_reid(a, tol)
    if method == "householder":
        return _householder(a, tol)
    raise ValueError(f"unknown Pfaffian method {method!r}")


def pfaffian(a, tol: float = 1e-12, method: str = "parlett-reid"):
    """Pfaffian value (may overflow for large matrices; prefer :func:`pfaffian_slogdet`)."""
    sign, logabs = pfaffian_slogdet(a, tol=tol, method=method)
    return sign * np.exp(logabs)


def pfaffian_sign(a, tol: float = 1e-12, method: str = "parlett-reid") -> int:
    """Sign of the Pfaffian of a real skew-symmetric matrix.

    Raises
    ------
    OddDimension
        For odd size.
    NearSingular
        When a pivot falls below ``tol * max|a|``.
    """
    a = np.asarray(a)
    if np.iscomplexobj(a):
        if not is_real(a, 1e-10 * max(np.abs(a).max(initial=0.0), 1.0)):
            raise ValueError("Pfaffian sign requires a real matrix")
        a = a.real
    sign, _ = pfaffian_slogdet(a, tol=tol, method=method)
    return int(np.sign(sign))
