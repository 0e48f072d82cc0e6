"""Irreducible self-adjoint Clifford representations.

All generator lists are returned as lists of dense complex matrices.  Tensor
products are formed with :func:`numpy.kron`, the left factor being the slow
(outer) index.
"""
from functools import reduce

import numpy as np

from .errors import ConfigError

SIGMA0 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA1, SIGMA2, SIGMA3)


def _kron_all(factors):
    return reduce(np.kron, factors, np.eye(1, dtype=complex))


def clifford_dimension(n: int) -> int:
    """Dimension ``2**(n // 2)`` of the irreducible representation with n generators."""
    return 2 ** (n // 2)


def product_convention(n: int) -> complex:
    """Scalar that the ordered product of an odd number n of generators must equal.

    For ``n = 2k + 1`` this is ``i**k``; for n = d + 1 with d even this is
    the convention ``gamma_1 ... gamma_{d+1} = i**(d/2)``.
    """
    if n % 2 == 0:
        raise ConfigError("product convention only applies to an odd number of generators")
    return 1j ** ((n - 1) // 2)


def clifford_generators(n: int) -> list:
    """Irreducible self-adjoint representation of the Clifford algebra with n generators.

    Built from chains of ``sigma_3`` factors capped by ``sigma_1`` or
    ``sigma_2``.  For odd n the sign of the last generator is chosen so that
    the ordered product equals :func:`product_convention`.

    Parameters
    ----------
    n : int
        Number of generators, at least 1.

    Returns
    -------
    list of ndarray
        n matrices of size ``2**(n // 2)``.

    Examples
    --------
    >>> g = clifford_generators(3)
    >>> np.allclose(g[0] @ g[1] @ g[2], 1j * np.eye(2))
    True
    """
    if n < 1:
        raise ConfigError("need at least one generator")
    k = n // 2
    gens = []
    for j in range(k):
        head = [SIGMA3] * j
        tail = [SIGMA0] * (k - j - 1)
        gens.append(_kron_all(head + [SIGMA1] + tail))
        gens.append(_kron_all(head + [SIGMA2] + tail))
    if n % 2 == 1:
        last = _kron_all([SIGMA3] * k)
        gens.append(last)
        prod = reduce(np.matmul, gens)
        target = product_convention(n)
        if not np.allclose(prod, target * np.eye(prod.shape[0])):
            gens[-1] = -last
    return gens


def even_localizer_basis(d: int):
    """Generators entering the even periodic localizer.

    Returns ``gamma_1..gamma_{d-1}``, an irreducible representation with d-1
    generators, followed by ``gamma_d = i * 1``.

    Examples
    --------
    For d = 2 the set is ``[1]`` and ``[i]`` (1x1 matrices), so the
    off-diagonal block of the localizer is ``sin(pi X_1/rho) + i sin(pi X_2/rho)``.
    """
    if d < 2 or d % 2:
        raise ConfigError(f"even localizer needs an even dimension, got d={d}")
    gens = clifford_generators(d - 1)
    return gens + [1j * np.eye(gens[0].shape[0], dtype=complex)]


def split_basis(d: int) -> list:
    """Self-adjoint generators ``gamma_j (x) sigma_1``, ``1 (x) sigma_2``, ``1 (x) sigma_3``.

    The first d-1 generators are ``sigma_1 (x) g_j`` where ``g_1..g_{d-1}`` is
    :func:`clifford_generators` with d-1 generators (empty for d = 1),
    followed by ``sigma_2 (x) 1`` and ``sigma_3 (x) 1``.  The Pauli factor is
    the outer index, so the matrices are 2x2 block matrices.  In this basis
    the even localizer reads ``sum_j s_j G_j + K G_{d+1}``.

    Parameters
    ----------
    d : int
        Number of coordinate generators; d+1 matrices are returned.
    """
    if d < 1:
        raise ConfigError("d must be positive")
    inner = clifford_generators(d - 1) if d > 1 else []
    dim = inner[0].shape[0] if inner else 1
    one = np.eye(dim, dtype=complex)
    return [np.kron(SIGMA1, g) for g in inner] + [np.kron(SIGMA2, one), np.kron(SIGMA3, one)]


def odd_reduce_basis(n: int) -> list:
    """Generators for a fuzzy torus index set of odd size n, plus one extra grading.

    Returns n+2 matrices ``g_1 s1, .., g_{n-1} s1, 1 s2, g_n s1, 1 s3`` where
    ``g`` is :func:`clifford_generators` with n generators.  The first n+1 are
    used to build the G-operator and the last one anticommutes with it.
    """
    if n < 1 or n % 2 == 0:
        raise ConfigError("odd_reduce_basis needs an odd number of generators")
    inner = clifford_generators(n)
    one = np.eye(inner[0].shape[0], dtype=complex)
    gens = [np.kron(SIGMA1, g) for g in inner[:-1]]
    gens.append(np.kron(SIGMA2, one))
    gens.append(np.kron(SIGMA1, inner[-1]))
    gens.append(np.kron(SIGMA3, one))
    return gens


def check_clifford(gens, tol: float = 1e-12) -> float:
    """Largest deviation from self-adjointness and the anticommutation relations.

    Returns
    -------
    float
        ``max ||g_i g_j + g_j g_i - 2 delta_ij|| `` together with ``||g - g*||``.
    """
    err = 0.0
    eye = np.eye(gens[0].shape[0])
    for i, a in enumerate(gens):
        err = max(err, np.abs(a - a.conj().T).max())
        for j, b in enumerate(gens[i:], start=i):
            target = 2 * eye if i == j else 0 * eye
            err = max(err, np.abs(a @ b + b @ a - target).max())
    return err
