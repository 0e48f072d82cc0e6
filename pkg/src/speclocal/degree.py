"""Mapping degree of the torus-to-sphere maps and lattice Chern numbers.

The maps are ``g_{d,m}(theta) = (sin theta_1, .., sin theta_d, m - sum_n cos theta_n)``
and their normalizations ``f = g / |g|``.  Degrees are counted with the
orientations induced by the stereographic sphere charts and the circle
charts ``x = cos(theta) / (1 - sin(theta))`` used below.
"""
import itertools
from math import comb

import numpy as np

from .clifford import clifford_generators
from .errors import ConfigError, GridTooCoarse, MassAtTransition
from .lattice import TranslationInvariantOperator


def _check_mass(d, m):
    if d < 1:
        raise ConfigError("d must be positive")
    if np.isclose(m, np.round(m)) and abs(round(m)) <= d and (round(m) - d) % 2 == 0:
        raise MassAtTransition(f"m={m} is a transition mass for d={d}")


def g_map(d: int, m: float, theta) -> np.ndarray:
    """Unnormalized map ``T^d -> R^{d+1}``; ``theta`` has shape ``(..., d)``."""
    theta = np.asarray(theta, dtype=float)
    last = m - np.sum(np.cos(theta), axis=-1)
    return np.concatenate([np.sin(theta), last[..., None]], axis=-1)


def f_map(d: int, m: float, theta) -> np.ndarray:
    """Normalized map ``T^d -> S^d``.

    Raises
    ------
    MassAtTransition
        If ``m`` is one of ``-d, -d+2, .., d`` where ``g`` has zeros.
    """
    _check_mass(d, m)
    g = g_map(d, m, theta)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def degree_closed_form(d: int, m: float) -> int:
    """Closed-form degree of ``f_{d,m}`` for even d.

    For odd n in ``(0, d+1)`` and ``m`` in ``(n-1, n+1)`` the degree is
    ``sum_{k=0}^{(d-n-1)/2} (-1)^k C(d, k)``; for ``m`` in ``(-n-1, -n+1)``
    it is minus that; for ``|m| > d`` it is zero.

    Examples
    --------
    >>> [degree_closed_form(2, m) for m in (1, -1, 3)]
    [1, -1, 0]
    >>> [degree_closed_form(4, m) for m in (1, 3, -1, -3)]
    [-3, 1, 3, -1]
    """
    if d % 2:
        raise ConfigError("closed form is stated for even d")
    _check_mass(d, m)
    if abs(m) > d:
        return 0
    n = int(np.floor(abs(m)))
    if n % 2 == 0:
        n += 1
    value = sum((-1) ** k * comb(d, k) for k in range((d - n - 1) // 2 + 1))
    return value if m > 0 else -value


def _torus_chart_inverse(x):
    # inverse of x = cos(t) / (1 - sin(t)) = tan(t/2 + pi/4)
    return 2 * np.arctan(x) - np.pi / 2


def _sphere_chart(point, north):
    """Stereographic charts; the south chart swaps the first two coordinates."""
    d = point.shape[-1] - 1
    if north:
        # defined away from the north pole, used around the south pole
        return point[..., :d] / (1 - point[..., d:])
    y = point[..., :d] / (1 + point[..., d:])
    if d >= 2:
        y = y.copy()
        y[..., [0, 1]] = y[..., [1, 0]]
    return y


def degree_preimage(d: int, m: float, step: float = 1e-6) -> int:
    """Degree of ``f_{d,m}`` by summing local orientation signs over pole preimages.

    For ``m > 0`` the preimages of the south pole are counted, for ``m < 0``
    those of the north pole.  Candidate points are the corners
    ``theta in {0, pi}^d``; each genuine preimage contributes the sign of the
    Jacobian determinant of ``chart o f o chart^{-1}``, computed by central
    differences.
    """
    _check_mass(d, m)
    use_south = m > 0
    pole = np.zeros(d + 1)
    pole[d] = -1.0 if use_south else 1.0
    total = 0
    for corner in itertools.product((0.0, np.pi), repeat=d):
        theta = np.array(corner)
        if np.linalg.norm(f_map(d, m, theta) - pole) > 1e-9:
            continue
        x0 = np.cos(theta) / (1 - np.sin(theta))

        def local(x):
            return _sphere_chart(f_map(d, m, _torus_chart_inverse(x)), north=use_south)

        jac = np.empty((d, d))
        for j in range(d):
            e = np.zeros(d)
            e[j] = step
            jac[:, j] = (local(x0 + e) - local(x0 - e)) / (2 * step)
        total += int(np.sign(np.linalg.det(jac)))
    return total


def weyl_projection(d: int, m: float, theta, gammas=None) -> np.ndarray:
    """Projection ``P_f = (sum_j f_j gamma_j + 1) / 2`` at one or several momenta."""
    gammas = clifford_generators(d + 1) if gammas is None else gammas
    f = f_map(d, m, theta)
    mat = np.tensordot(f, np.stack(gammas), axes=([-1], [0]))
    return 0.5 * (mat + np.eye(gammas[0].shape[0]))


def dirac_model(d: int, m: float, gammas=None) -> TranslationInvariantOperator:
    """Lattice Dirac Hamiltonian with symbol ``sum_j sin(k_j) g_j + (m - sum_j cos k_j) g_{d+1}``.

    Uses ``sin k = (e^{ik} - e^{-ik}) / 2i``, so ``T_{+-e_j} = -g_{d+1}/2 -+ i g_j / 2``
    and ``T_0 = m g_{d+1}``.
    """
    gammas = clifford_generators(d + 1) if gammas is None else gammas
    size = gammas[0].shape[0]
    hops = {tuple([0] * d): m * gammas[d]}
    for j in range(d):
        for sgn in (1, -1):
            a = [0] * d
            a[j] = sgn
            hops[tuple(a)] = -0.5 * gammas[d] + sgn * gammas[j] / 2j
    return TranslationInvariantOperator(d, size, hops)


def _frames(projections):
    w, v = np.linalg.eigh(projections)
    rank = int(np.rint(np.sum(w[(0,) * (w.ndim - 1)] > 0.5)))
    if np.any(np.abs(w[..., -rank:] - 1) > 1e-6) or np.any(np.abs(w[..., :-rank]) > 1e-6):
        raise ConfigError("input is not a projection family of constant rank")
    return v[..., -rank:]


def chern_fhs(projection, n: int = 48, tol: float = 1e-6, max_n: int = 384) -> int:
    """Chern number of a smooth projection family on the 2-torus.

    Uses the gauge-invariant plaquette phases of Fukui, Hatsugai and Suzuki
    on an ``n x n`` grid, normalized as ``Ch_2(P) = -(1 / 2 pi i) int Tr(P dP ^ dP)``.
    The grid is doubled until the raw sum lies within ``tol`` of an integer.

    Parameters
    ----------
    projection : callable
        Maps an array of momenta of shape ``(N, 2)`` to projections ``(N, n, n)``.

    Raises
    ------
    GridTooCoarse
        If no grid up to ``max_n`` gives a near-integer result.
    """
    while n <= max_n:
        axis = 2 * np.pi * np.arange(n) / n
        k1, k2 = np.meshgrid(axis, axis, indexing="ij")
        ks = np.stack([k1.ravel(), k2.ravel()], axis=1)
        flat = _frames(projection(ks))
        frames = flat.reshape(n, n, flat.shape[-2], flat.shape[-1])

        def link(a, b):
            return np.linalg.det(np.einsum("xyia,xyib->xyab", a.conj(), b))

        f1 = np.roll(frames, -1, axis=0)
        f2 = np.roll(frames, -1, axis=1)
        f12 = np.roll(f1, -1, axis=1)
        plaquette = link(frames, f1) * link(f1, f12) / (link(f2, f12) * link(frames, f2))
        raw = -np.sum(np.angle(plaquette)) / (2 * np.pi)
        if abs(raw - np.rint(raw)) < tol:
            return int(np.rint(raw))
        n *= 2
    raise GridTooCoarse("FHS sum did not approach an integer")


def fermi_projection(op: TranslationInvariantOperator):
    """Vectorized ``k -> chi(H(k) < 0)`` suitable for :func:`chern_fhs`."""
    def proj(ks):
        w, v = np.linalg.eigh(op.bloch_fiber(ks))
        occ = v * (w < 0)[:, None, :]
        return occ @ v.conj().transpose(0, 2, 1)
    return proj
