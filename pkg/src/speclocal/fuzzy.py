"""Fuzzy tori, their G-operators and the determinant-path winding.

A fuzzy d-torus is a list of invertible matrices that are almost unitary and
almost commute.  A graded torus carries one further self-adjoint element
that is close to a symmetry.  Invariants are read from signatures of the
self-adjoint G-operators built with Clifford generators; the Clifford factor
is the outer tensor index throughout.
"""
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .clifford import clifford_generators, odd_reduce_basis, split_basis
from .errors import (ConfigError, DetVanishes, GradedGapClosed, GridTooCoarse, NotSelfAdjoint,
                     NotUnitary, WidthTooLarge)
from .inertia import signature, spectral_gap
from .lattice import FiniteVolumeOperator
from .localizer import _coords


def re_part(a: np.ndarray) -> np.ndarray:
    """Hermitian real part ``(A + A^*) / 2``."""
    return 0.5 * (a + a.conj().T)


def im_part(a: np.ndarray) -> np.ndarray:
    """Hermitian imaginary part ``(A - A^*) / 2i``."""
    return (a - a.conj().T) / 2j


def _opnorm(a) -> float:
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


@dataclass
class FuzzyTorus:
    """Invertible matrices ``ops`` with an optional self-adjoint graded element.

    Attributes
    ----------
    ops : list of ndarray
        The ungraded elements ``A_1, .., A_d``.
    graded : ndarray, optional
        Self-adjoint element ``A_{d+1}``.
    """

    ops: list
    graded: Optional[np.ndarray] = None
    _width: Optional[float] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.ops = [np.asarray(a, dtype=complex) for a in self.ops]
        if not self.ops:
            raise ConfigError("a fuzzy torus needs at least one element")
        n = self.ops[0].shape[0]
        for a in self.ops:
            if a.shape != (n, n):
                raise ConfigError("torus elements must be square matrices of equal size")
            if np.linalg.svd(a, compute_uv=False).min() <= 1e-10:
                raise ConfigError("torus elements must be invertible")
        if self.graded is not None:
            self.graded = np.asarray(self.graded, dtype=complex)
            if self.graded.shape != (n, n):
                raise ConfigError("graded element has the wrong size")
            if _opnorm(self.graded - self.graded.conj().T) >= 1e-10:
                raise NotSelfAdjoint("graded element must be self-adjoint")

    @property
    def d(self) -> int:
        return len(self.ops)

    @property
    def size(self) -> int:
        return self.ops[0].shape[0]

    @property
    def is_graded(self) -> bool:
        return self.graded is not None

    @property
    def width(self) -> float:
        if self._width is None:
            self._width = torus_width(self)
        return self._width


def torus_width(t: FuzzyTorus) -> float:
    """Smallest ``delta`` such that ``t`` is a fuzzy torus of width ``delta``.

    Takes the maximum of ``||A A^* - 1||``, ``||A^* A - 1||`` over the
    ungraded elements, ``||A_{d+1}^2 - 1||`` for the graded one, and all
    pairwise commutator norms including the graded element.
    """
    one = np.eye(t.size)
    values = [0.0]
    for a in t.ops:
        values.append(_opnorm(a @ a.conj().T - one))
        values.append(_opnorm(a.conj().T @ a - one))
    elements = list(t.ops)
    if t.graded is not None:
        values.append(_opnorm(t.graded @ t.graded - one))
        elements.append(t.graded)
    for i in range(len(elements)):
        for j in range(i):
            values.append(_opnorm(elements[i] @ elements[j] - elements[j] @ elements[i]))
    return max(values)


def _subset(t, index):
    index = tuple(index) if index is not None else tuple(range(1, t.d + 1))
    if not index:
        raise ConfigError("index set must be nonempty")
    if len(set(index)) != len(index) or min(index) < 1 or max(index) > t.d:
        raise ConfigError(f"index set {index} is not a subset of 1..{t.d}")
    return [t.ops[i - 1] for i in index]


def _assemble(ops, constant, extra, gammas):
    n = len(ops)
    if gammas is None:
        gammas = split_basis(n)
    if len(gammas) < n + 1:
        raise ConfigError(f"need {n + 1} Clifford generators, got {len(gammas)}")
    one = np.eye(ops[0].shape[0])
    out = sum(np.kron(gammas[j], im_part(a)) for j, a in enumerate(ops))
    last = constant * one - sum(re_part(a) for a in ops)
    if extra is not None:
        last = last - extra
    return out + np.kron(gammas[n], last)


def g_operator(t: FuzzyTorus, index: Optional[Sequence[int]] = None, gammas=None) -> np.ndarray:
    """Self-adjoint G-operator of the elements selected by ``index`` (1-based).

    ``G_I = sum_j Im(A_{i_j}) g_j + ((|I| - 1) - sum_j Re(A_{i_j})) g_{|I|+1}``
    with generators ``gammas`` (default :func:`split_basis` of ``|I|``).

    Examples
    --------
    >>> t = FuzzyTorus([np.eye(2), np.eye(2)])
    >>> signature(g_operator(t))
    0
    """
    ops = _subset(t, index)
    return _assemble(ops, len(ops) - 1, None, gammas)


def g_hat_operator(t: FuzzyTorus, index: Optional[Sequence[int]] = None, gammas=None) -> np.ndarray:
    """G-operator of a graded torus.

    ``G^_I = sum_j Im(A_{i_j}) g_j + (|I| - sum_j Re(A_{i_j}) - A_{d+1}) g_{|I|+1}``.
    For the torus of :func:`periodic_torus` this is the even periodic localizer.
    """
    if t.graded is None:
        raise ConfigError("g_hat_operator needs a graded torus")
    ops = _subset(t, index)
    return _assemble(ops, len(ops), t.graded, gammas)


def odd_reduced_g(t: FuzzyTorus, index: Sequence[int]):
    """G-operator of a graded torus viewed as a torus with the graded element appended.

    ``index`` selects an even number of ungraded elements; together with the
    graded element the set has odd size n and the n+1 generators of
    :func:`odd_reduce_basis` are used.  Returns ``(G, extra, G_hat)`` where
    ``extra`` anticommutes with ``G`` and ``G = [[0, G_hat], [G_hat, 0]]``.
    """
    if t.graded is None:
        raise ConfigError("odd reduction needs a graded torus")
    ops = _subset(t, index)
    n = len(ops) + 1
    gens = odd_reduce_basis(n)
    one = np.eye(t.size)
    full = ops + [t.graded]
    g = sum(np.kron(gens[j], im_part(a)) for j, a in enumerate(full))
    g = g + np.kron(gens[n], (n - 1) * one - sum(re_part(a) for a in full))
    g_hat = _assemble(ops, len(ops), t.graded, clifford_generators(n))
    return g, np.kron(gens[n + 1], one), g_hat


def reduce_graded(t: FuzzyTorus, width_factor: float = 6.0) -> FuzzyTorus:
    """Compress the ungraded elements to the positive spectral subspace of the graded one.

    Returns the ungraded torus ``P A_1 P, .., P A_d P`` on ``range(P)`` with
    ``P = chi(A_{d+1} > 0)``, expressed in an orthonormal eigenbasis.

    Raises
    ------
    GradedGapClosed
        If the graded element has spectrum in ``(-sqrt(1 - delta), sqrt(1 - delta))``
        (or a zero eigenvalue when ``delta >= 1``).

    Warns
    -----
    RuntimeWarning
        If the reduced width exceeds ``width_factor`` times the input width.
    """
    if t.graded is None:
        raise ConfigError("reduce_graded needs a graded torus")
    w, v = np.linalg.eigh(t.graded)
    delta = t.width
    threshold = np.sqrt(1 - delta) if delta < 1 else 1e-10
    gap = np.abs(w).min()
    if gap < threshold * (1 - 1e-9):
        raise GradedGapClosed(f"graded element has eigenvalue {gap:.3g} below {threshold:.3g}", gap)
    basis = v[:, w > 0]
    if basis.shape[1] == 0:
        raise GradedGapClosed("graded element has no positive spectrum", gap)
    out = FuzzyTorus([basis.conj().T @ a @ basis for a in t.ops])
    if out.width > width_factor * delta + 1e-12:
        warnings.warn(f"reduced width {out.width:.3g} exceeds {width_factor} x {delta:.3g}",
                      RuntimeWarning, stacklevel=2)
    return out


def gap_bound_unitary(t: FuzzyTorus, tol: float = 1e-10) -> float:
    """Lower bound ``1 - 7 sum_{j<i} ||[U_j, U_i]||`` for ``G^2`` of a unitary torus."""
    one = np.eye(t.size)
    for a in t.ops:
        if _opnorm(a @ a.conj().T - one) > tol:
            raise NotUnitary("gap_bound_unitary needs unitary elements")
    total = 0.0
    for i in range(t.d):
        for j in range(i):
            total += _opnorm(t.ops[i] @ t.ops[j] - t.ops[j] @ t.ops[i])
    return 1.0 - 7.0 * total


def gap_bound_invertible(t: FuzzyTorus) -> float:
    """Lower bound ``1 - 24 d^2 delta`` for ``G^2``; requires width at most 1/2."""
    if t.width > 0.5:
        raise WidthTooLarge(f"width {t.width:.3g} exceeds 1/2")
    return 1.0 - 24.0 * t.d ** 2 * t.width


def trivial_homotopy_gap(t: FuzzyTorus, steps: int = 21) -> float:
    """Smallest spectral gap on the straight line from ``g_{d+1}`` to the shifted G-operator.

    The end point uses the constant ``d + 1`` in place of ``d - 1``.  Returns
    0 when the gap closes on the sampled path.
    """
    gammas = split_basis(t.d)
    target = _assemble(t.ops, t.d + 1, None, gammas)
    start = np.kron(gammas[t.d], np.eye(t.size))
    best = np.inf
    for s in np.linspace(0.0, 1.0, steps):
        best = min(best, spectral_gap((1 - s) * start + s * target))
    return float(best)


def clock_shift(n: int):
    """Clock and shift unitaries with ``U_1 U_2 = exp(2 pi i / n) U_2 U_1``.

    Examples
    --------
    >>> u1, u2 = clock_shift(3)
    >>> w = np.exp(2j * np.pi / 3)
    >>> np.allclose(u1 @ u2, w * u2 @ u1)
    True
    """
    if n < 2:
        raise ConfigError("clock and shift need n >= 2")
    u1 = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    u2 = np.roll(np.eye(n, dtype=complex), 1, axis=0)
    return u1, u2


def _det_phase(m):
    sign, logabs = np.linalg.slogdet(m)
    return np.angle(sign), logabs


def det_path_winding(u1: np.ndarray, u2: np.ndarray, grid: int = 64, max_grid: int = 10 ** 6) -> int:
    """Winding number of ``t -> det((1 - t) U_2 U_1 + t U_1 U_2)``, ``t in [0, 1]``.

    The path is a closed loop whenever ``det(U_1 U_2) = det(U_2 U_1)``.  The
    argument is accumulated on a uniform grid, doubled until every step
    changes the argument by less than ``pi / 2``.  The orientation is fixed
    so that the result equals ``Sig(G) / 2`` of the torus ``(U_1, U_2)``.

    Raises
    ------
    DetVanishes
        If ``|det| < 1e-12`` on the grid.
    GridTooCoarse
        If no grid up to ``max_grid`` points resolves the argument.
    """
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    start, end = u2 @ u1, u1 @ u2
    p0, _ = _det_phase(start)
    p1, _ = _det_phase(end)
    if abs(np.angle(np.exp(1j * (p1 - p0)))) > 1e-8:
        raise ConfigError("determinant path is not closed")
    n = grid
    while n <= max_grid:
        ts = np.linspace(0.0, 1.0, n + 1)
        mats = (1 - ts)[:, None, None] * start + ts[:, None, None] * end
        phases, logabs = _det_phase(mats)
        if np.any(logabs < np.log(1e-12)):
            raise DetVanishes("determinant vanishes along the path")
        steps = np.angle(np.exp(1j * np.diff(phases)))
        if np.all(np.abs(steps) < np.pi / 2):
            return int(np.rint(steps.sum() / (2 * np.pi)))
        n *= 2
    raise GridTooCoarse("argument of the determinant path is not resolved")


def periodic_torus(h: FiniteVolumeOperator, eta: float = 1.0, flatten: bool = False) -> FuzzyTorus:
    """Graded torus ``exp(i pi X_1 / rho), .., exp(i pi X_d / rho), H / eta``.

    With ``flatten`` the graded element is ``sgn(H)`` and ``eta`` is ignored.
    """
    x = _coords(h.d, h.rho, h.L)
    ops = [np.diag(np.exp(1j * np.pi * x[:, j] / h.rho)) for j in range(h.d)]
    mat = h.dense()
    if flatten:
        w, v = np.linalg.eigh(mat)
        if np.abs(w).min() < 1e-12:
            raise GradedGapClosed("Hamiltonian has a zero mode", float(np.abs(w).min()))
        graded = (v * np.sign(w)) @ v.conj().T
    else:
        graded = mat / eta
    return FuzzyTorus(ops, 0.5 * (graded + graded.conj().T))


__all__ = [
    "FuzzyTorus", "torus_width", "re_part", "im_part", "g_operator", "g_hat_operator",
    "odd_reduced_g", "reduce_graded", "gap_bound_unitary", "gap_bound_invertible",
    "trivial_homotopy_gap", "clock_shift", "det_path_winding", "periodic_torus",
]
