"""Translation-invariant lattice operators and their finite-volume restrictions.

Conventions
-----------
A translation-invariant operator on ``l^2(Z^d, C^L)`` is stored by its hopping
matrices ``T_a`` with ``<x|H|y> = T_{y-x}``, so that ``(H psi)(x) = sum_a T_a
psi(x+a)`` and the Bloch fiber is ``H(k) = sum_a T_a exp(i k.a)``.
Self-adjointness reads ``T_{-a} = T_a^*``.

Finite volumes are the boxes ``{-rho+1, ..., rho}^d``.  Sites are ordered
lexicographically (first coordinate slowest) and the orbital index runs
fastest, so the basis index of ``(x, l)`` is ``site_index(x) * L + l``.
"""
import itertools
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .errors import ConfigError, GapClosed, GridTooCoarse, NotSelfAdjoint

BOUNDARIES = ("periodic", "dirichlet", "diagonal")


def lattice_sites(d: int, rho: int) -> np.ndarray:
    """Sites of the box ``{-rho+1..rho}^d`` in lexicographic order, shape ``((2 rho)^d, d)``."""
    if rho < 1:
        raise ConfigError("rho must be a positive integer")
    axis = np.arange(-rho + 1, rho + 1)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _site_index(coords, rho):
    """Lexicographic index of wrapped coordinates (rows of ``coords``)."""
    shifted = coords + rho - 1
    idx = np.zeros(coords.shape[0], dtype=np.int64)
    for j in range(coords.shape[1]):
        idx = idx * (2 * rho) + shifted[:, j]
    return idx


@dataclass(frozen=True)
class TranslationInvariantOperator:
    """Finite-range self-adjoint operator given by hopping matrices.

    Parameters
    ----------
    d : int
        Lattice dimension.
    L : int
        Number of orbitals per site.
    hoppings : dict
        Maps displacement tuples ``a`` to ``L x L`` matrices ``T_a``.
    """

    d: int
    L: int
    hoppings: Dict[Tuple[int, ...], np.ndarray] = field(repr=False)

    def __post_init__(self):
        clean = {}
        for a, t in self.hoppings.items():
            a = tuple(int(v) for v in a)
            t = np.asarray(t, dtype=complex)
            if len(a) != self.d:
                raise ConfigError(f"displacement {a} does not have length d={self.d}")
            if t.shape != (self.L, self.L):
                raise ConfigError(f"hopping {a} has shape {t.shape}, expected {(self.L, self.L)}")
            clean[a] = clean.get(a, 0) + t
        for a, t in clean.items():
            back = clean.get(tuple(-v for v in a), np.zeros_like(t))
            if not np.allclose(back, t.conj().T, atol=1e-12):
                raise NotSelfAdjoint(f"T_{{-a}} != T_a^* for a={a}")
        object.__setattr__(self, "hoppings", clean)

    @property
    def range(self) -> int:
        """Largest sup-norm of a displacement with nonzero hopping."""
        return max((max(abs(v) for v in a) for a, t in self.hoppings.items()
                    if np.any(t != 0)), default=0)

    def bloch_fiber(self, k) -> np.ndarray:
        """``H(k) = sum_a T_a exp(i k.a)`` for a single momentum or a stack of momenta.

        ``k`` of shape ``(d,)`` returns ``(L, L)``; shape ``(n, d)`` returns
        ``(n, L, L)``.
        """
        k = np.asarray(k, dtype=float)
        single = k.ndim == 1
        k = np.atleast_2d(k)
        out = np.zeros((k.shape[0], self.L, self.L), dtype=complex)
        for a, t in self.hoppings.items():
            out += np.exp(1j * (k @ np.asarray(a, dtype=float)))[:, None, None] * t
        return out[0] if single else out

    def position_commutator(self, j: int) -> "TranslationInvariantOperator":
        """The operator ``[X_j, H]``, multiplied by ``i`` so that it stays self-adjoint."""
        hops = {a: -1j * a[j] * t for a, t in self.hoppings.items()}
        return TranslationInvariantOperator(self.d, self.L, hops)

    def norm(self, **kwargs) -> float:
        """Operator norm ``sup_k ||H(k)||`` (see :func:`torus_sup`)."""
        return torus_sup(lambda ks: np.abs(np.linalg.eigvalsh(self.bloch_fiber(ks))).max(axis=1),
                         self.d, **kwargs)

    def gap(self, **kwargs) -> float:
        """Distance from 0 to the spectrum, ``inf_k min |spec H(k)|``."""
        return -torus_sup(lambda ks: -np.abs(np.linalg.eigvalsh(self.bloch_fiber(ks))).min(axis=1),
                          self.d, **kwargs)

    def commutator_norm(self, j: Optional[int] = None, **kwargs) -> float:
        """``||[X_j, H]||``, or the maximum over j when ``j`` is None."""
        if j is None:
            return max(self.commutator_norm(i, **kwargs) for i in range(self.d))
        return self.position_commutator(j).norm(**kwargs)


def torus_sup(func, d: int, n0: int = 16, tol: float = 1e-8, max_points: int = 2 ** 20,
              polish: int = 4) -> float:
    """Supremum of a vectorized function on the torus ``[0, 2 pi)^d``.

    The function is sampled on grids of ``n^d`` points with n doubling from
    ``n0``; the best few grid points are polished with a local optimizer.
    Iteration stops when two successive estimates agree to ``tol``.

    Raises
    ------
    GridTooCoarse
        If the grid would exceed ``max_points`` before convergence.
    """
    def scalar(k):
        return -float(func(np.asarray(k, dtype=float)[None, :])[0])

    previous = None
    n = n0
    while n ** d <= max_points:
        axis = 2 * np.pi * np.arange(n) / n
        ks = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
        vals = np.asarray(func(ks), dtype=float)
        best = vals.max()
        for i in np.argsort(vals)[-polish:]:
            res = scipy.optimize.minimize(scalar, ks[i], method="Nelder-Mead",
                                          options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
            best = max(best, -res.fun)
        if previous is not None and abs(best - previous) < tol:
            return max(best, previous)
        previous = best
        n *= 2
    raise GridTooCoarse(f"torus supremum did not converge within {max_points} grid points")


@dataclass(frozen=True)
class FiniteVolumeOperator:
    """Matrix acting on ``l^2({-rho+1..rho}^d, C^L)``.

    ``matrix`` is a dense array or a scipy sparse matrix of size
    ``(2 rho)^d L``.  ``boundary`` records how it was produced.
    """

    d: int
    L: int
    rho: int
    boundary: str
    matrix: object = field(repr=False)

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        n = self.dim
        if self.matrix.shape != (n, n):
            raise ConfigError(f"matrix shape {self.matrix.shape} does not match dimension {n}")

    @property
    def n_sites(self) -> int:
        return (2 * self.rho) ** self.d

    @property
    def dim(self) -> int:
        return self.n_sites * self.L

    @property
    def sites(self) -> np.ndarray:
        return lattice_sites(self.d, self.rho)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def with_matrix(self, matrix, boundary: Optional[str] = None) -> "FiniteVolumeOperator":
        return FiniteVolumeOperator(self.d, self.L, self.rho, boundary or self.boundary, matrix)

    def site_values(self, values) -> np.ndarray:
        """Expand per-site values to the full basis (orbital index fastest)."""
        return np.repeat(np.asarray(values), self.L)


def _restrict(op, rho, periodic, sparse, twist=None):
    d, L = op.d, op.L
    sites = lattice_sites(d, rho)
    n = sites.shape[0]
    rows, cols, vals = [], [], []
    orb_r, orb_c = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    for a, t in op.hoppings.items():
        if not np.any(t):
            continue
        target = sites + np.asarray(a)
        phase = None
        if periodic:
            wrapped = np.mod(target + rho - 1, 2 * rho) - rho + 1
            if twist is not None:
                phase = np.exp(1j * ((target - wrapped) // (2 * rho)) @ np.asarray(twist, dtype=float))
            target = wrapped
            keep = np.arange(n)
        else:
            keep = np.nonzero(np.all((target > -rho) & (target <= rho), axis=1))[0]
        tgt = _site_index(target[keep], rho)
        r = (keep[:, None, None] * L + orb_r[None]).ravel()
        c = (tgt[:, None, None] * L + orb_c[None]).ravel()
        rows.append(r)
        cols.append(c)
        block = np.broadcast_to(t, (len(keep), L, L))
        if phase is not None:
            block = block * phase[:, None, None]
        vals.append(block.ravel())
    dim = n * L
    if rows:
        mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                            shape=(dim, dim)).tocsr()
    else:
        mat = sp.csr_matrix((dim, dim), dtype=complex)
    return mat if sparse else mat.toarray()


def periodic_restriction(op: TranslationInvariantOperator, rho: int, sparse: bool = False,
                         twist=None) -> FiniteVolumeOperator:
    """Periodic restriction ``<x|H^per|y> = sum_a <x|H|y + 2 rho a>``.

    All hoppings are wrapped onto the torus ``(Z / 2 rho Z)^d``; contributions
    landing on the same matrix entry are summed.  A warning is issued when
    ``2 rho <= R`` because hoppings then wrap more than once.  With a Bloch
    ``twist`` (one angle per axis) the term with wrap vector ``a`` carries
    the phase ``exp(i twist . a)``.

    Examples
    --------
    Nearest-neighbour hopping on 4 sites gets the wrap-around entry:

    >>> op = TranslationInvariantOperator(1, 1, {(1,): [[1]], (-1,): [[1]]})
    >>> periodic_restriction(op, 2).matrix[3, 0].real
    1.0
    """
    if 2 * rho <= op.range:
        warnings.warn(f"2*rho={2 * rho} does not exceed the hopping range {op.range}", stacklevel=2)
    return FiniteVolumeOperator(op.d, op.L, rho, "periodic", _restrict(op, rho, True, sparse, twist))


def dirichlet_restriction(op: TranslationInvariantOperator, rho: int,
                          sparse: bool = False) -> FiniteVolumeOperator:
    """Compression of ``op`` to the box, hoppings leaving the box are dropped."""
    return FiniteVolumeOperator(op.d, op.L, rho, "dirichlet", _restrict(op, rho, False, sparse))


def taper_switch(x):
    """``chi(x) = x (2 - |x|)`` on ``[-1, 1]`` and ``sign(x)`` outside."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1, x * (2 - np.abs(x)), np.sign(x))


def taper_function(x):
    """Smooth bump ``G(x) = (chi(4x + 3) - chi(4x - 3)) / 2``.

    ``G = 1`` for ``|x| <= 1/2`` and ``G = 0`` for ``|x| >= 1``.
    """
    x = np.asarray(x, dtype=float)
    return 0.5 * (taper_switch(4 * x + 3) - taper_switch(4 * x - 3))


PROFILES = ("x", "sin", "cos", "one_minus_cos", "xi", "abs_xi", "radial", "taper")


def position_values(profile: str, d: int, rho: int, axis: Optional[int] = None,
                    scale: Optional[float] = None) -> np.ndarray:
    """Per-site values of a position function on the box.

    Parameters
    ----------
    profile : str
        One of ``"x"``, ``"sin"`` (``sin(pi x_j / rho)``), ``"cos"``,
        ``"one_minus_cos"``, ``"xi"`` (``sin(pi x_j / (2 rho))``), ``"abs_xi"``,
        ``"radial"`` (``|x|`` Euclidean) and ``"taper"`` (``G(|x| / scale)``,
        ``scale`` defaulting to ``rho``).
    axis : int, optional
        Coordinate index for the coordinate-wise profiles.

    Returns
    -------
    ndarray of shape ``((2 rho)^d,)``
    """
    sites = lattice_sites(d, rho).astype(float)
    if profile in ("radial", "taper"):
        r = np.sqrt(np.sum(sites ** 2, axis=1))
        if profile == "radial":
            return r
        return taper_function(r / (rho if scale is None else scale))
    if profile not in PROFILES:
        raise ConfigError(f"unknown position profile {profile!r}")
    if axis is None or not 0 <= axis < d:
        raise ConfigError(f"profile {profile!r} needs an axis in [0, {d})")
    x = sites[:, axis]
    if profile == "x":
        return x
    if profile == "sin":
        return np.sin(np.pi * x / rho)
    if profile == "cos":
        return np.cos(np.pi * x / rho)
    if profile == "one_minus_cos":
        return 1 - np.cos(np.pi * x / rho)
    xi = np.sin(np.pi * x / (2 * rho))
    return xi if profile == "xi" else np.abs(xi)


def position_function(profile: str, d: int, L: int, rho: int, axis: Optional[int] = None,
                      scale: Optional[float] = None) -> FiniteVolumeOperator:
    """Diagonal operator of a position function, see :func:`position_values`."""
    vals = np.repeat(position_values(profile, d, rho, axis=axis, scale=scale), L)
    return FiniteVolumeOperator(d, L, rho, "diagonal", np.diag(vals.astype(complex)))


def taper_matrix_elements(h: FiniteVolumeOperator, s: float) -> FiniteVolumeOperator:
    """Zero all rows and columns of sites with ``|x| > (1 - s) rho``.

    ``|x|`` is the Euclidean norm of the site.  The result has a kernel of
    dimension at least L times the number of removed sites.
    """
    if not 0 <= s <= 1:
        raise ConfigError("taper fraction s must lie in [0, 1]")
    r = np.sqrt(np.sum(h.sites.astype(float) ** 2, axis=1))
    keep = h.site_values((r <= (1 - s) * h.rho).astype(float))
    if h.is_sparse:
        dk = sp.diags(keep)
        mat = dk @ h.matrix @ dk
    else:
        mat = keep[:, None] * h.dense() * keep[None, :]
    return h.with_matrix(mat)


def commutator_norm(a, b) -> float:
    """Spectral norm of ``AB - BA``.

    Examples
    --------
    >>> from speclocal.clifford import SIGMA1, SIGMA2
    >>> round(commutator_norm(SIGMA1, SIGMA2), 12)
    2.0
    """
    a = a.toarray() if sp.issparse(a) else np.asarray(a)
    b = b.toarray() if sp.issparse(b) else np.asarray(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ConfigError("commutator needs square matrices of equal shape")
    return float(np.linalg.norm(a @ b - b @ a, 2))


@dataclass(frozen=True)
class OperatorStats:
    """``||H||``, the gap ``g = ||H^-1||^-1`` and ``M = max_j ||[X_j, H]||``."""

    norm: float
    gap: float
    hopping_bound: float
    d: int
    L: int


def operator_stats(op: TranslationInvariantOperator, **kwargs) -> OperatorStats:
    """Norm, gap and commutator bound of a translation-invariant Hamiltonian.

    Raises
    ------
    GapClosed
        If the gap is below ``1e-10``.
    """
    gap = op.gap(**kwargs)
    if gap < 1e-10:
        raise GapClosed(f"operator is not gapped at zero (gap {gap:.3g})", gap)
    return OperatorStats(op.norm(**kwargs), gap, op.commutator_norm(**kwargs), op.d, op.L)


def bloch_momenta(d: int, rho: int) -> np.ndarray:
    """Momenta ``(pi / rho) n`` for ``n`` in ``{0..2 rho - 1}^d``."""
    axis = np.pi * np.arange(2 * rho) / rho
    return np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)


def bloch_spectrum(op: TranslationInvariantOperator, rho: int) -> np.ndarray:
    """Sorted union of ``spec H(k)`` over ``k`` in ``(pi / rho) Z^d``.

    This is the spectrum of the periodic restriction with multiplicities.
    """
    return np.sort(np.linalg.eigvalsh(op.bloch_fiber(bloch_momenta(op.d, rho))).ravel())


def random_hamiltonian(d: int, L: int, R: int, rng: np.random.Generator,
                       scale: float = 1.0) -> TranslationInvariantOperator:
    """Random self-adjoint finite-range operator with hoppings in ``[-R, R]^d``."""
    hops = {}
    for a in itertools.product(range(-R, R + 1), repeat=d):
        if a in hops:
            continue
        t = scale * (rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))) / np.sqrt(2 * L)
        minus = tuple(-v for v in a)
        if a == minus:
            hops[a] = (t + t.conj().T) / 2
        else:
            hops[a] = t
            hops[minus] = t.conj().T
    return TranslationInvariantOperator(d, L, hops)
