"""Periodic and non-periodic spectral localizers and their homotopies.

Matrices are assembled with the Clifford (and chiral block) factors as the
outer tensor index and the lattice Hilbert space as the inner index.  In the
even case the localizer reads::

    L = sum_j sin(pi X_j / rho) G_j + (sum_j (1 - cos(pi X_j / rho)) - H / eta) G_{d+1}

in the basis :func:`~speclocal.clifford.split_basis`, which is the 2x2 block
form with ``sum_j (1 - cos) - H / eta`` on the diagonal and
``sum_j sin(pi X_j / rho) gamma_j`` (``gamma_d = i``) below it.  In the odd
case, with a chiral Hamiltonian ``H = [[0, A], [A^*, 0]]``::

    L = [[sum_j sin gamma_j, sum_j (1 - cos)], [sum_j (1 - cos), -sum_j sin gamma_j]]
        - [[0, A], [A^*, 0]] / eta
"""
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .clifford import clifford_generators, split_basis
from .errors import ConfigError, GapClosed, NotChiral, NotSelfAdjoint, OddSignature
from .inertia import inertia
from .lattice import FiniteVolumeOperator, lattice_sites, taper_function

STABILITY_CONSTANT = 15e6


def _hermitian_error(m):
    diff = m - m.conj().T
    if sp.issparse(diff):
        return abs(diff).max() if diff.nnz else 0.0
    return np.abs(diff).max()


def _check_self_adjoint(h: FiniteVolumeOperator, tol=1e-10):
    m = h.matrix
    scale = max(abs(m).max(), 1.0)
    if _hermitian_error(m) > tol * scale:
        raise NotSelfAdjoint("Hamiltonian is not self-adjoint")


def _diag(v, sparse):
    return sp.diags(v) if sparse else np.diag(v)


def _kron(a, b, sparse):
    return sp.kron(a, b, format="csr") if sparse else np.kron(a, b)


def _coords(d, rho, L):
    return np.repeat(lattice_sites(d, rho).astype(float), L, axis=0)


def _radius(d, rho, L):
    return np.sqrt(np.sum(_coords(d, rho, L) ** 2, axis=1))


def chiral_blocks(h: FiniteVolumeOperator, tol: float = 1e-10):
    """Split a chiral Hamiltonian into its off-diagonal block.

    The chiral grading is ``+1`` on the first ``L/2`` orbitals of each site
    and ``-1`` on the others.

    Returns
    -------
    A : matrix
        The block from the negative to the positive sector, so that
        ``H = [[0, A], [A^*, 0]]`` after grouping the sectors.

    Raises
    ------
    NotChiral
        If ``L`` is odd or the diagonal blocks do not vanish.
    """
    if h.L % 2:
        raise NotChiral("chiral grading needs an even number of orbitals")
    half = h.L // 2
    orb = np.tile(np.arange(h.L), h.n_sites)
    plus = np.nonzero(orb < half)[0]
    minus = np.nonzero(orb >= half)[0]
    m = h.matrix.tocsr() if h.is_sparse else h.matrix
    scale = max(abs(m).max(), 1.0)
    for block in (m[plus][:, plus], m[minus][:, minus]):
        if abs(block).max() > tol * scale:
            raise NotChiral("Hamiltonian does not anticommute with the chiral grading")
    return m[plus][:, minus]


def half_sector_operator(h: FiniteVolumeOperator, a) -> FiniteVolumeOperator:
    """Wrap a chiral off-diagonal block as an operator with ``L/2`` orbitals."""
    return FiniteVolumeOperator(h.d, h.L // 2, h.rho, h.boundary, a)


def _even_form(sin_terms, diag_term, ham, eta, d, sparse):
    """``sum_j s_j G_j + (diag_term - ham / eta) G_{d+1}`` with vectors s_j, diag_term."""
    gam = split_basis(d)
    out = _kron(gam[d], _diag(diag_term, sparse) - ham / eta, sparse)
    for j, s in enumerate(sin_terms):
        out = out + _kron(gam[j], _diag(s, sparse), sparse)
    return out


def _odd_form(sin_terms, off_term, a, eta, d, sparse):
    """``[[S, C - A/eta], [C - A^*/eta, -S]]`` with ``S = sum_j s_j gamma_j``."""
    gam = clifford_generators(d)
    one = np.eye(gam[0].shape[0])
    s_op = sum(_kron(g, _diag(s, sparse), sparse) for g, s in zip(gam, sin_terms))
    c_op = _kron(one, _diag(off_term, sparse), sparse)
    a_op = _kron(one, a, sparse)
    blocks = [[s_op, c_op - a_op / eta], [c_op - a_op.conj().T / eta, -s_op]]
    return sp.bmat(blocks, format="csr") if sparse else np.block(blocks)


def _check_eta(eta):
    if not np.isfinite(eta) or eta <= 0:
        raise ConfigError(f"eta must be positive, got {eta}")


def resolve_eta(eta, h: FiniteVolumeOperator) -> float:
    """Return ``eta``, or ``||H||`` (spectral norm of the finite-volume matrix) for ``"auto"``."""
    if eta is None or (isinstance(eta, str) and eta == "auto"):
        m = h.dense()
        return float(np.abs(np.linalg.eigvalsh(m)).max())
    eta = float(eta)
    _check_eta(eta)
    return eta


def even_periodic_localizer(h: FiniteVolumeOperator, eta: float):
    """Even periodic spectral localizer of a periodic restriction, for even d.

    Parameters
    ----------
    h : FiniteVolumeOperator
        Self-adjoint periodic restriction at scale ``rho``.
    eta : float
        Energy scale, positive.

    Returns
    -------
    ndarray (or sparse matrix for sparse input) of size ``2^{d/2} (2 rho)^d L``.
    """
    if h.d % 2:
        raise ConfigError("even localizer needs even d")
    _check_eta(eta)
    _check_self_adjoint(h)
    d, rho, L = h.d, h.rho, h.L
    x = _coords(d, rho, L)
    sins = [np.sin(np.pi * x[:, j] / rho) for j in range(d)]
    diag = np.sum(1 - np.cos(np.pi * x / rho), axis=1)
    return _even_form(sins, diag, h.matrix, eta, d, h.is_sparse)


def odd_periodic_localizer(h: FiniteVolumeOperator, eta: float):
    """Odd periodic spectral localizer of a chiral periodic restriction, for odd d.

    The dimension equals that of ``H`` times ``2^{(d-1)/2}``.
    """
    if h.d % 2 == 0:
        raise ConfigError("odd localizer needs odd d")
    _check_eta(eta)
    _check_self_adjoint(h)
    a = chiral_blocks(h)
    d, rho, half = h.d, h.rho, h.L // 2
    x = _coords(d, rho, half)
    sins = [np.sin(np.pi * x[:, j] / rho) for j in range(d)]
    off = np.sum(1 - np.cos(np.pi * x / rho), axis=1)
    return _odd_form(sins, off, a, eta, d, h.is_sparse)


def periodic_localizer(h: FiniteVolumeOperator, eta: float):
    """Dispatch to the even or odd periodic localizer according to ``h.d``."""
    if h.d % 2:
        return odd_periodic_localizer(h, eta)
    return even_periodic_localizer(h, eta)


def nonperiodic_localizer(h: FiniteVolumeOperator, kappa: float):
    """Spectral localizer with linear position operators.

    Even d: ``kappa sum_j X_j G_j - H G_{d+1}``, i.e. the block form
    ``[[-H, kappa sum X_j gamma_j^*], [kappa sum X_j gamma_j, H]]``.
    Odd d: ``[[kappa D, -A], [-A^*, -kappa D]]`` with ``D = sum_j X_j gamma_j``.
    """
    if kappa <= 0:
        raise ConfigError("kappa must be positive")
    _check_self_adjoint(h)
    d, rho = h.d, h.rho
    if d % 2 == 0:
        x = _coords(d, rho, h.L)
        xs = [kappa * x[:, j] for j in range(d)]
        return _even_form(xs, np.zeros(h.dim), h.matrix, 1.0, d, h.is_sparse)
    a = chiral_blocks(h)
    x = _coords(d, rho, h.L // 2)
    xs = [kappa * x[:, j] for j in range(d)]
    return _odd_form(xs, np.zeros(x.shape[0]), a, 1.0, d, h.is_sparse)


def taper_profile(d: int, rho_prime: int, L: int, rho: float, t: float = 1.0) -> np.ndarray:
    """Diagonal of ``t G_{rho/2}(|D_0|) + (1 - t)`` on the box of scale ``rho_prime``.

    ``G_{rho/2}(r) = G(2 r / rho)`` equals 1 for ``r <= rho / 4`` and 0 for
    ``r >= rho / 2``.
    """
    g = taper_function(_radius(d, rho_prime, L) / (rho / 2))
    return t * g + (1 - t)


def _tapered(ham, g, sparse):
    if sparse:
        dg = sp.diags(g)
        return dg @ ham @ dg
    return g[:, None] * ham * g[None, :]


def homotopy_t(h_prime: FiniteVolumeOperator, rho: int, eta: float, t: float):
    """Localizer path from the periodic localizer at ``t = 0`` to the localized one at ``t = 1``.

    ``L(t) = sum_j s_j G_j + (sum_j (1 - c_j) - G_t H' G_t / eta) G_{d+1}`` where
    the trigonometric terms and ``H'`` live at scale ``rho' = h_prime.rho``
    and ``G_t = t G_{rho/2}(|D_0|) + 1 - t``.  Requires ``rho <= rho' <= 2 rho``.
    Odd d uses the chiral form with ``G_t A' G_t``.
    """
    rp = h_prime.rho
    if not rho <= rp <= 2 * rho:
        raise ConfigError("need rho <= rho' <= 2 rho")
    if not 0 <= t <= 1:
        raise ConfigError("t must lie in [0, 1]")
    _check_eta(eta)
    _check_self_adjoint(h_prime)
    d, sparse = h_prime.d, h_prime.is_sparse
    if d % 2 == 0:
        x = _coords(d, rp, h_prime.L)
        g = taper_profile(d, rp, h_prime.L, rho, t)
        sins = [np.sin(np.pi * x[:, j] / rp) for j in range(d)]
        diag = np.sum(1 - np.cos(np.pi * x / rp), axis=1)
        return _even_form(sins, diag, _tapered(h_prime.matrix, g, sparse), eta, d, sparse)
    a = chiral_blocks(h_prime)
    half = h_prime.L // 2
    x = _coords(d, rp, half)
    g = taper_profile(d, rp, half, rho, t)
    sins = [np.sin(np.pi * x[:, j] / rp) for j in range(d)]
    off = np.sum(1 - np.cos(np.pi * x / rp), axis=1)
    return _odd_form(sins, off, _tapered(a, g, sparse), eta, d, sparse)


def localized_periodic_localizer(h: FiniteVolumeOperator, eta: float):
    """Periodic localizer with the Hamiltonian compressed by the taper ``G_{rho/2}(|D_0|)``."""
    return homotopy_t(h, h.rho, eta, 1.0)


def homotopy_s(h: FiniteVolumeOperator, eta: float, s: float):
    """Path from the localized periodic localizer (``s = 1``) to a linearized one (``s = 0``).

    ``L(s) = 2 sum_j xi_j sqrt(1 - s^2 xi_j^2) G_j + (2 s sum_j xi_j^2 - G H G / eta) G_{d+1}``
    with ``xi_j = sin(pi X_j / (2 rho))`` and ``G = G_{rho/2}(|D_0|)``.
    """
    if not 0 <= s <= 1:
        raise ConfigError("s must lie in [0, 1]")
    _check_eta(eta)
    _check_self_adjoint(h)
    d, rho, sparse = h.d, h.rho, h.is_sparse
    if d % 2 == 0:
        L, ham = h.L, h.matrix
    else:
        L, ham = h.L // 2, chiral_blocks(h)
    x = _coords(d, rho, L)
    xi = np.sin(np.pi * x / (2 * rho))
    g = taper_profile(d, rho, L, rho)
    lin = [2 * xi[:, j] * np.sqrt(1 - s ** 2 * xi[:, j] ** 2) for j in range(d)]
    quad = 2 * s * np.sum(xi ** 2, axis=1)
    if d % 2 == 0:
        return _even_form(lin, quad, _tapered(ham, g, sparse), eta, d, sparse)
    return _odd_form(lin, quad, _tapered(ham, g, sparse), eta, d, sparse)


@dataclass(frozen=True)
class LocalizerResult:
    """Half-signature of a localizer together with its inertia data."""

    half_signature: int
    n_plus: int
    n_minus: int
    n_zero: int
    gap: float
    tol: float
    dim: int

    def to_dict(self):
        return asdict(self)


def localizer_invariant(mat, tol: Optional[float] = None, method: str = "eigh") -> LocalizerResult:
    """Half-signature of a localizer matrix.

    Raises
    ------
    GapClosed
        If eigenvalues lie within ``tol`` (default ``1e-8 ||L||``) of zero.
    OddSignature
        If the signature is odd.
    """
    if sp.issparse(mat):
        mat = mat.toarray()
    inert = inertia(mat, tol=tol, method=method)
    if inert.n_zero:
        raise GapClosed(f"localizer has {inert.n_zero} eigenvalues within {inert.tol:.3g} of zero",
                        gap=inert.min_abs_eig)
    sig = inert.signature
    if sig % 2:
        raise OddSignature(f"signature {sig} is odd")
    return LocalizerResult(sig // 2, inert.n_plus, inert.n_minus, inert.n_zero,
                           inert.min_abs_eig, inert.tol, mat.shape[0])


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the sufficient conditions guaranteeing the localizer invariant."""

    rho_min: float
    rho_condition: bool
    eta_condition_lhs: float
    eta_condition_rhs: float
    eta_condition: bool
    eta_lower_bound: bool
    rho_range_condition: bool
    guaranteed_gap: float

    @property
    def ok(self) -> bool:
        return (self.rho_condition and self.eta_condition and self.eta_lower_bound
                and self.rho_range_condition)

    def to_dict(self):
        out = asdict(self)
        out["ok"] = self.ok
        return out


def check_theorem_conditions(d: int, norm: float, gap: float, commutator: float, eta: float,
                             rho: float, hop_range: int = 0) -> ConditionReport:
    """Evaluate the sufficient conditions on ``rho`` and ``eta``.

    Parameters
    ----------
    d : int
        Dimension.
    norm, gap, commutator : float
        ``||H||``, the spectral gap ``g`` at zero and ``M = max_j ||[X_j, H]||``.
    eta, rho : float
        Localizer parameters.
    hop_range : int
        Hopping range R; ``rho >= 2 R`` is required.

    Returns
    -------
    ConditionReport
        ``rho_min = C d^4 M ||H||^3 eta^2 / g^6`` with ``C = 1.5e7``; the
        eta condition ``(1 - g/||H||)^2 + 4 (1 - eta/||H||) <= g^2 / (4 d eta ||H||)``;
        ``eta >= g / 4``; and the guaranteed gap ``g / (sqrt(600 d) eta)``.
    """
    if min(norm, gap, eta) <= 0 or gap > norm * (1 + 1e-12):
        raise ConfigError("need 0 < gap <= norm and eta > 0")
    rho_min = STABILITY_CONSTANT * d ** 4 * commutator * norm ** 3 * eta ** 2 / gap ** 6
    lhs = (1 - gap / norm) ** 2 + 4 * (1 - eta / norm)
    rhs = gap ** 2 / (4 * d * eta * norm)
    return ConditionReport(
        rho_min=rho_min,
        rho_condition=bool(rho >= rho_min),
        eta_condition_lhs=lhs,
        eta_condition_rhs=rhs,
        eta_condition=bool(lhs <= rhs),
        eta_lower_bound=bool(eta >= gap / 4),
        rho_range_condition=bool(rho >= 2 * hop_range),
        guaranteed_gap=gap / (np.sqrt(600 * d) * eta),
    )
