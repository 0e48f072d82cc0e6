"""Model Hamiltonians, disorder generation and JSON model files.

Disorder is drawn from numpy's counter-based Philox generator, so a seed
fully determines the sample on every platform and numpy version that keeps
the Philox stream stable.
"""
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .clifford import SIGMA1, SIGMA2, SIGMA3
from .degree import dirac_model
from .errors import ConfigError
from .lattice import (FiniteVolumeOperator, TranslationInvariantOperator, dirichlet_restriction,
                      periodic_restriction)

RNG_NAME = "numpy.random.Philox"
RNG_VERSION = 1


def disorder_rng(seed: int) -> np.random.Generator:
    """Generator used for all disorder samples."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class Disorder:
    """Uniform i.i.d. disorder of strength ``lam`` drawn from ``disorder_rng(seed)``."""

    lam: float = 0.0
    seed: int = 0

    def uniform(self, size) -> np.ndarray:
        if self.lam < 0:
            raise ConfigError("disorder strength must be non-negative")
        return disorder_rng(self.seed).uniform(-self.lam, self.lam, size=size)


def _chain_operator(onsite, forward, rho, boundary):
    """1D operator with ``<x|A|x> = onsite[x]`` and ``<x+1|A|x> = forward[x]``."""
    n = 2 * rho
    mat = np.zeros((n, n), dtype=complex)
    for i in range(n):
        mat[i, i] = onsite[i]
        j = i + 1
        if j == n:
            if boundary != "periodic":
                continue
            j = 0
        mat[j, i] = forward[i]
    return mat


def chiral_hamiltonian(a: np.ndarray, d: int, rho: int, half: int,
                       boundary: str = "periodic") -> FiniteVolumeOperator:
    """Chiral Hamiltonian from an off-diagonal block.

    ``a`` acts on sites x ``half`` orbitals.  The result has ``L = 2 half``
    orbitals per site, the first ``half`` forming the positive sector.
    """
    n_sites = (2 * rho) ** d
    a = np.asarray(a, dtype=complex)
    if a.shape != (n_sites * half, n_sites * half):
        raise ConfigError("block size does not match the lattice")
    L = 2 * half
    orb = np.tile(np.arange(L), n_sites)
    plus = np.nonzero(orb < half)[0]
    minus = np.nonzero(orb >= half)[0]
    h = np.zeros((n_sites * L, n_sites * L), dtype=complex)
    h[np.ix_(plus, minus)] = a
    h[np.ix_(minus, plus)] = a.conj().T
    return FiniteVolumeOperator(d, L, rho, boundary, h)


def ssh_block(m: complex, rho: int, disorder: Optional[Disorder] = None,
              boundary: str = "periodic") -> np.ndarray:
    """Off-diagonal block ``A|x> = (m + m_x)|x> + (1 + t_x)|x+1>`` on ``2 rho`` sites.

    ``m_x`` and ``t_x`` are i.i.d. uniform on ``[-lam, lam]``; the first
    ``2 rho`` draws are the ``m_x`` and the next ``2 rho`` the ``t_x``, in
    site order ``x = -rho+1, .., rho``.
    """
    n = 2 * rho
    if disorder is not None and disorder.lam > 0:
        draws = disorder.uniform(2 * n)
        mx, tx = draws[:n], draws[n:]
    else:
        mx = tx = np.zeros(n)
    return _chain_operator(m + mx, 1 + tx, rho, boundary)


def ssh_chain(m: complex, rho: int, disorder: Optional[Disorder] = None,
              boundary: str = "periodic") -> FiniteVolumeOperator:
    """Finite-volume SSH Hamiltonian ``[[0, A], [A^*, 0]]``, L = 2.

    For ``|m| < 1`` and weak disorder the winding number of ``A`` is -1.

    Examples
    --------
    >>> ssh_chain(0.9j, 300).dim
    1200
    """
    return chiral_hamiltonian(ssh_block(m, rho, disorder, boundary), 1, rho, 1, boundary)


def ssh_bulk(m: complex) -> TranslationInvariantOperator:
    """Clean SSH model; ``A(k) = m + exp(-ik)``."""
    t0 = np.array([[0, m], [np.conj(m), 0]], dtype=complex)
    tm = np.array([[0, 1], [0, 0]], dtype=complex)
    return TranslationInvariantOperator(1, 2, {(0,): t0, (-1,): tm, (1,): tm.conj().T})


def ssh_winding(m: complex, n: int = 4096) -> int:
    """Winding number of ``k -> m + exp(-ik)`` around the origin."""
    k = 2 * np.pi * np.arange(n + 1) / n
    z = m + np.exp(-1j * k)
    if np.abs(z).min() < 1e-12:
        raise ConfigError("SSH symbol vanishes")
    return int(np.rint(np.sum(np.diff(np.unwrap(np.angle(z)))) / (2 * np.pi)))


def diii_block(m: complex, rho: int, coupling: float = 0.2, disorder: Optional[Disorder] = None,
               boundary: str = "periodic") -> np.ndarray:
    """Off-diagonal block of a time-reversal symmetric chiral chain.

    ``A = [[a, c], [c, a^T]]`` on ``C^2`` per site, where ``a`` is the SSH
    block and ``c = delta (S - S^T)`` is antisymmetric (``S`` the shift,
    ``delta_x = coupling + disorder``).  This satisfies
    ``sigma_2 A^T sigma_2 = A``, the time-reversal relation of the block.
    The Z2 phase is nontrivial for ``|m| < 1``.
    """
    n = 2 * rho
    if disorder is not None and disorder.lam > 0:
        draws = disorder.uniform(3 * n)
        mx, tx, cx = draws[:n], draws[n:2 * n], draws[2 * n:]
    else:
        mx = tx = cx = np.zeros(n)
    a = _chain_operator(m + mx, 1 + tx, rho, boundary)
    s = _chain_operator(np.zeros(n), coupling + cx, rho, boundary)
    c = s - s.T
    blk = np.zeros((n, 2, n, 2), dtype=complex)
    blk[:, 0, :, 0] = a
    blk[:, 1, :, 1] = a.T
    blk[:, 0, :, 1] = c
    blk[:, 1, :, 0] = c
    return blk.reshape(2 * n, 2 * n)


def diii_chain(m: complex, rho: int, coupling: float = 0.2, disorder: Optional[Disorder] = None,
               boundary: str = "periodic") -> FiniteVolumeOperator:
    """Chiral DIII chain with L = 4 (two Kramers partners in each chiral sector)."""
    return chiral_hamiltonian(diii_block(m, rho, coupling, disorder, boundary), 1, rho, 2, boundary)


def aii_model(d: int, m: float, coupling: float = 0.2) -> TranslationInvariantOperator:
    """Time-reversal invariant Dirac model, ``sigma_2 conj(H) sigma_2 = H``.

    The fiber is spin (outer) x orbital (inner), ``L = 4``.

    * d = 2: ``H = [[h, c], [c^*, conj(h)]]`` with ``h`` the d=2 Dirac model
      and ``c = coupling * i sigma_2`` a real antisymmetric on-site term.
      Nontrivial for ``0 < |m| < 2``.
    * d = 3: ``H(k) = sum_j sin k_j sigma_j x tau_1 + (m - sum_j cos k_j) 1 x tau_3``
      (``coupling`` is unused).  Nontrivial for ``1 < |m| < 3``.
    """
    if d == 2:
        h = dirac_model(2, m)
        c = coupling * np.array([[0, 1], [-1, 0]], dtype=complex)
        hops = {}
        for a, t in h.hoppings.items():
            big = np.zeros((4, 4), dtype=complex)
            big[:2, :2] = t
            big[2:, 2:] = t.conj()
            if a == (0, 0):
                big[:2, 2:] = c
                big[2:, :2] = c.conj().T
            hops[a] = big
        return TranslationInvariantOperator(2, 4, hops)
    if d == 3:
        gammas = [np.kron(s, SIGMA1) for s in (SIGMA1, SIGMA2, SIGMA3)]
        gammas.append(np.kron(np.eye(2), SIGMA3))
        return dirac_model(3, m, gammas=gammas)
    raise ConfigError("AII models are provided for d = 2 and d = 3")


def add_onsite_disorder(h: FiniteVolumeOperator, disorder: Disorder,
                        matrix: Optional[np.ndarray] = None) -> FiniteVolumeOperator:
    """Add ``w_x * matrix`` on every site, ``w_x`` uniform on ``[-lam, lam]``.

    With a real symmetric ``matrix`` commuting with the Kramers ``sigma_2``
    (the default is the identity) time-reversal symmetry is preserved.
    """
    matrix = np.eye(h.L) if matrix is None else np.asarray(matrix)
    w = disorder.uniform(h.n_sites)
    pot = sp.kron(sp.diags(w), sp.csr_matrix(matrix), format="csr")
    if h.is_sparse:
        return h.with_matrix((h.matrix + pot).tocsr())
    return h.with_matrix(h.dense() + pot.toarray())


def restrict(op: TranslationInvariantOperator, rho: int, boundary: str = "periodic",
             sparse: bool = False) -> FiniteVolumeOperator:
    """Periodic or Dirichlet restriction by name."""
    if boundary == "periodic":
        return periodic_restriction(op, rho, sparse=sparse)
    if boundary == "dirichlet":
        return dirichlet_restriction(op, rho, sparse=sparse)
    raise ConfigError(f"unknown boundary {boundary!r}")


def model_to_json(op: TranslationInvariantOperator) -> dict:
    """Serialize hoppings as ``{d, L, hoppings: [{a, matrix: [[[re, im], ..], ..]}]}``."""
    hops = []
    for a, t in sorted(op.hoppings.items()):
        hops.append({"a": list(a), "matrix": [[[float(v.real), float(v.imag)] for v in row]
                                              for row in t]})
    return {"d": op.d, "L": op.L, "hoppings": hops}


def model_from_json(data) -> TranslationInvariantOperator:
    """Inverse of :func:`model_to_json`; accepts a dict or a JSON string."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        d, L = int(data["d"]), int(data["L"])
        hops = {}
        for entry in data["hoppings"]:
            arr = np.asarray(entry["matrix"], dtype=float)
            if arr.shape != (L, L, 2):
                raise ConfigError(f"hopping matrix has shape {arr.shape}, expected {(L, L, 2)}")
            a = tuple(int(v) for v in entry["a"])
            hops[a] = hops.get(a, 0) + arr[..., 0] + 1j * arr[..., 1]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed model file: {exc}") from exc
    return TranslationInvariantOperator(d, L, hops)


def flattened(h: FiniteVolumeOperator) -> FiniteVolumeOperator:
    """Flat-band version ``sgn(H)`` of a gapped finite-volume Hamiltonian."""
    w, v = np.linalg.eigh(h.dense())
    if np.abs(w).min() < 1e-12:
        raise ConfigError("cannot flatten a Hamiltonian with zero modes")
    return h.with_matrix((v * np.sign(w)) @ v.conj().T)


MODELS = ("ssh", "diii", "dirac", "aii", "file")


def bulk_model(name: str, d: int = 2, m: complex = 1.0, coupling: float = 0.2,
               model_file: Optional[str] = None) -> Optional[TranslationInvariantOperator]:
    """Clean translation-invariant operator for a model name, if it has one."""
    if name == "ssh":
        return ssh_bulk(m)
    if name == "dirac":
        return dirac_model(d, float(np.real(m)))
    if name == "aii":
        return aii_model(d, float(np.real(m)), coupling)
    if name == "file":
        if model_file is None:
            raise ConfigError("model 'file' needs a model file")
        with open(model_file) as fh:
            return model_from_json(json.load(fh))
    if name == "diii":
        return None
    raise ConfigError(f"unknown model {name!r}; choose from {', '.join(MODELS)}")


SPARSE_ABOVE = 6000


def build_model(name: str, rho: int, d: int = 2, m: complex = 1.0, lam: float = 0.0, seed: int = 0,
                coupling: float = 0.2, boundary: str = "periodic",
                model_file: Optional[str] = None, sparse: Optional[bool] = None) -> FiniteVolumeOperator:
    """Finite-volume Hamiltonian for a model name.

    SSH and DIII chains draw bond and mass disorder; the other models get an
    on-site potential ``w_x * 1`` that keeps time-reversal symmetry.
    ``sparse=None`` stores matrices above dimension ``SPARSE_ABOVE`` sparsely.
    """
    disorder = Disorder(lam, seed) if lam > 0 else None
    if name == "ssh":
        return ssh_chain(m, rho, disorder, boundary)
    if name == "diii":
        return diii_chain(m, rho, coupling, disorder, boundary)
    op = bulk_model(name, d, m, coupling, model_file)
    if sparse is None:
        sparse = op.L * (2 * rho) ** op.d > SPARSE_ABOVE
    h = restrict(op, rho, boundary, sparse=sparse)
    if disorder is not None:
        h = add_onsite_disorder(h, disorder)
    return h
