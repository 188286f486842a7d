"""Exact dynamics for small emitter registers.

Conventions, fixed once and tested through the trace-preservation invariant:

* qubit basis |g> = 0, |e> = 1; emitter 0 is the leftmost (most significant)
  tensor factor, so the fully inverted register is the last basis state;
* density matrices are vectorized by column stacking, vec(A X B) =
  (B^T kron A) vec(X);
* time is measured in 1/gamma_0 and all generator entries in gamma_0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import (
    CapacityError,
    DegenerateSteadyStateError,
    IntegrationError,
    ValidationError,
)
from .geometry import DriveParams, EmitterArray
from .greens import CouplingMatrices

N_MAX_EVOLVE = 12
N_MAX_STEADY = 8
_MAX_DENSE_STACK = 9  # largest register kept as dense operator stacks

_SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |e><g|
_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|


def _check_capacity(n: int, limit: int, what: str, allow_large: bool = False):
    if n > limit and not allow_large:
        raise CapacityError(
            f"{what} limited to n <= {limit} (register dimension 2^{n} = {2**n}); "
            f"pass allow_large=True / --unsafe-dims to override",
            n=n,
            limit=limit,
        )


@lru_cache(maxsize=None)
def embed_ladder(n: int, idx: int, kind: str) -> sp.csr_matrix:
    """Ladder operator of emitter ``idx`` embedded in an n-emitter register.

    ``kind`` is "raise" (sigma^+) or "lower" (sigma^-). The result is a
    cached sparse matrix; treat it as read-only.
    """
    if not 0 <= idx < n:
        raise ValidationError(f"emitter index {idx} out of range for n = {n}")
    _check_capacity(n, N_MAX_EVOLVE, "operator embedding")
    if kind == "raise":
        base = _SIGMA_PLUS
    elif kind == "lower":
        base = _SIGMA_MINUS
    else:
        raise ValidationError(f"ladder kind must be 'raise' or 'lower', got {kind!r}")
    op = sp.identity(1, dtype=complex, format="csr")
    for site in range(n):
        factor = sp.csr_matrix(base) if site == idx else sp.identity(2, dtype=complex, format="csr")
        op = sp.kron(op, factor, format="csr")
    return op


@lru_cache(maxsize=8)
def ladder_stacks(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Dense (n, dim, dim) stacks of sigma^+ and sigma^- for fast contractions."""
    if n > _MAX_DENSE_STACK:
        raise CapacityError(
            f"dense operator stacks limited to n <= {_MAX_DENSE_STACK}",
            n=n,
            limit=_MAX_DENSE_STACK,
        )
    dim = 2**n
    sp_stack = np.zeros((n, dim, dim), dtype=complex)
    sm_stack = np.zeros((n, dim, dim), dtype=complex)
    for mu in range(n):
        sp_stack[mu] = embed_ladder(n, mu, "raise").toarray()
        sm_stack[mu] = embed_ladder(n, mu, "lower").toarray()
    sp_stack.setflags(write=False)
    sm_stack.setflags(write=False)
    return sp_stack, sm_stack


# -- states ----------------------------------------------------------------


@dataclass
class DensityState:
    """2^n x 2^n density matrix of an n-emitter register."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = self.matrix.shape[0]
        if self.matrix.shape != (dim, dim) or dim & (dim - 1):
            raise ValidationError(f"density matrix must be 2^n square, got {self.matrix.shape}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return int(self.dim).bit_length() - 1

    def check(self, herm_tol=1e-10, trace_tol=1e-10, psd_tol=1e-8) -> "DensityState":
        """Raise if the state violates Hermiticity, unit trace or positivity."""
        herm = np.abs(self.matrix - self.matrix.conj().T).max()
        if herm > herm_tol:
            raise ValidationError(f"state not Hermitian: max asymmetry {herm:.3e}")
        tr = self.matrix.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValidationError(f"state trace {tr} differs from 1")
        lo = float(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2).min())
        if lo < -psd_tol:
            raise ValidationError(f"state has negative eigenvalue {lo:.3e}")
        return self

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def inverted_state(n: int) -> DensityState:
    """|e...e><e...e|: every emitter excited."""
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[dim - 1, dim - 1] = 1.0
    return DensityState(rho)


def ground_state(n: int) -> DensityState:
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return DensityState(rho)


def product_state(single_states: Sequence[np.ndarray]) -> DensityState:
    """Tensor product of single-emitter 2x2 density matrices."""
    rho = np.array([[1.0 + 0j]])
    for s in single_states:
        s = np.asarray(s, dtype=complex)
        if s.shape != (2, 2):
            raise ValidationError("each factor must be a 2x2 matrix")
        rho = np.kron(rho, s)
    return DensityState(rho)


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return rho.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    dim = int(round(np.sqrt(v.size)))
    return v.reshape((dim, dim), order="F")


# -- Liouvillian -----------------------------------------------------------


@dataclass
class Liouvillian:
    """Sparse superoperator acting on column-stacked density matrices."""

    matrix: sp.csr_matrix
    n: int
    drive: Optional[DriveParams] = None
    couplings: Optional[CouplingMatrices] = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _sum_sparse(blocks, shape) -> sp.csr_matrix:
    """Sum many sparse terms in one pass (duplicate entries coalesce)."""
    if not blocks:
        return sp.csr_matrix(shape, dtype=complex)
    data = np.concatenate([b.data for b in blocks])
    rows = np.concatenate([b.row for b in blocks])
    cols = np.concatenate([b.col for b in blocks])
    return sp.coo_matrix((data, (rows, cols)), shape=shape).tocsr()


def build_hamiltonian(
    couplings: CouplingMatrices,
    drive: Optional[DriveParams],
    array: EmitterArray,
) -> sp.csr_matrix:
    """Coherent part: detuning, dipole-dipole shifts and the laser drive."""
    n = couplings.count
    dim = 2**n
    blocks = []
    detuning = drive.detuning if drive is not None else 0.0
    for mu in range(n):
        sp_mu = embed_ladder(n, mu, "raise")
        if detuning != 0.0:
            blocks.append((detuning * (sp_mu @ embed_ladder(n, mu, "lower"))).tocoo())
        for nu in range(n):
            d_mn = couplings.delta[mu, nu]
            if nu != mu and d_mn != 0.0:
                blocks.append((d_mn * (sp_mu @ embed_ladder(n, nu, "lower"))).tocoo())
    if drive is not None and drive.rabi != 0.0:
        phases = drive.phases(array.positions)
        for mu in range(n):
            amp = -(drive.rabi / 2.0) * np.exp(-1j * phases[mu])
            blocks.append((amp * embed_ladder(n, mu, "raise")).tocoo())
            blocks.append((np.conj(amp) * embed_ladder(n, mu, "lower")).tocoo())
    if not blocks:
        return sp.csr_matrix((dim, dim), dtype=complex)
    return _sum_sparse(blocks, (dim, dim))


def build_liouvillian(
    couplings: CouplingMatrices,
    drive: Optional[DriveParams],
    array: EmitterArray,
    allow_large: bool = False,
) -> Liouvillian:
    """Assemble the full generator of the collective master equation.

    Includes all four term groups: detuning, coherent mu != nu coupling,
    drive and the gamma_mu_nu dissipator, in the column-stacking
    superoperator convention.
    """
    n = couplings.count
    if array.count != n:
        raise ValidationError(
            f"couplings dimension {n} does not match array count {array.count}"
        )
    _check_capacity(n, N_MAX_EVOLVE, "Liouvillian build", allow_large)
    dim = 2**n
    ident = sp.identity(dim, dtype=complex, format="csr")

    h = build_hamiltonian(couplings, drive, array)
    # sum_{mu nu} gamma_mu_nu sp_nu sm_mu, shared by both anticommutator halves
    anti_blocks = []
    jump_blocks = []
    for mu in range(n):
        sm_mu = embed_ladder(n, mu, "lower")
        for nu in range(n):
            g = couplings.gamma[mu, nu]
            if g == 0.0:
                continue
            sp_nu = embed_ladder(n, nu, "raise")
            anti_blocks.append((g * (sp_nu @ sm_mu)).tocoo())
            jump_blocks.append(sp.kron(g * sp_nu.T, sm_mu, format="coo"))
    anti = _sum_sparse(anti_blocks, (dim, dim))

    blocks = [
        (-1j * sp.kron(ident, h, format="coo")).tocoo(),
        (1j * sp.kron(h.T, ident, format="coo")).tocoo(),
        (-0.5 * sp.kron(ident, anti, format="coo")).tocoo(),
        (-0.5 * sp.kron(anti.T, ident, format="coo")).tocoo(),
    ] + jump_blocks
    lio = _sum_sparse(blocks, (dim * dim, dim * dim))
    return Liouvillian(matrix=lio, n=n, drive=drive, couplings=couplings)


# -- solvers ----------------------------------------------------------------


def _clean(rho: np.ndarray) -> np.ndarray:
    rho = (rho + rho.conj().T) / 2.0
    return rho / np.real(rho.trace())


def evolve(
    rho0: DensityState,
    lio: Liouvillian,
    t_grid,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
) -> list:
    """Adaptive integration of drho/dt = L rho to each requested time.

    ``t_grid`` must be increasing with t_grid[0] >= 0; each output is
    re-Hermitized and trace-renormalized.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValidationError("t_grid must be a non-empty 1D sequence")
    if t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ValidationError("t_grid must be increasing with t_grid[0] >= 0")
    if rho0.dim * rho0.dim != lio.dim:
        raise ValidationError("state dimension does not match the Liouvillian")

    y0 = vec(rho0.matrix).astype(complex)
    if t_grid[-1] == 0.0:
        return [DensityState(_clean(rho0.matrix.copy())) for _ in t_grid]

    mat = lio.matrix

    def rhs(_t, y):
        return mat @ y

    sol = solve_ivp(
        rhs,
        (0.0, float(t_grid[-1])),
        y0,
        t_eval=t_grid,
        method="RK45",
        rtol=rel_tol,
        atol=abs_tol,
    )
    if not sol.success:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(
            f"integration failed near t = {t_fail:.6g}: {sol.message}", t_fail=t_fail
        )
    return [DensityState(_clean(unvec(sol.y[:, k]))) for k in range(sol.y.shape[1])]


def _trace_row(dim: int) -> sp.csr_matrix:
    idx = np.arange(dim) * (dim + 1)
    data = np.ones(dim, dtype=complex)
    return sp.csr_matrix((data, (np.zeros(dim, dtype=int), idx)), shape=(1, dim * dim))


def _smallest_singular_values(mat: sp.csr_matrix):
    dim = mat.shape[0]
    try:
        if dim <= 4096:
            svals = np.linalg.svd(mat.toarray(), compute_uv=False)
            return tuple(float(s) for s in np.sort(svals)[:2])
        svals = spla.svds(mat.tocsc(), k=2, which="SM", return_singular_vectors=False)
        return tuple(float(s) for s in np.sort(svals))
    except Exception:
        return None


def steady_state(
    lio: Liouvillian,
    residual_tol: float = 1e-9,
    allow_large: bool = False,
) -> DensityState:
    """Stationary state from the trace-bordered linear system.

    Solves L x = 0 with Tr(rho) = 1 appended via a bordered square matrix
    [[L, t*], [t, 0]], which is nonsingular whenever the stationary state is
    unique. Direct sparse factorization up to n = 6 (fill-in grows too fast
    beyond that); larger registers relax toward the fixed point by
    integration and polish the result iteratively. The residual |L x| is
    always verified; failure raises with the two smallest singular values.
    """
    n = lio.n
    _check_capacity(n, N_MAX_STEADY, "steady-state solve", allow_large)
    dim2 = lio.dim
    dim = int(round(np.sqrt(dim2)))
    t_row = _trace_row(dim)
    bordered = sp.bmat(
        [[lio.matrix, t_row.conj().T], [t_row, None]], format="csc"
    )
    rhs = np.zeros(dim2 + 1, dtype=complex)
    rhs[-1] = 1.0

    x = None
    if dim2 <= 4**6:
        try:
            x = spla.splu(bordered).solve(rhs)[:-1]
        except RuntimeError:
            x = None
    if x is None:
        # Iterative path: relax toward the fixed point, then polish.
        seed = vec(ground_state(n).matrix).astype(complex)
        sol = solve_ivp(
            lambda _t, y: lio.matrix @ y,
            (0.0, 50.0),
            seed,
            method="RK45",
            rtol=1e-8,
            atol=1e-10,
        )
        if not sol.success:
            raise DegenerateSteadyStateError(
                "steady-state relaxation failed; generator may be degenerate",
                singular_values=_smallest_singular_values(lio.matrix),
            )
        x0 = np.concatenate([sol.y[:, -1], [0.0]])
        x_it, info = spla.lgmres(bordered, rhs, x0=x0, rtol=1e-12, atol=1e-14, maxiter=2000)
        if info != 0:
            raise DegenerateSteadyStateError(
                f"iterative steady-state solve did not converge (info = {info})",
                singular_values=_smallest_singular_values(lio.matrix),
            )
        x = x_it[:-1]

    residual = float(np.linalg.norm(lio.matrix @ x))
    rho = _clean(unvec(x))
    lo = float(np.linalg.eigvalsh(rho).min())
    if residual > residual_tol or lo < -1e-8:
        raise DegenerateSteadyStateError(
            f"steady-state check failed: residual {residual:.3e}, "
            f"smallest eigenvalue {lo:.3e}; the two smallest singular values "
            "of the generator are reported",
            singular_values=_smallest_singular_values(lio.matrix),
        )
    return DensityState(rho)


# -- expectation values ------------------------------------------------------


OperatorSpec = Sequence[Tuple[int, str]]


def expectation(rho: DensityState, spec: OperatorSpec) -> complex:
    """Tr[(product of embedded ladder operators, in spec order) rho]."""
    n = rho.n
    op = sp.identity(rho.dim, dtype=complex, format="csr")
    for idx, kind in spec:
        op = op @ embed_ladder(n, idx, kind)
    return complex((op @ rho.matrix).trace())


def trace_distance(a: DensityState, b: DensityState) -> float:
    """(1/2) Tr |a - b|."""
    diff = (a.matrix - b.matrix + (a.matrix - b.matrix).conj().T) / 2.0
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())
