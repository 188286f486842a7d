"""Zero-delay second-order correlation functions and closed-form references.

The normalized correlator is a ratio of operator averages weighted by a
Hermitian coefficient matrix per detector,

    num = sum_{mu nu gam eps} A^a[eps, mu] A^b[gam, nu]
          < sp_mu sp_nu sm_gam sm_eps >
    den = (sum_{mu nu} A^a[nu, mu] < sp_mu sm_nu >) * (same with A^b)

evaluated at a single time (zero delay). Everything here reduces the state
once to small index tensors (the intensity matrix C and, for small
registers, the four-index tensor T4) so repeated evaluations against many
coefficient matrices cost almost nothing; that is what the subset sampler
leans on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import CapacityError, ValidationError, ZeroIntensityError
from .geometry import DriveParams, EmitterArray
from .greens import CoeffMatrix, CouplingMatrices, coupling_matrices
from .quantum import (
    DensityState,
    build_liouvillian,
    evolve,
    inverted_state,
    ladder_stacks,
)

_T4_MAX = 8  # largest register for which the four-index tensor is materialized
_DIRECT_MAX = 9  # largest register for the dense direct contraction route
_DEN_FLOOR = 1e-14


@dataclass(frozen=True)
class CorrelationResult:
    """Normalized zero-delay correlation value with diagnostics."""

    value: float
    flavor: str = "total"
    time: object = 0.0
    tau: float = 0.0  # held for forward compatibility; nonzero delay unsupported
    imag_residual: float = 0.0


@lru_cache(maxsize=64)
def _intensity_indices(n: int, mu: int, nu: int):
    """Basis indices realizing sp_mu sm_nu: pairs (k, x) with x = k - b_nu + b_mu."""
    b_mu = 1 << (n - 1 - mu)
    b_nu = 1 << (n - 1 - nu)
    k = np.arange(2**n)
    mask = (k & b_nu) != 0
    if mu != nu:
        mask &= (k & b_mu) == 0
    k = k[mask]
    return k, k - b_nu + b_mu


def intensity_matrix(state: DensityState) -> np.ndarray:
    """C[mu, nu] = < sp_mu sm_nu > for every emitter pair."""
    n = state.n
    rho = state.matrix
    c = np.empty((n, n), dtype=complex)
    for mu in range(n):
        for nu in range(n):
            k, x = _intensity_indices(n, mu, nu)
            c[mu, nu] = rho[k, x].sum()
    return c


@dataclass
class ReducedCorrelators:
    """State reduced to the index tensors entering the correlation ratio."""

    n: int
    c: np.ndarray
    t4: Optional[np.ndarray] = None
    state: Optional[DensityState] = None


def reduced_correlators(state: DensityState, want_t4: bool = True) -> ReducedCorrelators:
    """Contract the state down to C (always) and T4 (small registers)."""
    n = state.n
    c = intensity_matrix(state)
    t4 = None
    if want_t4 and n <= _T4_MAX:
        sp_stack, sm_stack = ladder_stacks(n)
        pm = sm_stack @ state.matrix  # (n, dim, dim)
        u2 = np.einsum("gij,ejk->geik", sm_stack, pm)  # sm_g sm_e rho
        pp = np.einsum("mij,njk->mnik", sp_stack, sp_stack)  # sp_m sp_n
        t4 = np.einsum("mnij,geji->mnge", pp, u2)
    return ReducedCorrelators(n=n, c=c, t4=t4, state=state)


def _entries(a) -> np.ndarray:
    return a.entries if isinstance(a, CoeffMatrix) else np.asarray(a)


def _num_direct(corr: ReducedCorrelators, a_a: np.ndarray, a_b: np.ndarray) -> complex:
    """O(n dim^3) numerator without materializing the four-index tensor."""
    n = corr.n
    if corr.state is None or n > _DIRECT_MAX:
        raise CapacityError(
            f"zero-delay correlator needs n <= {_DIRECT_MAX} for the operator route",
            n=n,
            limit=_DIRECT_MAX,
        )
    sp_stack, sm_stack = ladder_stacks(n)
    rho = corr.state.matrix
    w = np.einsum("gn,gij->nij", a_b, sm_stack)
    b = np.einsum("nij,njk->ik", sp_stack, w)
    pm = sm_stack @ rho
    v = np.einsum("em,eij->mij", a_a, pm)
    rho_t = np.einsum("mij,mjk->ik", v, sp_stack)
    return complex(np.einsum("ij,ji->", b, rho_t))


def _a2_parts(corr: ReducedCorrelators, a_a, a_b, cross_only: bool = False):
    a_a = _entries(a_a)
    a_b = _entries(a_b)
    if a_a.shape != (corr.n, corr.n) or a_b.shape != (corr.n, corr.n):
        raise ValidationError(
            f"coefficient matrices must be {corr.n} x {corr.n}"
        )
    den_a = complex(np.einsum("nm,mn->", a_a, corr.c))
    den_b = complex(np.einsum("nm,mn->", a_b, corr.c))
    den = den_a * den_b
    if cross_only:
        diag_c = np.diagonal(corr.c)
        den = den - complex(np.sum(np.diagonal(a_a) * np.diagonal(a_b) * diag_c**2))
    if corr.t4 is not None:
        num = complex(np.einsum("em,gn,mnge->", a_a, a_b, corr.t4))
    else:
        num = _num_direct(corr, a_a, a_b)
    return num, den


def a2_zero_delay(
    rho: DensityState,
    a_a,
    a_b,
    time: object = 0.0,
    cross_only: bool = False,
) -> CorrelationResult:
    """Normalized zero-delay second-order correlation for one state.

    ``a_a`` and ``a_b`` are the per-detector coefficient matrices
    (CoeffMatrix or plain arrays). With ``cross_only`` the denominator
    drops the same-emitter intensity-squared terms, which is the pairwise
    sampler's convention; the default keeps all terms.

    Raises ZeroIntensityError when the intensity denominator vanishes
    (e.g. on the ground state), so sweep harnesses record gaps explicitly.
    """
    corr = reduced_correlators(rho)
    num, den = _a2_parts(corr, a_a, a_b, cross_only=cross_only)
    if abs(den) < _DEN_FLOOR:
        raise ZeroIntensityError(
            f"correlation undefined: intensity denominator {den:.3e}"
        )
    ratio = num / den
    flavor = a_a.flavor if isinstance(a_a, CoeffMatrix) else "total"
    return CorrelationResult(
        value=float(np.real(ratio)),
        flavor=flavor,
        time=time,
        imag_residual=float(abs(np.imag(ratio))),
    )


def a2_values_batch(
    corr: ReducedCorrelators,
    a_a_batch: np.ndarray,
    a_b_batch: np.ndarray,
    cross_only: bool = False,
) -> np.ndarray:
    """Correlation values for a batch of coefficient matrices, shared state.

    ``a_*_batch`` have shape (S, n, n). Requires the four-index tensor,
    i.e. registers up to n = 7. Returns the real values; raises
    ZeroIntensityError naming the first offending batch entry if any
    denominator vanishes.
    """
    if corr.t4 is None:
        raise CapacityError(
            f"batched correlator evaluation needs n <= {_T4_MAX}",
            n=corr.n,
            limit=_T4_MAX,
        )
    den_a = np.einsum("snm,mn->s", a_a_batch, corr.c)
    den_b = np.einsum("snm,mn->s", a_b_batch, corr.c)
    den = den_a * den_b
    if cross_only:
        diag_c = np.diagonal(corr.c)
        diag_a = np.diagonal(a_a_batch, axis1=1, axis2=2)
        diag_b = np.diagonal(a_b_batch, axis1=1, axis2=2)
        den = den - np.einsum("sm,sm,m->s", diag_a, diag_b, diag_c**2)
    bad = np.where(np.abs(den) < _DEN_FLOOR)[0]
    if bad.size:
        raise ZeroIntensityError(
            f"correlation undefined for batch entry {int(bad[0])}: zero intensity"
        )
    num = np.einsum("sem,sgn,mnge->s", a_a_batch, a_b_batch, corr.t4)
    return np.real(num / den)


# -- closed forms ------------------------------------------------------------


def inverted_array_closed_form(gamma: np.ndarray) -> float:
    """Exact inverted-array correlation from the decay matrix alone.

    1 + sum_{mu != nu} gamma^2 / (tr gamma)^2 - sum_mu gamma_mumu^2 /
    (tr gamma)^2, valid for any register size.
    """
    g = np.asarray(gamma, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValidationError("gamma must be square")
    if not np.allclose(g, g.T, rtol=1e-10, atol=1e-12):
        raise ValidationError("gamma must be symmetric")
    diag = np.diagonal(g)
    s = diag.sum()
    off_sq = float((g**2).sum() - (diag**2).sum())
    return 1.0 + off_sq / s**2 - float((diag**2).sum()) / s**2


def dicke_value(n: int) -> float:
    """Coincident (point-like) inverted array: 2(N - 1)/N."""
    if n < 2:
        raise ValidationError("Dicke value needs N >= 2")
    return 2.0 * (n - 1) / n


def independent_value(n: int) -> float:
    """Infinitely separated emitters: (N - 1)/N, independent of the state."""
    if n < 1:
        raise ValidationError("need N >= 1")
    return (n - 1) / n


# -- emission rate and the initial-slope identity -----------------------------


def emission_rate(rho: DensityState, gamma: np.ndarray) -> float:
    """Total photon emission rate sum_{mu nu} gamma_mu_nu < sp_mu sm_nu >."""
    g = np.asarray(gamma, dtype=float)
    c = intensity_matrix(rho)
    if g.shape != c.shape:
        raise ValidationError("gamma dimension does not match the register")
    val = complex(np.sum(g * c))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValidationError(f"emission rate not real: {val}")
    return float(val.real)


@dataclass(frozen=True)
class SlopeCheck:
    lhs: float  # finite-difference dR/dt at t = 0
    rhs: float  # R(0)^2 (G2 - 1)
    rel_discrepancy: float


def slope_relation_check(
    array: EmitterArray,
    drive: Optional[DriveParams] = None,
    h: float = 1e-4,
    couplings: Optional[CouplingMatrices] = None,
) -> SlopeCheck:
    """Initial emission-rate slope against the correlation identity.

    Valid only without driving (the coherent terms drop out of dR/dt at
    t = 0 for the inverted start); a drive raises a precondition error.
    The finite difference is Richardson-extrapolated from steps h and h/2.
    """
    if drive is not None and drive.rabi != 0.0:
        raise ValidationError("slope relation holds only for undriven systems")
    coup = couplings if couplings is not None else coupling_matrices(array)
    n = array.count
    rho0 = inverted_state(n)
    lio = build_liouvillian(coup, None, array)
    states = evolve(rho0, lio, [h / 2.0, h], rel_tol=1e-10, abs_tol=1e-12)
    r0 = emission_rate(rho0, coup.gamma)
    r_half = emission_rate(states[0], coup.gamma)
    r_full = emission_rate(states[1], coup.gamma)
    d_half = (r_half - r0) / (h / 2.0)
    d_full = (r_full - r0) / h
    lhs = 2.0 * d_half - d_full
    g2 = a2_zero_delay(rho0, coup.gamma, coup.gamma).value
    rhs = r0**2 * (g2 - 1.0)
    scale = max(abs(rhs), 1e-30)
    return SlopeCheck(lhs=lhs, rhs=rhs, rel_discrepancy=abs(lhs - rhs) / scale)


# -- far-field inverted-array closed form -------------------------------------


def far_field_inverted_g2(array: EmitterArray, dir_a, dir_b) -> float:
    """Directional correlation of the inverted array in the far field.

    Requires aligned dipoles. Equals |sum_mu e^{i k (ra - rb) . R_mu}|^2 /
    N^2 + 1 - 2/N and reaches its maximum 2(N - 1)/N exactly when every
    pairwise separation projects onto (ra - rb) as an integer number of
    wavelengths.
    """
    d0 = array.dipoles[0]
    if not np.allclose(array.dipoles, d0[None, :], atol=1e-12):
        raise ValidationError("far-field closed form requires aligned dipoles")
    ra = np.asarray(dir_a, dtype=float)
    rb = np.asarray(dir_b, dtype=float)
    for name, v in (("dir_a", ra), ("dir_b", rb)):
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValidationError(f"{name} must be unit norm")
    n = array.count
    q = array.positions @ (ra - rb)
    coherent = abs(np.exp(2j * np.pi * q).sum()) ** 2
    return float(coherent / n**2 + 1.0 - 2.0 / n)
