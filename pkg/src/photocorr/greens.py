"""Free-space dyadic Green's tensor, coupling matrices and coefficient flavors.

Positions are given in units of lambda so the wavenumber is k = 2*pi and
kR = 2*pi*R. Decay rates are normalized such that the single-emitter rate
is 1: the gamma_0 prefactor (mu_0 omega_0^3 |d|^2 / 3 pi hbar c in SI) is
never materialized; only the dimensionless ratios gamma_mu_nu / gamma_0 and
Delta_mu_nu / gamma_0 appear.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SingularityError, ValidationError
from .geometry import DEFAULT_EPS_MIN, DetectorConfig, EmitterArray

K0 = 2.0 * np.pi  # wavenumber in lambda units


def _dyad_scalars(u):
    """Transverse/longitudinal scalar parts of the dyad, times e^{iu}.

    Returns (A e^{iu}, B e^{iu}) where the tensor between unit dipoles is
    G = (A*I + B*RhatRhat) e^{iu} / (4 pi R). Array-friendly in u.
    """
    u = np.asarray(u, dtype=float)
    inv = 1.0 / u
    inv2 = inv * inv
    eiu = np.exp(1j * u)
    a = (1.0 + 1j * inv - inv2) * eiu
    b = (3.0 * inv2 - 3j * inv - 1.0) * eiu
    return a, b


def greens_free_space(r, s, eps_min: float = DEFAULT_EPS_MIN) -> np.ndarray:
    """Full near+far-field free-space Green's tensor between points r and s.

    Both points are 3-vectors in units of lambda; the returned 3x3 complex
    matrix includes the e^{ikR}/(4 pi R) scalar. Raises SingularityError for
    separations below ``eps_min`` (the real part diverges at R = 0).
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    rv = r - s
    dist = float(np.linalg.norm(rv))
    if dist < eps_min:
        raise SingularityError(
            f"Green's tensor singular: |r - s| = {dist:.3e} < {eps_min:.3e}"
        )
    rhat = rv / dist
    u = K0 * dist
    a, b = _dyad_scalars(u)
    dyad = np.outer(rhat, rhat)
    return (a * np.eye(3) + b * dyad) / (4.0 * np.pi * dist)


def far_field_greens(direction, emitter_pos, dipole) -> np.ndarray:
    """Far-field emission amplitude (I - rr).d e^{-ik r.R} for one emitter.

    The common e^{ikr}/(4 pi r) detector-distance prefactor is dropped; it
    cancels in every normalized correlation ratio.
    """
    rhat = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(rhat) - 1.0) > 1e-12:
        raise ValidationError("direction must be unit norm")
    d = np.asarray(dipole, dtype=float)
    pos = np.asarray(emitter_pos, dtype=float)
    transverse = d - rhat * np.dot(rhat, d)
    phase = np.exp(-1j * K0 * np.dot(rhat, pos))
    return transverse * phase


def _far_field_rows(array: EmitterArray, direction) -> np.ndarray:
    """(N, 3) far-field amplitude rows for every emitter in the array."""
    rhat = np.asarray(direction, dtype=float)
    proj = array.dipoles @ rhat
    transverse = array.dipoles - proj[:, None] * rhat[None, :]
    phases = np.exp(-1j * K0 * (array.positions @ rhat))
    return transverse * phases[:, None]


@dataclass(frozen=True)
class CouplingMatrices:
    """Dissipative (gamma) and coherent (delta) coupling matrices in gamma_0.

    gamma is real symmetric with unit diagonal (identical emitters in free
    space); delta is real symmetric with zero diagonal, the single-emitter
    Lamb shift being absorbed into omega_0.
    """

    gamma: np.ndarray
    delta: np.ndarray

    @property
    def count(self) -> int:
        return self.gamma.shape[0]

    def restrict(self, indices) -> "CouplingMatrices":
        idx = np.asarray(indices, dtype=int)
        sel = np.ix_(idx, idx)
        return CouplingMatrices(self.gamma[sel].copy(), self.delta[sel].copy())


def coupling_scalars(u, c1, c2):
    """gamma/gamma_0 and delta/gamma_0 from pair geometry.

    Args:
        u: kR = 2*pi*R (R in lambda), array-friendly.
        c1: dipole-dipole overlap d_mu . d_nu.
        c2: longitudinal product (d_mu . Rhat)(d_nu . Rhat).
    """
    a, b = _dyad_scalars(u)
    contr = c1 * a + c2 * b
    # gamma/gamma_0 = (6 pi / k) Im[contr] / (4 pi R) = (3 / 2u) Im[contr]
    gamma = (1.5 / u) * np.imag(contr)
    # delta/gamma_0 = -(3 pi / k) Re[contr] / (4 pi R) = -(3 / 4u) Re[contr]
    delta = (-0.75 / u) * np.real(contr)
    return gamma, delta


def coupling_matrices(
    array: EmitterArray, eps_min: float = DEFAULT_EPS_MIN
) -> CouplingMatrices:
    """Build the N x N gamma/gamma_0 and delta/gamma_0 matrices.

    Coincident-flagged arrays return the Dicke-limit substitution
    gamma = 1 for every pair and delta = 0 (the level shift diverges at
    zero separation). Unflagged arrays with a pair closer than ``eps_min``
    raise SingularityError.
    """
    n = array.count
    if array.coincident:
        return CouplingMatrices(np.ones((n, n)), np.zeros((n, n)))
    gamma = np.eye(n)
    delta = np.zeros((n, n))
    if n == 1:
        return CouplingMatrices(gamma, delta)
    sep = array.separations()
    dist = np.linalg.norm(sep, axis=2)
    off = ~np.eye(n, dtype=bool)
    if dist[off].min() < eps_min:
        pair = np.unravel_index(np.argmin(np.where(off, dist, np.inf)), dist.shape)
        raise SingularityError(
            f"emitters {pair} separated by {dist[pair]:.3e} < eps_min; "
            "flag the array coincident for Dicke-limit couplings"
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        rhat = sep / dist[:, :, None]
    c1 = array.dipoles @ array.dipoles.T
    p = np.einsum("ik,ijk->ij", array.dipoles, rhat)
    q = np.einsum("jk,ijk->ij", array.dipoles, rhat)
    g_off, d_off = coupling_scalars(K0 * dist[off], c1[off], (p * q)[off])
    gamma[off] = g_off
    delta[off] = d_off
    return CouplingMatrices(gamma, delta)


@dataclass(frozen=True)
class CoeffMatrix:
    """Hermitian coefficient matrix selecting one correlation flavor.

    flavor "total": entries are the gamma/gamma_0 matrix (direction and
    polarization integrated out). flavor "directional": far-field vector
    products G_mu . G_nu^*. flavor "polarized-directional": scalar products
    through a polarization analyzer.
    """

    flavor: str
    entries: np.ndarray

    @property
    def count(self) -> int:
        return self.entries.shape[0]

    def restrict(self, indices) -> "CoeffMatrix":
        idx = np.asarray(indices, dtype=int)
        return CoeffMatrix(self.flavor, self.entries[np.ix_(idx, idx)].copy())


def coeff_matrix(
    array: EmitterArray,
    flavor: str,
    detector: Optional[DetectorConfig] = None,
    port: str = "a",
    couplings: Optional[CouplingMatrices] = None,
) -> CoeffMatrix:
    """Coefficient matrix A^i for detector port i ("a" or "b").

    The total flavor ignores the detector and equals the gamma matrix
    (precomputed couplings may be passed to avoid rebuilding them).
    """
    if flavor == "total":
        coup = couplings if couplings is not None else coupling_matrices(array)
        return CoeffMatrix("total", coup.gamma)
    if detector is None:
        raise ValidationError(f"flavor {flavor!r} requires a detector config")
    if port not in ("a", "b"):
        raise ValidationError(f"port must be 'a' or 'b', got {port!r}")
    rows = _far_field_rows(array, detector.direction(port))
    if flavor == "directional":
        entries = rows @ rows.conj().T
    elif flavor == "polarized-directional":
        pol = detector.polarization(port)
        if pol is None:
            raise ValidationError(
                "polarized-directional flavor requires a polarization vector"
            )
        s = rows @ np.asarray(pol, dtype=float)
        entries = np.outer(s, s.conj())
    else:
        raise ValidationError(f"unknown coefficient flavor {flavor!r}")
    return CoeffMatrix(flavor, entries)


def coeff_matrix_pair(
    array: EmitterArray,
    flavor: str,
    detector: Optional[DetectorConfig] = None,
    couplings: Optional[CouplingMatrices] = None,
):
    """(A^a, A^b) pair entering the second-order correlation ratio."""
    a = coeff_matrix(array, flavor, detector, "a", couplings)
    if flavor == "total":
        return a, a
    return a, coeff_matrix(array, flavor, detector, "b", couplings)


def dump_couplings_csv(coup: CouplingMatrices, path, d_over_lambda=None) -> None:
    """Debug dump of gamma/delta (row-major) with an N / d header line."""
    n = coup.count
    with open(path, "w") as fh:
        d_txt = "" if d_over_lambda is None else f",{d_over_lambda!r}"
        fh.write(f"# N={n}{d_txt}\n")
        fh.write("matrix,row," + ",".join(f"c{j}" for j in range(n)) + "\n")
        for name, mat in (("gamma", coup.gamma), ("delta", coup.delta)):
            for i in range(n):
                vals = ",".join(f"{v:.17g}" for v in mat[i])
                fh.write(f"{name},{i},{vals}\n")
