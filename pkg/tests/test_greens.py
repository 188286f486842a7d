import numpy as np
import pytest

from photocorr.errors import SingularityError, ValidationError
from photocorr.geometry import DetectorConfig, EmitterArray, build_chain, build_coincident
from photocorr.greens import (
    coeff_matrix,
    coeff_matrix_pair,
    coupling_matrices,
    dump_couplings_csv,
    far_field_greens,
    greens_free_space,
)
from conftest import random_array

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])


def gamma_perp_oracle(u):
    # decay ratio for dipoles perpendicular to the separation axis,
    # from the scalar dyad contraction worked out by hand
    return 1.5 * (np.sin(u) / u + np.cos(u) / u**2 - np.sin(u) / u**3)


def test_im_gzz_small_separation_limit():
    # series expansion of the zz component to order (kR)^0 gives k/(6 pi),
    # which is 1/3 in lambda units; confirm numerically at kR = 1e-4
    r = np.array([1e-4 / (2 * np.pi), 0, 0])
    g = greens_free_space(r, np.zeros(3), eps_min=1e-9)
    assert g[2, 2].imag == pytest.approx(1.0 / 3.0, rel=1e-6)


def test_reciprocity_random_pairs(rng):
    for _ in range(100):
        r, s = rng.uniform(-2, 2, size=(2, 3))
        if np.linalg.norm(r - s) < 1e-2:
            continue
        g_rs = greens_free_space(r, s)
        g_sr = greens_free_space(s, r)
        assert np.allclose(g_rs, g_sr.T, rtol=1e-12, atol=1e-15)


def test_gzz_half_wavelength():
    # transverse scalar form at u = pi: gamma_12/gamma_0 = -3/(2 pi^2)
    g = greens_free_space([0.5, 0, 0], [0, 0, 0])
    gamma_12 = 3.0 * g[2, 2].imag  # (6 pi / k) Im[...] with k = 2 pi
    assert gamma_12 == pytest.approx(gamma_perp_oracle(np.pi), rel=1e-12)
    assert gamma_12 == pytest.approx(-3 / (2 * np.pi**2), rel=1e-12)


def test_greens_singularity():
    with pytest.raises(SingularityError):
        greens_free_space(np.zeros(3), np.zeros(3))


def test_far_field_longitudinal_dipole_vanishes():
    assert np.allclose(far_field_greens(Z, np.zeros(3), Z), 0.0)


def test_far_field_transverse_at_origin():
    vec = far_field_greens(X, np.zeros(3), Z)
    assert np.allclose(vec, [0, 0, 1])


def test_far_field_phase_full_wavelength():
    # path phase 2 pi (r . R)/lambda: emitter one wavelength downstream
    vec = far_field_greens(X, [1.0, 0, 0], Z)
    assert np.allclose(vec, [0, 0, 1], atol=1e-12)
    vec_half = far_field_greens(X, [0.5, 0, 0], Z)
    assert np.allclose(vec_half, [0, 0, -1], atol=1e-12)


def test_coupling_diagonal_is_unity(rng):
    arr = random_array(rng, 5)
    coup = coupling_matrices(arr)
    assert np.allclose(np.diagonal(coup.gamma), 1.0)
    assert np.allclose(np.diagonal(coup.delta), 0.0)


def test_coupling_half_wavelength_pair():
    arr = build_chain(2, 0.5, X, Z)
    coup = coupling_matrices(arr)
    assert coup.gamma[0, 1] == pytest.approx(gamma_perp_oracle(np.pi), rel=1e-12)


@pytest.mark.parametrize("d", [0.1, 0.25, 0.8, 1.7])
def test_coupling_matches_tensor_contraction(rng, d):
    # hand contraction of the full tensor with the dipoles, pair by pair
    arr = random_array(rng, 4)
    coup = coupling_matrices(arr)
    for mu in range(4):
        for nu in range(mu + 1, 4):
            g = greens_free_space(arr.positions[mu], arr.positions[nu])
            contr = arr.dipoles[mu] @ g @ arr.dipoles[nu]
            assert coup.gamma[mu, nu] == pytest.approx(3.0 * contr.imag, rel=1e-12)
            assert coup.delta[mu, nu] == pytest.approx(-1.5 * contr.real, rel=1e-12)


def test_coupling_far_pair_decays():
    arr = build_chain(2, 1000.0, X, Z)
    coup = coupling_matrices(arr)
    assert abs(coup.gamma[0, 1]) < 2e-4
    assert abs(coup.delta[0, 1]) < 2e-4


def test_coupling_symmetric_and_psd(rng):
    for n in (3, 5, 7):
        arr = random_array(rng, n)
        coup = coupling_matrices(arr)
        assert np.allclose(coup.gamma, coup.gamma.T, rtol=1e-10)
        assert np.allclose(coup.delta, coup.delta.T, rtol=1e-10)
        eig = np.linalg.eigvalsh(coup.gamma)
        assert eig.min() >= -1e-10 * eig.max()


def test_coupling_permutation_covariance(rng):
    arr = random_array(rng, 5)
    coup = coupling_matrices(arr)
    perm = rng.permutation(5)
    arr_p = EmitterArray(arr.positions[perm], arr.dipoles[perm])
    coup_p = coupling_matrices(arr_p)
    assert np.allclose(coup_p.gamma, coup.gamma[np.ix_(perm, perm)], atol=1e-14)
    assert np.allclose(coup_p.delta, coup.delta[np.ix_(perm, perm)], atol=1e-14)


def test_coupling_coincident_mode():
    coup = coupling_matrices(build_coincident(4))
    assert np.allclose(coup.gamma, 1.0)
    assert np.allclose(coup.delta, 0.0)


def test_coupling_unflagged_coincident_raises():
    arr = EmitterArray(np.zeros((2, 3)), np.tile(Z, (2, 1)))
    with pytest.raises(SingularityError):
        coupling_matrices(arr)


def test_coeff_total_equals_gamma(rng):
    arr = random_array(rng, 4)
    coup = coupling_matrices(arr)
    a = coeff_matrix(arr, "total")
    assert np.allclose(a.entries, coup.gamma)


def test_coeff_directional_coincident_rank_one():
    arr = build_coincident(5)
    det = DetectorConfig(X, Y)
    a = coeff_matrix(arr, "directional", det)
    assert np.allclose(a.entries, a.entries[0, 0])
    assert np.linalg.matrix_rank(a.entries) == 1


def test_coeff_translation_invariance(rng):
    # the common phase e^{-ik r.T} cancels between G and G*
    arr = build_chain(4, 0.3, X, Z)
    det = DetectorConfig(X, Y)
    shift = rng.normal(size=3)
    arr_t = EmitterArray(arr.positions + shift, arr.dipoles)
    for flavor in ("directional",):
        a = coeff_matrix(arr, flavor, det)
        a_t = coeff_matrix(arr_t, flavor, det)
        assert np.allclose(a.entries, a_t.entries, atol=1e-12)


def test_all_flavors_hermitian(rng):
    arr = random_array(rng, 5)
    det = DetectorConfig(X, Y, polarization_a=Z, polarization_b=Z)
    for flavor in ("total", "directional", "polarized-directional"):
        a, b = coeff_matrix_pair(arr, flavor, det)
        for m in (a, b):
            assert np.allclose(m.entries, np.conj(m.entries).T, rtol=1e-12, atol=1e-14)


def test_coeff_missing_detector_raises(rng):
    arr = random_array(rng, 3)
    with pytest.raises(ValidationError):
        coeff_matrix(arr, "directional")


def test_dump_couplings_csv(tmp_path):
    coup = coupling_matrices(build_chain(3, 0.4, X, Z))
    path = tmp_path / "coup.csv"
    dump_couplings_csv(coup, path, d_over_lambda=0.4)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# N=3")
    assert len(lines) == 2 + 2 * 3
