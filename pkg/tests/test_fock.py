import numpy as np
import pytest

from gausslab import fock
from gausslab.channels import (
    amplifier_channel,
    attenuator_channel,
    build_channel,
    classical_noise_channel,
)
from gausslab.errors import (
    AmplitudeTooLarge,
    DimensionMismatch,
    NotDiagonal,
    NotHermitian,
    ParameterOutOfRange,
    TruncationLeakage,
)
from gausslab.states import apply_channel, gaussian_state


class TestCoherentState:
    def test_zero_amplitude_is_vacuum(self, space40):
        psi = fock.coherent_state(0.0, space40)
        assert psi.amplitudes[0] == 1.0
        assert np.abs(psi.amplitudes[1:]).max() == 0.0

    def test_ground_amplitude(self, space40):
        psi = fock.coherent_state(1.0, space40)
        assert abs(psi.amplitudes[0]) == pytest.approx(np.exp(-0.5), abs=1e-10)

    @pytest.mark.parametrize("zeta", [0.5, 1.0 + 0.5j, 2.0, -1.4j])
    def test_mean_photon_number(self, space40, zeta):
        psi = fock.coherent_state(zeta, space40)
        assert fock.mean_photon(psi)[0] == pytest.approx(abs(zeta) ** 2, abs=1e-8)

    def test_amplitude_guard(self, space40):
        with pytest.raises(AmplitudeTooLarge):
            fock.coherent_state(4.0, space40)


class TestDisplacement:
    def test_zero_is_identity(self, space40):
        d = fock.displacement_matrix(0.0, space40)
        assert np.abs(d.matrix - np.eye(40)).max() < 1e-14

    def test_displaces_vacuum_to_coherent(self, space40):
        z = 0.8 - 0.3j
        d = fock.displacement_matrix(z, space40)
        target = fock.coherent_state(z, space40).amplitudes
        assert np.abs(d.matrix[:, 0] - target).max() < 1e-8

    def test_composition_phase(self, space40):
        z1, z2 = 0.4 + 0.1j, -0.2 + 0.3j
        d1 = fock.displacement_matrix(z1, space40).matrix
        d2 = fock.displacement_matrix(z2, space40).matrix
        d12 = fock.displacement_matrix(z1 + z2, space40).matrix
        phase = np.exp(-1j * np.imag(np.conj(z1) * z2))
        block = slice(0, 10)
        assert np.abs((d1 @ d2)[block, block] - (phase * d12)[block, block]).max() < 1e-6

    def test_unitary_on_low_photon_block(self, space40):
        d = fock.displacement_matrix(1.1, space40).matrix
        gram = d.conj().T @ d
        assert np.abs(gram[:10, :10] - np.eye(10)).max() < 1e-8


class TestAttenuatorKraus:
    def test_unit_transmission_is_identity(self, space40):
        kraus = fock.attenuator_kraus(1.0, space40)
        assert len(kraus.ops) == 1
        assert np.abs(kraus.ops[0] - np.eye(40)).max() < 1e-12

    def test_single_photon_balanced_split(self, space40):
        kraus = fock.attenuator_kraus(np.sqrt(0.5), space40)
        out = fock.apply_kraus(kraus, fock.density(fock.number_state(space40, 1)))
        assert out.matrix[1, 1].real == pytest.approx(0.5, abs=1e-12)
        assert out.matrix[0, 0].real == pytest.approx(0.5, abs=1e-12)

    def test_coherent_input_attenuates(self, space40):
        k, zeta = 0.7, 1.5
        kraus = fock.attenuator_kraus(k, space40)
        out = fock.apply_kraus(kraus, fock.density(fock.coherent_state(zeta, space40)))
        target = fock.coherent_state(k * zeta, space40).amplitudes
        fidelity = np.real(target.conj() @ out.matrix @ target)
        assert fidelity >= 1 - 1e-8

    def test_vacuum_invariant(self, space40):
        kraus = fock.attenuator_kraus(0.3, space40)
        out = fock.apply_kraus(kraus, fock.density(fock.vacuum_state(space40)))
        assert abs(out.matrix[0, 0] - 1.0) < 1e-10
        assert np.abs(out.matrix).sum() == pytest.approx(1.0, abs=1e-10)

    def test_completeness_within_margin(self, space40):
        kraus = fock.attenuator_kraus(0.6, space40)
        assert fock.kraus_completeness_defect(kraus, 30) < 1e-8

    def test_parameter_guard(self, space40):
        with pytest.raises(ParameterOutOfRange):
            fock.attenuator_kraus(1.2, space40)


class TestAmplifierKraus:
    def test_unit_gain_is_identity(self, space40):
        kraus = fock.amplifier_kraus(1.0, space40)
        assert len(kraus.ops) == 1
        assert np.abs(kraus.ops[0] - np.eye(40)).max() < 1e-12

    def test_vacuum_becomes_thermal(self, space40):
        kraus = fock.amplifier_kraus(np.sqrt(2), space40)
        out = fock.apply_kraus(kraus, fock.density(fock.vacuum_state(space40)))
        diag = np.real(np.diagonal(out.matrix))
        expected = 0.5 ** (np.arange(40) + 1)
        assert np.abs(diag - expected).max() < 1e-6
        off = out.matrix - np.diag(np.diagonal(out.matrix))
        assert np.abs(off).max() < 1e-12

    def test_coherent_covariance(self, space40):
        kappa, zeta = 1.4, 0.8
        kraus = fock.amplifier_kraus(kappa, space40)
        out = fock.apply_kraus(kraus, fock.density(fock.coherent_state(zeta, space40)))
        # alpha' = kappa^2/2 + (kappa^2 - 1)/2, on top of the displaced mean
        n_out = fock.mean_photon(out)[0]
        expected = kappa ** 2 * abs(zeta) ** 2 + (kappa ** 2 - 1)
        assert n_out == pytest.approx(expected, abs=1e-6)

    def test_completeness_low_occupation(self, space40):
        kraus = fock.amplifier_kraus(1.2, space40)
        assert fock.kraus_completeness_defect(kraus, 5) < 1e-8

    def test_tail_guard(self):
        with pytest.raises(ParameterOutOfRange):
            fock.amplifier_kraus(3.0, fock.FockSpace(1, 40))


class TestApplyKraus:
    def test_two_mode_product_channel_factorizes(self):
        d = 8
        one = fock.FockSpace(1, d)
        att = fock.attenuator_kraus(0.7, one)
        amp = fock.amplifier_kraus(1.1, one)
        a = fock.coherent_state(0.4, one)
        b = fock.number_state(one, 1)
        rho2 = fock.density(fock.tensor_pure(a, b))
        out2 = fock.apply_kraus([att, amp], rho2)
        out_a = fock.apply_kraus(att, fock.density(a))
        out_b = fock.apply_kraus(amp, fock.density(b))
        assert np.abs(out2.matrix - np.kron(out_a.matrix, out_b.matrix)).max() < 1e-10

    def test_two_mode_matches_kron_oracle(self):
        d = 6
        one = fock.FockSpace(1, d)
        two = fock.FockSpace(2, d)
        att = fock.attenuator_kraus(0.5, one)
        psi = fock.random_pure_state(3, two)
        rho = fock.density(psi)
        out = fock.apply_kraus([None, att], rho)
        oracle = np.zeros_like(rho.matrix)
        for a in att.ops:
            big = np.kron(np.eye(d), a)
            oracle += big @ rho.matrix @ big.conj().T
        assert np.abs(out.matrix - oracle).max() < 1e-12

    def test_cutoff_mismatch(self, space40):
        kraus = fock.attenuator_kraus(0.5, fock.FockSpace(1, 20))
        with pytest.raises(DimensionMismatch):
            fock.apply_kraus(kraus, fock.density(fock.vacuum_state(space40)))


class TestGaugeRotation:
    def test_zero_phase_is_identity(self, space40):
        u = fock.gauge_rotation(0.0, space40)
        assert np.abs(u.matrix - np.eye(40)).max() == 0.0

    def test_rotates_coherent_states(self, space40):
        phi, zeta = 0.9, 1.1 + 0.2j
        u = fock.gauge_rotation(phi, space40)
        rotated = u.matrix @ fock.coherent_state(zeta, space40).amplitudes
        target = fock.coherent_state(np.exp(1j * phi) * zeta, space40).amplitudes
        assert abs(np.vdot(target, rotated)) ** 2 >= 1 - 1e-8

    @pytest.mark.parametrize("builder,param", [(fock.attenuator_kraus, 0.6),
                                               (fock.amplifier_kraus, 1.3)])
    def test_channels_are_gauge_covariant(self, space40, builder, param):
        kraus = builder(param, space40)
        psi = fock.random_pure_state(17, space40, support=5)
        rho = fock.density(psi)
        out = fock.apply_kraus(kraus, rho)
        for phi in np.linspace(0, 2 * np.pi, 8, endpoint=False):
            u = fock.gauge_rotation(phi, space40).matrix
            lhs = fock.apply_kraus(kraus, fock.FockOperator(space40, u @ rho.matrix @ u.conj().T))
            rhs = u @ out.matrix @ u.conj().T
            assert np.abs(lhs.matrix - rhs).max() < 1e-8


class TestTranspose:
    def test_diagonal_fixed(self, space40):
        rho = fock.thermal_state(0.7, space40)
        assert np.abs(fock.transpose_state(rho).matrix - rho.matrix).max() == 0.0

    def test_coherent_conjugates(self, space40):
        zeta = 0.6 + 0.4j
        rho = fock.density(fock.coherent_state(zeta, space40))
        out = fock.transpose_state(rho)
        target = fock.density(fock.coherent_state(np.conj(zeta), space40))
        assert np.abs(out.matrix - target.matrix).max() < 1e-8

    def test_spectrum_invariant(self, space40):
        psi = fock.random_pure_state(5, space40, support=8)
        kraus = fock.attenuator_kraus(0.8, space40)
        rho = fock.apply_kraus(kraus, fock.density(psi))
        assert np.abs(fock.spectrum(rho) - fock.spectrum(fock.transpose_state(rho))).max() < 1e-10


class TestComplementary:
    def test_unit_gain_gives_vacuum(self, space40):
        psi = fock.random_pure_state(11, space40, support=6)
        out = fock.complementary_output(1.0, fock.density(psi))
        assert abs(out.matrix[0, 0] - 1.0) < 1e-12
        assert np.abs(out.matrix).sum() == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("kappa", [1.2, 1.5, 2.0])
    def test_representation_identity(self, space40, kappa):
        psi = fock.random_pure_state(23, space40, support=5)
        rho = fock.density(psi)
        lhs = fock.complementary_output(kappa, rho)
        k_tilde = np.sqrt(1 - kappa ** -2)
        stage1 = fock.apply_kraus(fock.attenuator_kraus(k_tilde, space40), rho)
        stage2 = fock.apply_kraus(fock.amplifier_kraus(kappa, space40), stage1)
        rhs = fock.transpose_state(stage2)
        assert np.abs(lhs.matrix - rhs.matrix).max() < 1e-6

    def test_marginal_spectra_coincide(self, space40):
        psi = fock.random_pure_state(29, space40, support=5)
        sys_out, anc_out = fock.amplifier_dilation_marginals(1.5, psi)
        assert np.abs(fock.spectrum(sys_out) - fock.spectrum(anc_out)).max() < 1e-8

    def test_marginals_match_kraus_paths(self, space40):
        kappa = 1.5
        psi = fock.random_pure_state(31, space40, support=5)
        sys_out, anc_out = fock.amplifier_dilation_marginals(kappa, psi)
        via_kraus = fock.apply_kraus(fock.amplifier_kraus(kappa, space40),
                                     fock.density(psi))
        assert np.abs(sys_out.matrix[:40, :40] - via_kraus.matrix).max() < 1e-9
        via_comp = fock.complementary_output(kappa, fock.density(psi))
        assert np.abs(anc_out.matrix[:40, :40] - via_comp.matrix).max() < 1e-9


class TestSpectrum:
    def test_pure_state(self, space40):
        lam = fock.spectrum(fock.density(fock.coherent_state(0.9, space40)))
        assert lam[0] == pytest.approx(1.0, abs=1e-9)
        assert lam[1] < 1e-9

    def test_balanced_split(self, space40):
        kraus = fock.attenuator_kraus(np.sqrt(0.5), space40)
        out = fock.apply_kraus(kraus, fock.density(fock.number_state(space40, 1)))
        lam = fock.spectrum(out)
        assert np.allclose(lam[:2], [0.5, 0.5], atol=1e-10)

    def test_thermal_geometric(self, space40):
        lam = fock.spectrum(fock.thermal_state(1.0, space40))
        assert np.abs(lam - 0.5 ** (np.arange(40) + 1)).max() < 1e-10

    def test_rejects_non_hermitian(self, space40):
        mat = np.zeros((40, 40), dtype=complex)
        mat[0, 1] = 1.0
        with pytest.raises(NotHermitian):
            fock.spectrum(fock.FockOperator(space40, mat))


class TestRandomStates:
    def test_deterministic_per_seed(self, space40):
        a = fock.random_pure_state(99, space40)
        b = fock.random_pure_state(99, space40)
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_normalized(self, space40):
        psi = fock.random_pure_state(7, space40)
        assert abs(np.linalg.norm(psi.amplitudes) - 1.0) < 1e-12

    def test_haar_mean_occupation(self):
        space = fock.FockSpace(1, 20)
        means = [fock.mean_photon(fock.random_pure_state(i, space))[0]
                 for i in range(1000)]
        assert np.mean(means) == pytest.approx((20 - 1) / 2, rel=0.05)


class TestRealizeChannel:
    def test_leakage_policy(self, space40):
        kraus = fock.amplifier_kraus(1.5, space40)
        out = fock.apply_kraus(kraus, fock.density(fock.number_state(space40, 8)))
        assert fock.leakage(out) > 1e-6
        with pytest.raises(TruncationLeakage):
            fock.require_leakage(out, 1e-6)

    def test_covariance_consistency_with_exact_action(self, space40):
        # thermal inputs with N <= 2 through one-mode channels; the oracle is
        # applied to the truncated input's actual covariance, and (channel, N)
        # pairs keep the output leakage inside the 1e-6 budget
        cases = [(attenuator_channel(0.6), (0.0, 1.0, 2.0)),
                 (amplifier_channel(1.3), (0.0,)),
                 (classical_noise_channel(0.8), (0.0, 1.0))]
        for ch, n_means in cases:
            realized = fock.realize_channel(ch, space40)
            for n_mean in n_means:
                rho = fock.thermal_state(n_mean, space40)
                out = fock.require_leakage(realized.apply(rho), 1e-6)
                alpha_in = fock.mean_photon(rho)[0] + 0.5
                alpha_fock = fock.mean_photon(out)[0] + 0.5
                exact = apply_channel(ch, gaussian_state(np.diag([alpha_in])))
                assert abs(alpha_fock - exact.alpha[0, 0].real) < 1e-6

    def test_complex_transmission_uses_gauge_phase(self, space40):
        phi = 0.7
        ch = build_channel(np.diag([0.5 * np.exp(1j * phi)]), np.diag([0.375]))
        realized = fock.realize_channel(ch, space40)
        zeta = 1.0
        out = realized.apply_pure(fock.coherent_state(zeta, space40))
        target = fock.coherent_state(0.5 * np.exp(1j * phi) * zeta, space40).amplitudes
        fidelity = np.real(target.conj() @ out.matrix @ target)
        assert fidelity >= 1 - 1e-8

    def test_rejects_correlated_two_mode(self):
        k = np.array([[0.5, 0.1], [0.0, 0.5]])
        ch = build_channel(k, np.eye(2))
        with pytest.raises(NotDiagonal):
            fock.realize_channel(ch, fock.FockSpace(2, 8))


class TestBeamsplitter:
    def test_matches_attenuator_kraus(self):
        d = 12
        theta = np.arccos(0.6)
        u = fock.beamsplitter_unitary(theta, fock.FockSpace(2, d)).matrix
        kraus = fock.attenuator_kraus(0.6, fock.FockSpace(1, d))
        # A_l[m, n] = <m, l| U |n, 0>
        for l, a in enumerate(kraus.ops[:6]):
            for n in range(d):
                m = n - l
                if m < 0:
                    continue
                assert u[m * d + l, n * d + 0] == pytest.approx(a[m, n], abs=1e-10)

    def test_unitary_on_protected_sectors(self):
        d = 10
        u = fock.beamsplitter_unitary(0.8, fock.FockSpace(2, d)).matrix
        psi = fock.tensor_pure(fock.number_state(fock.FockSpace(1, d), 2),
                               fock.number_state(fock.FockSpace(1, d), 1))
        out = u @ psi.amplitudes
        assert abs(np.linalg.norm(out) - 1.0) < 1e-12


class TestFockSpaceGuards:
    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            fock.FockSpace(2, 65)

    def test_mode_guard(self):
        with pytest.raises(DimensionMismatch):
            fock.FockSpace(3, 8)
