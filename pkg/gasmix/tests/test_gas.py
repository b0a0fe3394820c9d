import unittest
import numpy as np
from gasmix.core.error_handler import (
    DegenerateMixtureError, DimensionMismatchError, ErrorHandler, MixtureFractionError,
)
from gasmix.core.gas.mixture import GasMixture
from gasmix.core.models.gas_pair import GasPair


class TestGasMixture(unittest.TestCase):
    """
    A class containing unit tests for the two-gas mixture algebra.

    Methods
    -------
    test_equivalents_of_partials()
        Pressure, fractions and wave speed follow from partial densities.
    test_pure_constituents()
        Pure gases give the constituent wave speeds and fractions 0 or 1.
    test_equivalent_variables_agree()
        (p, eta2) and (rho, nu2) describe the same partial densities.
    test_invalid_inputs()
        Negative partials, empty mixtures and fractions outside [0, 1] are rejected.
    test_nodal_energy()
        Energy flow weights incoming mass by the heating values.
    """

    def setUp(self):
        self.gas = GasPair(sigma1=377.0, sigma2=2.8 * 377.0, r1=44.2, r2=141.8)
        self.mixture = GasMixture(self.gas, ErrorHandler())

    def test_equivalents_of_partials(self):
        sample = self.mixture.partials_to_equivalents(np.array([40.0, 10.0]), np.array([1.0, 5.0]))
        np.testing.assert_allclose(sample.rho, [41.0, 15.0])
        np.testing.assert_allclose(sample.p, self.gas.sigma1_sq * np.array([40.0, 10.0])
                                   + self.gas.sigma2_sq * np.array([1.0, 5.0]))
        np.testing.assert_allclose(sample.eta2, [1.0 / 41.0, 5.0 / 15.0])
        np.testing.assert_allclose(sample.sigma ** 2, sample.p / sample.rho)
        np.testing.assert_allclose(sample.nu2, self.mixture.volumetric_fraction(sample.eta2))
        self.assertTrue(np.all(sample.nu2 > sample.eta2))

    def test_pure_constituents(self):
        natural = self.mixture.partials_to_equivalents(50.0, 0.0)
        hydrogen = self.mixture.partials_to_equivalents(0.0, 2.0)
        self.assertAlmostEqual(float(natural.sigma), 377.0)
        self.assertAlmostEqual(float(hydrogen.sigma), 2.8 * 377.0)
        self.assertEqual(float(natural.eta2), 0.0)
        self.assertEqual(float(hydrogen.nu2), 1.0)
        self.assertAlmostEqual(float(self.mixture.mixture_wave_speed(0.0)), 377.0)

    def test_equivalent_variables_agree(self):
        rng = np.random.default_rng(7)
        rho1 = rng.uniform(1.0, 60.0, 20)
        rho2 = rng.uniform(0.0, 5.0, 20)
        sample = self.mixture.partials_to_equivalents(rho1, rho2)

        from_pressure = self.mixture.partials_from_pressure_fraction(sample.p, sample.eta2)
        from_density = self.mixture.partials_from_density_volumetric(sample.rho, sample.nu2)
        for recovered in (from_pressure, from_density):
            np.testing.assert_allclose(recovered[0], rho1, rtol=1e-12)
            np.testing.assert_allclose(recovered[1], rho2, rtol=1e-12, atol=1e-12)

    def test_invalid_inputs(self):
        with self.assertRaises(DegenerateMixtureError):
            self.mixture.partials_to_equivalents(0.0, 0.0)
        with self.assertRaises(DegenerateMixtureError):
            self.mixture.partials_to_equivalents(-1.0, 2.0)
        with self.assertRaises(MixtureFractionError):
            self.mixture.mixture_wave_speed(1.2)
        with self.assertRaises(MixtureFractionError):
            self.mixture.partials_from_pressure_fraction(5e6, -0.1)
        with self.assertRaises(MixtureFractionError):
            GasMixture(GasPair(sigma1=400.0, sigma2=300.0))

    def test_nodal_energy(self):
        # two edges into node 0, one into node 1
        Q_d_pos = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        areas = np.array([0.5, 0.5, 0.2])
        flux = np.array([100.0, 60.0, 50.0])
        energy = self.mixture.nodal_energy(flux, areas, Q_d_pos, np.array([1.0, 0.9]), np.array([0.0, 0.1]))
        np.testing.assert_allclose(energy, [80.0 * 44.2e-3, 10.0 * (0.9 * 44.2 + 0.1 * 141.8) * 1e-3])
        with self.assertRaises(DimensionMismatchError):
            self.mixture.nodal_energy(flux[:2], areas, Q_d_pos, np.ones(2), np.zeros(2))


if __name__ == "__main__":
    unittest.main()
