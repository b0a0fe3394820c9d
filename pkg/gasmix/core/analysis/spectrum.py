from typing import Tuple
import numpy as np
from scipy.signal import find_peaks
from data.defs import DEFAULT_TAIL_START
from gasmix.core.error_handler import ErrorHandler, UndefinedNormalizationError, ValidationError
from gasmix.core.models.reports import Spectrum


class SpectrumAnalyzer:
    """
    A class used to measure how far a forced response is from periodic.

    The late part of a trajectory (by default the last 40% of the samples) is
    shifted by a reference level, transformed with the FFT and scaled so its
    largest modulus is one. A periodic response concentrates its power in a
    few bins; the mean squared modulus, times 100, grows as the spectrum
    broadens.

    Attributes
    ----------
    tail_start : float
        Fraction of the horizon after which samples enter the spectrum.
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` for logging degenerate signals.

    Methods
    -------
    dft_normalized(psi, span_hr)
        Normalized DFT of tail samples.
    power_spectrum_measure(t_hr, values, reference)
        Spectrum of the shifted tail with its periodicity measure.
    peak_frequencies(spectrum, height)
        Frequencies of the spectral peaks.
    bins_above(spectrum, fraction)
        Number of bins above a fraction of the peak.
    """

    def __init__(self, tail_start: float = DEFAULT_TAIL_START, error_handler: ErrorHandler = None):
        if not 0.0 <= tail_start < 1.0:
            raise ValidationError("tail_start must lie in [0, 1)")
        self.tail_start = tail_start
        self.error_handler = error_handler or ErrorHandler()

    def tail(self, t_hr: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Samples from index round(tail_start N) to N."""
        t_hr = np.asarray(t_hr, dtype=float)
        start = int(round(self.tail_start * (t_hr.size - 1)))
        return t_hr[start:], np.asarray(values, dtype=float)[start:]

    def dft_normalized(self, psi: np.ndarray, span_hr: float) -> Spectrum:
        """
        DFT of psi scaled so that its largest modulus is one.

        Args:
            psi: Tail samples
            span_hr: Duration covered by the samples; bin n has frequency n / span_hr

        Returns:
            Spectrum: Frequencies in cyc/hr and normalized complex values

        Raises:
            UndefinedNormalizationError: If the signal is identically zero
        """
        psi = np.asarray(psi, dtype=float)
        values = np.fft.fft(psi)
        peak = np.max(np.abs(values)) if values.size else 0.0
        if not peak > 0:
            self.error_handler.log_error(
                UndefinedNormalizationError("cannot normalize the spectrum of an all-zero signal"),
                "dft_normalized", raise_exception=True)
        return Spectrum(frequencies=np.arange(psi.size) / span_hr, values=values / peak)

    def power_spectrum_measure(self, t_hr: np.ndarray, values: np.ndarray, reference: float) -> Spectrum:
        """
        Periodicity measure of a trajectory around a reference level.

        Args:
            t_hr: Full output grid, hours
            values: Trajectory on that grid (outlet pressure)
            reference: Level subtracted before the transform (initial steady outlet pressure)

        Returns:
            Spectrum: Tail spectrum with ``measure`` = mean |F|^2 x 100
        """
        t_tail, tail = self.tail(t_hr, values)
        spectrum = self.dft_normalized(tail - reference, t_tail[-1] - t_tail[0])
        spectrum.measure = float(np.mean(spectrum.modulus ** 2) * 100.0)
        return spectrum

    @staticmethod
    def _half(spectrum: Spectrum) -> Tuple[np.ndarray, np.ndarray]:
        half = spectrum.frequencies.size // 2 + 1
        return spectrum.frequencies[:half], spectrum.modulus[:half]

    def peak_frequencies(self, spectrum: Spectrum, height: float = 0.05) -> np.ndarray:
        """Frequencies (up to Nyquist) of local maxima with modulus at least ``height``."""
        frequencies, modulus = self._half(spectrum)
        # pad so a maximum in bin 0 is also reported
        peaks, _ = find_peaks(np.concatenate([[0.0], modulus]), height=height)
        return frequencies[peaks - 1]

    def bins_above(self, spectrum: Spectrum, fraction: float = 0.01) -> int:
        """Bins (up to Nyquist) whose modulus exceeds ``fraction`` of the peak."""
        _, modulus = self._half(spectrum)
        return int(np.count_nonzero(modulus > fraction * np.max(modulus)))

    def has_subharmonics(self, spectrum: Spectrum, forcing_cyc_hr: float, height: float = 0.05) -> bool:
        """Whether a peak sits at an odd multiple of half the forcing frequency."""
        resolution = spectrum.frequencies[1] if spectrum.frequencies.size > 1 else np.inf
        for omega in self.peak_frequencies(spectrum, height):
            ratio = omega / (0.5 * forcing_cyc_hr)
            nearest = np.round(ratio)
            if nearest % 2 == 1 and abs(omega - nearest * 0.5 * forcing_cyc_hr) <= resolution:
                return True
        return False
