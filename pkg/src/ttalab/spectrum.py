"""2D discrete Fourier analysis, zero-insertion upsampling, and a checkerboard-artifact score.

Conventions, fixed once and verified against a naive double-sum oracle in the tests:

* the forward transform carries the full ``1/(M*N)`` factor, so ``X(0,0)`` is the
  image mean and the inverse transform carries the matching ``M*N``;
* ``circular_convolve`` also carries ``1/(M*N)``, which makes
  ``dft2(circular_convolve(a, b)) == dft2(a) * dft2(b)`` hold without any extra
  constant (the identity kernel is therefore ``M*N * delta``);
* the spectrum of a 2x-upsampled image is the 2x2 tiling of the base spectrum
  scaled by 1/4: ``dft2(upsample2x(x))[u, v] == dft2(x)[u % M, v % N] / 4``.
  The quadrants are pairwise equal exactly; only the relation to the base
  spectrum carries the 1/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Spectrum",
    "IdftResult",
    "ArtifactScore",
    "dft2",
    "idft2",
    "circular_convolve",
    "upsample2x",
    "checkerboard_score",
    "magnitude_csv",
]

# Non-DC energy below this fraction of total energy is treated as exact zero
# (a constant image's off-DC coefficients are pure rounding noise).
_ENERGY_FLOOR_REL = 1e-15


@dataclass(frozen=True)
class Spectrum:
    """Complex DFT coefficients of a single real image channel."""

    coeffs: np.ndarray  # complex, shape (M, N)

    @property
    def height(self) -> int:
        return self.coeffs.shape[0]

    @property
    def width(self) -> int:
        return self.coeffs.shape[1]

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        """True when coeffs could have come from a real image."""
        c = self.coeffs
        m, n = c.shape
        mirrored = np.conj(c[(-np.arange(m)) % m][:, (-np.arange(n)) % n])
        scale = max(float(np.abs(c).max()), 1.0)
        return bool(np.abs(c - mirrored).max() <= tol * scale)


@dataclass(frozen=True)
class IdftResult:
    """Inverse-transform output with the discarded imaginary part reported."""

    image: np.ndarray
    imag_residual: float
    hermitian_warning: bool  # set when the input could not have come from a real image


@dataclass(frozen=True)
class ArtifactScore:
    """Fraction of non-DC spectral energy sitting at replicated-band loci."""

    value: float
    grid_period: int


def dft2(image_channel: np.ndarray) -> Spectrum:
    """Forward 2D DFT of one real channel, mean-normalized (1/(M*N) on the sum)."""
    x = np.asarray(image_channel, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise ValueError(f"dft2 expects a nonempty 2D matrix, got shape {x.shape}")
    m, n = x.shape
    return Spectrum(np.fft.fft2(x) / (m * n))


def idft2(spec: Spectrum) -> IdftResult:
    """Invert :func:`dft2`; the imaginary residual is discarded but reported."""
    c = spec.coeffs
    m, n = c.shape
    z = np.fft.ifft2(c) * (m * n)
    residual = float(np.abs(z.imag).max()) if z.size else 0.0
    return IdftResult(
        image=z.real.copy(),
        imag_residual=residual,
        hermitian_warning=not spec.is_hermitian(),
    )


def circular_convolve(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Cyclic convolution carrying a 1/(M*N) factor.

    ``y(m,n) = (1/(M*N)) * sum_{k,l} x1(k,l) x2((m-k) mod M, (n-l) mod N)``,
    so spectra multiply exactly: ``dft2(y) = dft2(x1) * dft2(x2)``.
    """
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    m, n = a.shape
    return np.fft.ifft2(np.fft.fft2(a) * np.fft.fft2(b)).real / (m * n)


def upsample2x(image_channel: np.ndarray) -> np.ndarray:
    """Zero-insertion 2x upsampling: output(2i, 2j) = x(i, j), zero elsewhere."""
    x = np.asarray(image_channel, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"upsample2x expects a 2D matrix, got shape {x.shape}")
    m, n = x.shape
    out = np.zeros((2 * m, 2 * n), dtype=np.float64)
    out[::2, ::2] = x
    return out


def checkerboard_score(spec: Spectrum, grid_period: int = 2, top_k: int = 8) -> ArtifactScore:
    """Score periodic spectral replicas left by zero-insertion upsampling.

    The spectrum of a ``grid_period``-upsampled image repeats its base cell
    ``[0, M/g) x [0, N/g)`` across the whole plane. We locate the ``top_k``
    strongest base-cell coefficients and measure how much energy sits at their
    replicated positions in the other cells, as a fraction of total non-DC
    energy. Natural images put almost nothing there; upsampled ones do.
    """
    c = spec.coeffs
    m, n = c.shape
    g = int(grid_period)
    if g < 2 or m % g or n % g:
        raise ValueError(f"grid_period {g} must be >= 2 and divide both dims {m}x{n}")

    power = np.abs(c) ** 2
    total = float(power.sum())
    non_dc = total - float(power[0, 0])
    if non_dc <= _ENERGY_FLOOR_REL * max(total, np.finfo(np.float64).tiny):
        return ArtifactScore(value=0.0, grid_period=g)

    bm, bn = m // g, n // g
    base = power[:bm, :bn]
    k = min(top_k, base.size)
    # Flat argsort with a lexicographic tiebreak keeps peak choice deterministic.
    flat = base.ravel()
    order = np.lexsort((np.arange(flat.size), -flat))
    peaks = order[:k]
    pu, pv = np.unravel_index(peaks, base.shape)

    replicated = 0.0
    for a in range(g):
        for b in range(g):
            if a == 0 and b == 0:
                continue
            replicated += float(power[pu + a * bm, pv + b * bn].sum())
    return ArtifactScore(value=min(replicated / non_dc, 1.0), grid_period=g)


def magnitude_csv(spec: Spectrum, path: str) -> None:
    """Write the log1p-magnitude spectrum as a row-major CSV for external plotting."""
    mag = np.log1p(np.abs(spec.coeffs))
    np.savetxt(path, mag, delimiter=",", fmt="%.12g")
