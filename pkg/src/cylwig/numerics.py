"""Circle-Fourier primitives on uniform angle grids, plus the two special
functions the toolkit needs (third Jacobi theta, modified Bessel I0).

Everything here works on 2*pi-periodic data sampled on uniform nodes
``phi_j = -pi + 2*pi*j/n_phi``.  The rectangle rule on such nodes integrates
trigonometric polynomials of degree < n_phi exactly, which is the only kind
of integrand the rest of the package produces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

__all__ = [
    "TWO_PI",
    "AngleGrid",
    "PeriodicSamples",
    "circle_quadrature",
    "fourier_coefficient",
    "trig_interpolate",
    "theta3",
    "bessel_i0",
]


@dataclass(frozen=True)
class AngleGrid:
    """Uniform grid of ``n_phi`` nodes ``phi_j = -pi + 2*pi*j/n_phi``.

    ``n_phi`` must be even and at least 4 so that half-angle shifts map one
    uniform grid onto another.
    """

    n_phi: int

    def __post_init__(self):
        if self.n_phi < 4 or self.n_phi % 2 != 0:
            raise ValueError(
                f"n_phi must be an even integer >= 4, got {self.n_phi}"
            )

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n_phi

    @property
    def nodes(self) -> np.ndarray:
        phi = -np.pi + TWO_PI * np.arange(self.n_phi) / self.n_phi
        phi.flags.writeable = False
        return phi

    def node(self, j: int) -> float:
        return -np.pi + TWO_PI * j / self.n_phi


@dataclass(frozen=True)
class PeriodicSamples:
    """Complex samples of a 2*pi-periodic function on an :class:`AngleGrid`."""

    grid: AngleGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_phi,):
            raise ValueError(
                f"expected {self.grid.n_phi} samples, got shape {values.shape}"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


def circle_quadrature(samples: PeriodicSamples) -> complex:
    """Integrate over the 2*pi interval by the rectangle rule.

    Exact for trigonometric polynomials of degree < ``n_phi``.
    """
    return samples.grid.spacing * complex(samples.values.sum())


def fourier_coefficient(samples: PeriodicSamples, k: int) -> complex:
    """Circle Fourier transform ``(F g)(k) = (1/2pi) int g(phi) e^{i phi k} dphi``.

    Alias-free only for ``|k| < n_phi/2``; enforcing that is the caller's job.
    """
    phi = samples.grid.nodes
    return complex(np.sum(samples.values * np.exp(1j * k * phi)) / samples.grid.n_phi)


def _interp_coefficients(samples: PeriodicSamples):
    n = samples.grid.n_phi
    ks = np.arange(-(n // 2), n // 2 + 1)
    phi = samples.grid.nodes
    coef = (np.exp(1j * ks[:, None] * phi[None, :]) @ samples.values) / n
    # The two Nyquist harmonics +-n/2 coincide on the nodes; splitting the
    # measured content evenly keeps the interpolant exact there.
    coef[0] *= 0.5
    coef[-1] *= 0.5
    return ks, coef


def trig_interpolate(samples: PeriodicSamples, phi) -> complex | np.ndarray:
    """Evaluate the trigonometric interpolant at arbitrary angles.

    Returns ``sum_k (F g)(k) e^{-i k phi}`` over ``|k| <= n_phi/2`` with the
    Nyquist pair split evenly; reproduces the samples at grid nodes and is
    exact for band-limited inputs of degree < ``n_phi/2``.
    """
    ks, coef = _interp_coefficients(samples)
    phi_arr = np.asarray(phi, dtype=float)
    out = np.exp(-1j * phi_arr[..., None] * ks) @ coef
    if np.ndim(phi) == 0:
        return complex(out)
    return out


def theta3(z: float, q: float, eps: float = 1e-16) -> float:
    """Third Jacobi theta function ``theta3(z|q) = sum_n q^(n^2) e^(2 i n z)``.

    Real for real ``z``; the lattice sum stops once ``q^(n^2) < eps``.
    """
    if not 0.0 <= q < 1.0:
        raise ValueError(f"nome q must satisfy 0 <= q < 1, got {q}")
    total = 1.0
    n = 1
    while True:
        term = q ** (n * n)
        if term < eps:
            break
        total += 2.0 * term * np.cos(2.0 * n * z)
        n += 1
    return total


def bessel_i0(x: float, eps: float = 1e-16) -> float:
    """Modified Bessel function ``I0(x)`` by its power series.

    Terms ``(x/2)^(2m) / (m!)^2`` are accumulated until they drop below
    ``eps`` relative to the running sum.
    """
    if x < 0:
        raise ValueError(f"bessel_i0 requires x >= 0, got {x}")
    quarter_x2 = 0.25 * x * x
    total = 1.0
    term = 1.0
    m = 1
    while True:
        term *= quarter_x2 / (m * m)
        if term < eps * total:
            break
        total += term
        m += 1
    return total
