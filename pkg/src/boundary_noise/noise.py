"""Boundary noise families and their samplers.

Every family is stored as a finite truncation.  Samplers are pure functions
of ``(spec, seed)``: the seed is fed to :func:`numpy.random.default_rng`, so an
integer, a :class:`numpy.random.SeedSequence` or an existing ``Generator`` may
be passed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .domains import BoundaryQuadrature, TimeGrid
from .errors import ConfigurationError, DomainError, UsageError

log = logging.getLogger(__name__)

__all__ = [
    "DiscreteMeasure",
    "WhiteNoise",
    "CylFractionalWiener",
    "SignedMeasureSeries",
    "HomogeneousWiener",
    "PoissonMeasure",
    "NoiseRealization",
    "basis_matrix",
    "fbm_covariance",
    "fbm_cholesky",
    "sample_elliptic_white",
    "sample_elliptic_coefficients",
    "sample_fbm_paths",
    "sample_bm_paths",
    "sample_noise_paths",
    "sample_poisson_measure",
    "sample_homogeneous_coeffs",
    "path_increments",
]


def _check_hurst(H):
    if not 0.0 < H < 1.0:
        raise DomainError(f"Hurst index must lie in (0, 1), got {H}")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite signed measure ``sum_i masses[i] * delta_{nodes[i]}`` on the boundary."""

    nodes: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if len(nodes) != len(masses):
            raise ConfigurationError("a discrete measure needs one mass per node")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "masses", masses)

    @property
    def total_variation(self):
        return float(np.sum(np.abs(self.masses)))

    def integrate(self, values):
        return np.tensordot(self.masses, np.asarray(values), axes=(0, 0))


@dataclass(frozen=True)
class WhiteNoise:
    """Gaussian white noise ``sum_k gamma_k e_k nu`` truncated to ``K`` basis functions.

    ``basis`` is ``"fourier"`` (trigonometric basis, circle boundaries only) or
    ``"indicator"`` (normalised indicators of the quadrature nodes, orthonormal
    for the discrete measure).  ``"auto"`` picks Fourier on the circle and
    indicators otherwise.
    """

    quadrature: BoundaryQuadrature
    K: int
    basis: str = "auto"
    family = "white"
    H = 0.5

    def __post_init__(self):
        _validate_basis(self.quadrature, self.K, self.basis)


@dataclass(frozen=True)
class CylFractionalWiener:
    """Cylindrical fractional Wiener process ``sum_k W_k^H(t) e_k nu``."""

    quadrature: BoundaryQuadrature
    K: int
    H: float = 0.5
    basis: str = "auto"
    family = "cylindrical"

    def __post_init__(self):
        _check_hurst(self.H)
        _validate_basis(self.quadrature, self.K, self.basis)


@dataclass(frozen=True)
class SignedMeasureSeries:
    """``sum_k gamma_k nu_k`` (elliptic) or ``sum_k W_k^H nu_k`` (parabolic).

    ``variation_sq_sum`` records the finite sum of squared total variations of
    the stored measures; ``tail_mass`` is the (optional, user supplied) sum
    over the measures dropped by the truncation.
    """

    measures: tuple
    H: float = 0.5
    tail_mass: float | None = None
    family = "signed-measures"

    def __post_init__(self):
        _check_hurst(self.H)
        measures = tuple(self.measures)
        if not measures:
            raise ConfigurationError("at least one measure is required")
        for mu in measures:
            if not isinstance(mu, DiscreteMeasure):
                raise ConfigurationError("measures must be DiscreteMeasure instances")
        object.__setattr__(self, "measures", measures)
        if not np.isfinite(self.variation_sq_sum):
            raise ConfigurationError("sum of squared total variations must be finite")

    @property
    def K(self):
        return len(self.measures)

    @property
    def variation_sq_sum(self):
        return float(sum(mu.total_variation**2 for mu in self.measures))


@dataclass(frozen=True, eq=False)
class HomogeneousWiener:
    """Spatially homogeneous Wiener process on ``R^m`` with a discrete spectral measure.

    ``atoms`` has shape ``(n, m)``; the atom set must be symmetric under
    ``eta -> -eta`` with equal masses.  Each atom contributes one real
    degree of freedom, so ``K == n``.
    """

    atoms: np.ndarray
    masses: np.ndarray
    family = "homogeneous"
    H = 0.5

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if len(atoms) != len(masses):
            raise ConfigurationError("one mass per spectral atom is required")
        if np.any(masses < 0):
            raise ConfigurationError("spectral masses must be nonnegative")
        pairs = _symmetric_pairs(atoms, masses)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_pairs", pairs)

    @property
    def m(self):
        return self.atoms.shape[1]

    @property
    def K(self):
        return len(self.masses)

    @property
    def total_mass(self):
        return float(np.sum(self.masses))

    @classmethod
    def white(cls, m=1, cutoff=8.0, n=64):
        """Flat spectral density ``(2 pi)^{-m/2}`` discretised on a symmetric grid.

        This is the white-noise case of the homogeneous family.  Only ``m=1``
        is offered: a midpoint grid on ``[-cutoff, cutoff]``.
        """
        if m != 1:
            raise ConfigurationError("flat spectral discretisation implemented for m=1 only")
        if n % 2:
            raise ConfigurationError("use an even number of atoms so the grid avoids 0")
        h = 2.0 * cutoff / n
        eta = -cutoff + h * (np.arange(n) + 0.5)
        return cls(eta[:, None], np.full(n, h * (2.0 * np.pi) ** (-0.5)))

    def modes(self):
        """Real modes ``(eta, amplitude, kind)`` realising the covariance.

        A pair ``+-eta`` of mass ``mu`` gives a cosine and a sine mode with
        amplitude ``sqrt(2 mu)``; an atom at the origin gives a constant mode
        with amplitude ``sqrt(mu)``.
        """
        return self._pairs


def _symmetric_pairs(atoms, masses, tol=1e-12):
    used = np.zeros(len(masses), dtype=bool)
    eta_list, amp_list, kind_list = [], [], []
    for i in range(len(masses)):
        if used[i]:
            continue
        if np.all(np.abs(atoms[i]) <= tol):
            used[i] = True
            eta_list.append(atoms[i])
            amp_list.append(np.sqrt(masses[i]))
            kind_list.append(0)
            continue
        match = np.where(~used & np.all(np.abs(atoms + atoms[i]) <= tol, axis=1))[0]
        if len(match) == 0 or abs(masses[match[0]] - masses[i]) > tol * max(1.0, masses[i]):
            raise ConfigurationError(
                f"spectral measure is not symmetric: atom {atoms[i].tolist()} has no mirror"
            )
        j = match[0]
        used[i] = used[j] = True
        for kind in (1, 2):
            eta_list.append(atoms[i])
            amp_list.append(np.sqrt(2.0 * masses[i]))
            kind_list.append(kind)
    return np.array(eta_list), np.array(amp_list), np.array(kind_list)


@dataclass(frozen=True, eq=False)
class PoissonMeasure:
    """Poisson random measure with discretised intensity ``sum_i masses[i] delta_{nodes[i]}``.

    ``rho`` maps boundary points to marks; ``None`` means ``rho = 1``.
    """

    nodes: np.ndarray
    masses: np.ndarray
    rho: Callable | None = None
    family = "poisson"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if len(nodes) != len(masses):
            raise ConfigurationError("one intensity mass per node is required")
        if np.any(masses < 0):
            raise ConfigurationError("intensity masses must be nonnegative")
        if not np.isfinite(np.sum(masses)):
            raise ConfigurationError("intensity must have finite total mass; truncate it first")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_quadrature(cls, quadrature, rate=1.0, rho=None):
        return cls(quadrature.nodes, rate * quadrature.weights, rho)

    @property
    def total_mass(self):
        return float(np.sum(self.masses))

    def marks(self, y):
        if self.rho is None:
            return np.ones(len(y))
        return np.asarray([self.rho(yi) for yi in y], dtype=float)

    @property
    def node_marks(self):
        return self.marks(self.nodes)


@dataclass
class NoiseRealization:
    """One draw (or a batch of draws) of a boundary noise.

    ``coefficients``: elliptic Gaussian coefficients, shape ``(K,)`` or ``(N, K)``.
    ``paths``: processes sampled on ``grid``, shape ``(K, n)`` or ``(N, K, n)``.
    ``points``: Poisson points as arrays ``(times, node_index, marks)``; times
    are ``None`` for the elliptic Poisson measure.
    """

    spec: object
    coefficients: np.ndarray | None = None
    paths: np.ndarray | None = None
    grid: TimeGrid | None = None
    points: tuple | None = None
    seed: object = field(default=None, repr=False)


def _on_circle(quadrature):
    nodes = quadrature.nodes
    return nodes.ndim == 2 and nodes.shape[1] == 2 and np.allclose(
        np.linalg.norm(nodes, axis=1), 1.0, atol=1e-12
    )


def _resolve_basis(quadrature, basis):
    if basis == "auto":
        return "fourier" if _on_circle(quadrature) else "indicator"
    return basis


def _validate_basis(quadrature, K, basis):
    if K < 1:
        raise ConfigurationError("truncation order K must be at least 1")
    kind = _resolve_basis(quadrature, basis)
    if kind == "fourier":
        if not _on_circle(quadrature):
            raise ConfigurationError("the Fourier basis needs nodes on the unit circle")
        if K >= len(quadrature):
            raise ConfigurationError(
                f"Fourier basis of size K={K} is not discretely orthonormal on {len(quadrature)} nodes"
            )
    elif kind == "indicator":
        if K > len(quadrature):
            raise ConfigurationError("indicator basis has at most one function per node")
        if np.any(quadrature.weights[:K] <= 0):
            raise ConfigurationError("indicator basis needs positive weights")
    else:
        raise ConfigurationError(f"unknown basis {basis!r}")


def basis_matrix(spec):
    """Values ``e_k(y_i)`` of the orthonormal basis, shape ``(K, n_nodes)``."""
    q = spec.quadrature
    kind = _resolve_basis(q, spec.basis)
    n = len(q)
    if kind == "indicator":
        E = np.zeros((spec.K, n))
        idx = np.arange(spec.K)
        E[idx, idx] = 1.0 / np.sqrt(q.weights[: spec.K])
        return E
    theta = np.arctan2(q.nodes[:, 1], q.nodes[:, 0])
    mass = q.mass
    E = np.empty((spec.K, n))
    E[0] = 1.0 / np.sqrt(mass)
    for k in range(1, spec.K):
        j = (k + 1) // 2
        E[k] = np.sqrt(2.0 / mass) * (np.cos(j * theta) if k % 2 else np.sin(j * theta))
    return E


def sample_elliptic_white(spec, rng_seed, size=None):
    """Draw the Gaussian coefficients of elliptic white noise.

    Returns ``K`` independent standard normals (``(size, K)`` when batched).
    """
    if not isinstance(spec, WhiteNoise):
        raise UsageError(f"sample_elliptic_white needs a WhiteNoise spec, got {type(spec).__name__}")
    rng = np.random.default_rng(rng_seed)
    shape = (spec.K,) if size is None else (size, spec.K)
    return NoiseRealization(spec, coefficients=rng.standard_normal(shape), seed=rng_seed)


def sample_elliptic_coefficients(spec, rng_seed, size=None):
    """Standard normal coefficients for any Gaussian family (elliptic case)."""
    if isinstance(spec, PoissonMeasure):
        raise UsageError("Poisson noise has no Gaussian coefficients; use sample_poisson_measure")
    rng = np.random.default_rng(rng_seed)
    shape = (spec.K,) if size is None else (size, spec.K)
    return NoiseRealization(spec, coefficients=rng.standard_normal(shape), seed=rng_seed)


def fbm_covariance(H, t, s=None):
    """``R(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`` on the outer grid."""
    t = np.asarray(t, dtype=float)
    s = t if s is None else np.asarray(s, dtype=float)
    tt, ss = np.meshgrid(t, s, indexing="ij")
    h2 = 2.0 * H
    return 0.5 * (tt**h2 + ss**h2 - np.abs(tt - ss) ** h2)


@lru_cache(maxsize=32)
def _cholesky_cached(H, nodes_bytes):
    nodes = np.frombuffer(nodes_bytes, dtype=float)
    C = fbm_covariance(H, nodes)
    try:
        return np.linalg.cholesky(C), 0.0
    except np.linalg.LinAlgError:
        pass
    for jitter in (1e-15, 1e-14, 1e-13, 1e-12):
        try:
            L = np.linalg.cholesky(C + jitter * np.eye(len(nodes)))
        except np.linalg.LinAlgError:
            continue
        log.warning("fBM covariance needed diagonal jitter %.1e", jitter)
        return L, jitter
    lam = float(np.linalg.eigvalsh(C)[0])
    raise np.linalg.LinAlgError(
        f"fBM covariance (H={H}, n={len(nodes)}) not positive definite even with "
        f"jitter 1e-12; smallest eigenvalue {lam:.3e}"
    )


def fbm_cholesky(H, grid):
    """Lower Cholesky factor of the fBM covariance on the grid nodes, and the jitter used."""
    _check_hurst(H)
    nodes = np.ascontiguousarray(grid.nodes, dtype=float)
    L, jitter = _cholesky_cached(float(H), nodes.tobytes())
    return L, jitter


def sample_fbm_paths(H, grid, K, rng_seed, size=None):
    """``K`` independent fractional Brownian paths on ``grid`` (dense Cholesky).

    Returns an array of shape ``(K, len(grid))`` (``(size, K, len(grid))`` when
    batched); the value at the implicit origin is 0.
    """
    _check_hurst(H)
    L, _ = fbm_cholesky(H, grid)
    rng = np.random.default_rng(rng_seed)
    shape = (K, len(grid)) if size is None else (size, K, len(grid))
    Z = rng.standard_normal(shape)
    return Z @ L.T


def sample_bm_paths(grid, K, rng_seed, size=None):
    """Standard Brownian paths from independent Gaussian increments."""
    rng = np.random.default_rng(rng_seed)
    shape = (K, len(grid)) if size is None else (size, K, len(grid))
    dW = rng.standard_normal(shape) * np.sqrt(grid.steps)
    return np.cumsum(dW, axis=-1)


def path_increments(paths):
    """Increments along the last axis, with the path started at 0."""
    paths = np.asarray(paths)
    zero = np.zeros(paths.shape[:-1] + (1,))
    return np.diff(np.concatenate([zero, paths], axis=-1), axis=-1)


def sample_noise_paths(spec, grid, rng_seed, size=None):
    """Paths ``W_k^H`` for a series-type parabolic noise (BM when ``H = 1/2``)."""
    if isinstance(spec, PoissonMeasure):
        raise UsageError("Poisson noise is sampled with sample_poisson_measure")
    H = getattr(spec, "H", 0.5)
    if H == 0.5:
        paths = sample_bm_paths(grid, spec.K, rng_seed, size)
    else:
        paths = sample_fbm_paths(H, grid, spec.K, rng_seed, size)
    return NoiseRealization(spec, paths=paths, grid=grid, seed=rng_seed)


def sample_homogeneous_coeffs(spec, grid, rng_seed, size=None):
    """``K`` independent Brownian paths paired with the spectral atoms of ``spec``."""
    if not isinstance(spec, HomogeneousWiener):
        raise UsageError("sample_homogeneous_coeffs needs a HomogeneousWiener spec")
    return NoiseRealization(spec, paths=sample_bm_paths(grid, spec.K, rng_seed, size), grid=grid, seed=rng_seed)


def sample_poisson_measure(spec, T, rng_seed):
    """Points of a Poisson random measure with intensity ``dt x nu`` on ``(0, T] x boundary``.

    ``T=None`` samples the elliptic (time-free) Poisson measure with intensity
    ``nu``.  Returns a realization whose ``points`` are ``(times, node_index,
    marks)`` with times sorted increasingly.
    """
    if not isinstance(spec, PoissonMeasure):
        raise UsageError("sample_poisson_measure needs a PoissonMeasure spec")
    rng = np.random.default_rng(rng_seed)
    lam = spec.total_mass
    horizon = 1.0 if T is None else float(T)
    if horizon <= 0:
        raise DomainError("Poisson horizon must be positive")
    count = int(rng.poisson(horizon * lam)) if lam > 0 else 0
    if count:
        idx = rng.choice(len(spec.masses), size=count, p=spec.masses / lam)
        times = None if T is None else np.sort(horizon * (1.0 - rng.random(count)))
    else:
        idx = np.zeros(0, dtype=int)
        times = None if T is None else np.zeros(0)
    marks = spec.node_marks[idx] if count else np.zeros(0)
    return NoiseRealization(spec, points=(times, idx, marks), seed=rng_seed)

