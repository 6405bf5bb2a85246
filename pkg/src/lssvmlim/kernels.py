"""Translation-invariant kernel profiles and Gram computations.

All kernels here are functions of the normalized squared distance
``u = ||x - y||^2 / p`` (``p`` the ambient dimension), so a profile is a
scalar function ``f`` on the nonnegative reals together with its first two
derivatives.  The polynomial profile is a polynomial *in the squared
distance*, not the usual inner-product polynomial kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class GaussianKernel:
    """Radial basis profile ``f(u) = exp(-u / (2 sigma2))``."""

    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")

    def value(self, u):
        return np.exp(np.asarray(u, dtype=float) / (-2.0 * self.sigma2))

    def derivatives(self, u):
        f = float(np.exp(-float(u) / (2.0 * self.sigma2)))
        return f, -f / (2.0 * self.sigma2), f / (4.0 * self.sigma2**2)


@dataclass(frozen=True)
class PolynomialKernel:
    """Polynomial profile ``f(u) = sum_i coeffs[i] * u**i`` of the squared
    distance, low order first."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("polynomial kernel needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def value(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for c in reversed(self.coeffs):
            out = out * u + c
        return out

    def derivatives(self, u):
        u = float(u)
        f = fp = fpp = 0.0
        for c in reversed(self.coeffs):
            fpp = fpp * u + 2.0 * fp
            fp = fp * u + f
            f = f * u + c
        return f, fp, fpp


@dataclass(frozen=True)
class TaylorKernel:
    """Locally specified profile: the exact quadratic

        ``f(u) = f0 + f1 (u - anchor) + f2 (u - anchor)^2 / 2``

    realizing a kernel of which only the value and first two derivatives at
    ``anchor`` are prescribed.  It may take negative values away from the
    anchor; that is accepted (the Gram matrix need not be PSD) because the
    evaluated arguments concentrate near the anchor in the intended regime.
    """

    anchor: float
    f0: float
    f1: float
    f2: float

    def value(self, u):
        d = np.asarray(u, dtype=float) - self.anchor
        return self.f0 + self.f1 * d + 0.5 * self.f2 * d * d

    def derivatives(self, u):
        d = float(u) - self.anchor
        return (
            self.f0 + self.f1 * d + 0.5 * self.f2 * d * d,
            self.f1 + self.f2 * d,
            self.f2,
        )


KernelProfile = Union[GaussianKernel, PolynomialKernel, TaylorKernel]


def eval_kernel(profile: KernelProfile, u):
    """Evaluate ``f(u)``; accepts scalars or arrays, ``u >= 0``."""
    return profile.value(u)


def local_derivatives(profile: KernelProfile, tau: float):
    """Exact ``(f(tau), f'(tau), f''(tau))``, always analytic (never a
    finite-difference approximation)."""
    return profile.derivatives(tau)


def _sq_norms(X):
    return np.einsum("ij,ij->j", X, X)


def pairwise_sq_dists(X: np.ndarray) -> np.ndarray:
    """Pairwise squared distances of the columns of ``X``, computed via the
    inner-product expansion with round-off clamped at zero.

    The result is exactly symmetric with an exactly zero diagonal.
    """
    X = np.asarray(X, dtype=float)
    g = X.T @ X
    d = np.einsum("ii->i", g).copy()
    D = d[:, None] + d[None, :] - 2.0 * g
    D = 0.5 * (D + D.T)  # exact symmetry: IEEE addition is commutative
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D


def gram_matrix(data: np.ndarray, profile: KernelProfile) -> np.ndarray:
    """Kernel matrix ``K[i, j] = f(||x_i - x_j||^2 / p)`` over the columns
    ``x_i`` of ``data`` (shape ``p x n``).

    ``K`` is symmetric by construction with diagonal exactly ``f(0)``.
    """
    X = np.asarray(data, dtype=float)
    p = X.shape[0]
    return profile.value(pairwise_sq_dists(X) / p)


def kernel_vector(data: np.ndarray, x: np.ndarray, profile: KernelProfile) -> np.ndarray:
    """Kernel evaluations ``f(||x - x_j||^2 / p)`` against the columns of
    ``data``.

    ``x`` may be a single ``p``-vector (returns an ``n``-vector) or a
    ``p x m`` matrix of query points (returns ``n x m``).
    """
    X = np.asarray(data, dtype=float)
    p = X.shape[0]
    q = np.asarray(x, dtype=float)
    single = q.ndim == 1
    if single:
        q = q[:, None]
    U = _sq_norms(X)[:, None] + _sq_norms(q)[None, :] - 2.0 * (X.T @ q)
    np.maximum(U, 0.0, out=U)
    out = profile.value(U / p)
    return out[:, 0] if single else out


def kernel_from_spec(spec: dict) -> KernelProfile:
    """Build a profile from its config-file form.

    Grammar::

        {"kind": "gaussian",   "sigma2": 1.0}
        {"kind": "polynomial", "coeffs": [a0, a1, ...]}
        {"kind": "local",      "tau": 2.0, "f": 4.0, "fp": 0.0, "fpp": 2.0}
    """
    kind = spec.get("kind")
    if kind == "gaussian":
        return GaussianKernel(float(spec["sigma2"]))
    if kind == "polynomial":
        return PolynomialKernel(tuple(spec["coeffs"]))
    if kind == "local":
        return TaylorKernel(
            float(spec["tau"]), float(spec["f"]), float(spec["fp"]), float(spec["fpp"])
        )
    raise ValueError(f"unknown kernel kind: {kind!r}")


def kernel_to_spec(profile: KernelProfile) -> dict:
    """Inverse of :func:`kernel_from_spec`."""
    if isinstance(profile, GaussianKernel):
        return {"kind": "gaussian", "sigma2": profile.sigma2}
    if isinstance(profile, PolynomialKernel):
        return {"kind": "polynomial", "coeffs": list(profile.coeffs)}
    if isinstance(profile, TaylorKernel):
        return {
            "kind": "local",
            "tau": profile.anchor,
            "f": profile.f0,
            "fp": profile.f1,
            "fpp": profile.f2,
        }
    raise TypeError(f"not a kernel profile: {profile!r}")
