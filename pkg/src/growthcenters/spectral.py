"""Steady-state shares and the common asymptotic growth rate.

With constant coefficients the shares X_i = W_i / mean(W) settle on the
positive eigenvector of

    M = diag(a_i - sum_k a_ki) + A

normalised to mean 1, and every unit then grows at the Perron eigenvalue
Lambda of M, shifted by -b. The environment term is kept out of M: a uniform
diagonal shift moves every eigenvalue by the same amount and leaves the
eigenvectors untouched.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import EnvironmentTerm, GrowthSystem, is_irreducible
from .errors import ConvergenceError, InputError, NumericalError


@dataclass(frozen=True)
class SteadyState:
    lam: float
    x: np.ndarray
    a_tilde: np.ndarray
    residual: float
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "x": self.x.tolist(),
            "a_tilde": self.a_tilde.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
        }


def build_matrix(system: GrowthSystem) -> np.ndarray:
    m = system.coupling.copy()
    m[np.diag_indices(system.n)] = system.a - system.outflow
    return m


def dominant_eigenpair(m, tol: float = 1e-12, max_iter: int = 100_000) -> SteadyState:
    """Perron pair of a Metzler matrix by power iteration on M + sigma*I.

    sigma = 1 + max|M_ii| makes the shifted matrix non-negative with a strictly
    positive diagonal, so for irreducible M it is primitive and the iteration
    converges to the unique positive eigenvector. Iterates are kept at mean 1.

    Stops once the max-norm change between iterates, scaled by the observed
    contraction ratio r as change * r / (1 - r), and the residual
    ||Mx - Lambda x||_inf are both below ``tol``.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise InputError(f"matrix must be square, got {m.shape}")
    off = m - np.diag(np.diag(m))
    if np.any(off < 0):
        raise InputError("off-diagonal entries must be non-negative")
    if not is_irreducible(off):
        raise InputError("matrix is reducible; the positive eigenvector need not be unique")

    a_tilde = np.diag(m).copy()
    if n == 1:
        return SteadyState(float(m[0, 0]), np.ones(1), a_tilde, 0.0, 0)

    sigma = 1.0 + np.max(np.abs(a_tilde))
    shifted = m + sigma * np.eye(n)
    x = np.ones(n)
    prev_change = np.inf
    lam = np.nan
    residual = np.inf
    for it in range(1, max_iter + 1):
        y = shifted @ x
        y /= y.mean()
        change = np.max(np.abs(y - x))
        x = y
        ratio = change / prev_change if prev_change > 0 else 0.0
        prev_change = change
        if change <= 64 * np.finfo(float).eps * np.max(np.abs(x)):
            err = change  # at roundoff the ratio estimate is noise
        elif ratio >= 1.0:
            err = np.inf
        else:
            err = change * ratio / (1.0 - ratio)
        if change < tol and err < tol:
            mx = m @ x
            lam = float(mx.mean())
            residual = float(np.max(np.abs(mx - lam * x)))
            if residual <= tol:
                return SteadyState(lam, x, a_tilde, residual, it)
    mx = m @ x
    lam = float(mx.mean())
    residual = float(np.max(np.abs(mx - lam * x)))
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last change {prev_change:.3e}, residual {residual:.3e})",
        iterations=max_iter,
        last=SteadyState(lam, x, a_tilde, residual, max_iter),
    )


def steady_state(system: GrowthSystem, tol: float = 1e-12, max_iter: int = 100_000) -> SteadyState:
    return dominant_eigenpair(build_matrix(system), tol=tol, max_iter=max_iter)


def dense_positive_eigenpairs(m, sign_tol: float = 1e-9) -> list[tuple[float, np.ndarray]]:
    """Every eigenpair of ``m`` (LAPACK dense solver) whose eigenvector is real and single-signed.

    Intended as an independent small-n check on ``dominant_eigenpair``. Vectors
    are returned normalised to mean 1.
    """
    vals, vecs = np.linalg.eig(np.asarray(m, dtype=float))
    out = []
    for k in range(len(vals)):
        v = vecs[:, k]
        if abs(vals[k].imag) > 1e-12 or np.max(np.abs(v.imag)) > 1e-12:
            continue
        v = v.real
        scale = np.max(np.abs(v))
        if np.all(v > sign_tol * scale) or np.all(v < -sign_tol * scale):
            out.append((float(vals[k].real), v / v.mean()))
    return out


def lambda_consistency(steady: SteadyState, system: GrowthSystem) -> float:
    """|mean_j(a_j x_j) - Lambda|, zero at an exact steady state."""
    return abs(float(np.dot(system.a, steady.x)) / system.n - steady.lam)


def fixed_point_residual(steady: SteadyState, system: GrowthSystem) -> float:
    """max_i |x_i - sum_j a_ij x_j / (Lambda - a~_i)|."""
    denom = steady.lam - system.a_tilde
    if np.any(np.abs(denom) < 1e-14):
        i = int(np.argmin(np.abs(denom)))
        raise NumericalError(f"Lambda - a~_{i} = {denom[i]!r} is too close to zero")
    return float(np.max(np.abs(steady.x - (system.coupling @ steady.x) / denom)))


def asymptotic_rate(steady: SteadyState, env: EnvironmentTerm, w=None, t: float = 0.0) -> float:
    """Common late-time growth rate Lambda - b(W, t).

    ``w`` is only needed for state-dependent environments.
    """
    if not env.state_independent and w is None:
        raise InputError(f"environment {env.kind!r} needs the state to be evaluated")
    return steady.lam - env(np.asarray(w if w is not None else [1.0], dtype=float), t)
