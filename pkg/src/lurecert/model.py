"""Plant, controller, and nonlinearity-class descriptions.

A Lur'e system couples a linear plant with a static nonlinearity applied
to the linear output y = C x.  The same data structures serve both the
continuous-time and discrete-time settings, distinguished by a domain tag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg

CONTINUOUS = "continuous"
DISCRETE = "discrete"
_DOMAINS = (CONTINUOUS, DISCRETE)

# Relative singular-value threshold for the row-full-rank check on C.
RANK_RTOL = 1e-9


def _spd(a, name: str) -> np.ndarray:
    s = linalg.as_sym(a, name)
    ok, lmin = linalg.is_pd(s)
    if not ok:
        raise ValueError(f"{name} must be positive definite (lambda_min={lmin:.3e})")
    return s


@dataclass(frozen=True)
class LureSystem:
    """Open-loop plant data (A, B, B_psi, C) plus the time-domain tag.

    C is required to be row full rank with n_x >= n_y; construction fails
    otherwise rather than silently tolerating a rank-deficient output map.
    """

    A: np.ndarray
    B: np.ndarray
    B_psi: np.ndarray
    C: np.ndarray
    domain: str

    def __post_init__(self):
        object.__setattr__(self, "A", linalg.as_matrix(self.A, "A"))
        object.__setattr__(self, "B", linalg.as_matrix(self.B, "B"))
        object.__setattr__(self, "B_psi", linalg.as_matrix(self.B_psi, "B_psi"))
        object.__setattr__(self, "C", linalg.as_matrix(self.C, "C"))
        if self.domain not in _DOMAINS:
            raise ValueError(f"domain must be one of {_DOMAINS}, got {self.domain!r}")
        nx = self.A.shape[0]
        if self.A.shape != (nx, nx):
            raise linalg.DimensionError(f"A must be square, got {self.A.shape}")
        for name, m in (("B", self.B), ("B_psi", self.B_psi)):
            if m.shape[0] != nx:
                raise linalg.DimensionError(f"{name} must have {nx} rows, got {m.shape}")
        if self.C.shape[1] != nx:
            raise linalg.DimensionError(f"C must have {nx} columns, got {self.C.shape}")
        ny = self.C.shape[0]
        if nx < ny:
            raise linalg.DimensionError(f"need n_x >= n_y, got n_x={nx}, n_y={ny}")
        sv = np.linalg.svd(self.C, compute_uv=False)
        if sv[-1] <= RANK_RTOL * sv[0]:
            raise ValueError(
                f"C is not row full rank (sigma_min/sigma_max = {sv[-1] / sv[0]:.3e})"
            )

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]

    @property
    def n_psi(self) -> int:
        return self.B_psi.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class Gains:
    """State-feedback gain K and nonlinearity feedthrough gain K_psi."""

    K: np.ndarray
    K_psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "K", linalg.as_matrix(self.K, "K"))
        object.__setattr__(self, "K_psi", linalg.as_matrix(self.K_psi, "K_psi"))
        if self.K.shape[0] != self.K_psi.shape[0]:
            raise linalg.DimensionError(
                f"K and K_psi disagree on n_u: {self.K.shape[0]} vs {self.K_psi.shape[0]}"
            )


@dataclass(frozen=True)
class ClosedLoop:
    """Closed-loop Lur'e form: A_cl = A + B K, B_cl = B_psi + B K_psi."""

    A_cl: np.ndarray
    B_cl: np.ndarray
    C: np.ndarray
    domain: str

    def __post_init__(self):
        object.__setattr__(self, "A_cl", linalg.as_matrix(self.A_cl, "A_cl"))
        object.__setattr__(self, "B_cl", linalg.as_matrix(self.B_cl, "B_cl"))
        object.__setattr__(self, "C", linalg.as_matrix(self.C, "C"))
        if self.domain not in _DOMAINS:
            raise ValueError(f"domain must be one of {_DOMAINS}, got {self.domain!r}")
        nx = self.A_cl.shape[0]
        if self.A_cl.shape != (nx, nx):
            raise linalg.DimensionError(f"A_cl must be square, got {self.A_cl.shape}")
        if self.B_cl.shape[0] != nx or self.C.shape[1] != nx:
            raise linalg.DimensionError("B_cl/C dimensions inconsistent with A_cl")

    @property
    def n_x(self) -> int:
        return self.A_cl.shape[0]

    @property
    def n_psi(self) -> int:
        return self.B_cl.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class Lipschitz:
    """Lipschitz bound rho with weighted input/output norms.

    Increments satisfy  dPsi^T Theta_psi dPsi <= rho^2 dy^T Theta_y dy.
    """

    rho: float
    theta_y: np.ndarray
    theta_psi: np.ndarray

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        object.__setattr__(self, "theta_y", _spd(self.theta_y, "theta_y"))
        object.__setattr__(self, "theta_psi", _spd(self.theta_psi, "theta_psi"))

    @property
    def n_y(self) -> int:
        return self.theta_y.shape[0]

    @property
    def n_psi(self) -> int:
        return self.theta_psi.shape[0]


@dataclass(frozen=True)
class SectorBounded:
    """Incremental sector bound [0, Gamma] with SPD weight Theta.

    Increments satisfy  dPsi^T Theta (dPsi - Gamma dy) <= 0, so Gamma maps
    output space to nonlinearity space (shape n_psi x n_y).
    """

    gamma: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", linalg.as_matrix(self.gamma, "gamma"))
        object.__setattr__(self, "theta", _spd(self.theta, "theta"))
        if self.gamma.shape[0] != self.theta.shape[0]:
            raise linalg.DimensionError(
                f"gamma rows {self.gamma.shape[0]} must equal theta dim {self.theta.shape[0]}"
            )

    @property
    def n_y(self) -> int:
        return self.gamma.shape[1]

    @property
    def n_psi(self) -> int:
        return self.gamma.shape[0]


@dataclass(frozen=True)
class Monotone:
    """Monotone nonlinearity with SPD upper bound Gamma (requires n_y = n_psi).

    The symmetrized Jacobian lies between 0 and Gamma in the semidefinite
    order.
    """

    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", _spd(self.gamma, "gamma"))

    @property
    def n_y(self) -> int:
        return self.gamma.shape[0]

    @property
    def n_psi(self) -> int:
        return self.gamma.shape[0]


NonlinearityClass = Lipschitz | SectorBounded | Monotone


@dataclass(frozen=True)
class NonlinearFn:
    """A concrete nonlinearity y -> psi(y) with an optional analytic Jacobian.

    Evaluators must be pure; checkers and simulators assume repeated calls
    with the same input return the same output.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    n_y: int
    n_psi: int
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __call__(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.shape != (self.n_y,):
            raise linalg.DimensionError(
                f"input has shape {y.shape}, expected ({self.n_y},)"
            )
        out = np.atleast_1d(np.asarray(self.fn(y), dtype=float))
        if out.shape != (self.n_psi,):
            raise linalg.DimensionError(
                f"evaluator returned shape {out.shape}, expected ({self.n_psi},)"
            )
        return out

    def jac(self, y) -> Optional[np.ndarray]:
        """Analytic Jacobian at y, or None when not provided."""
        if self.jacobian is None:
            return None
        y = np.atleast_1d(np.asarray(y, dtype=float))
        j = np.asarray(self.jacobian(y), dtype=float).reshape(self.n_psi, self.n_y)
        return j


def close_loop(sys: LureSystem, g: Gains) -> ClosedLoop:
    """Assemble the closed loop A_cl = A + B K, B_cl = B_psi + B K_psi."""
    if g.K.shape != (sys.n_u, sys.n_x):
        raise linalg.DimensionError(
            f"K has shape {g.K.shape}, expected {(sys.n_u, sys.n_x)}"
        )
    if g.K_psi.shape != (sys.n_u, sys.n_psi):
        raise linalg.DimensionError(
            f"K_psi has shape {g.K_psi.shape}, expected {(sys.n_u, sys.n_psi)}"
        )
    return ClosedLoop(
        A_cl=sys.A + sys.B @ g.K,
        B_cl=sys.B_psi + sys.B @ g.K_psi,
        C=sys.C,
        domain=sys.domain,
    )


def recover_gains(w, z, k_psi) -> Gains:
    """Recover K = Z W^{-1} from a synthesis solution; K_psi passes through."""
    w = linalg.as_sym(w, "W")
    z = linalg.as_matrix(z, "Z")
    k = z @ linalg.inverse(w)
    return Gains(K=k, K_psi=k_psi)
