"""Construction of the contractivity matrix inequalities as affine pencils.

Each builder returns an AffinePencil whose evaluation at a variable
assignment equals the corresponding block matrix.  Analysis forms have the
certificate matrix P as the only decision variable (gains fixed); synthesis
forms are affine in (W, Z, K_psi) and yield gains via K = Z W^{-1}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from .model import (
    ClosedLoop,
    CONTINUOUS,
    DISCRETE,
    Gains,
    Lipschitz,
    LureSystem,
    Monotone,
    NonlinearityClass,
    SectorBounded,
    close_loop,
)
from .pencil import AffinePencil, VariableLayout, pencil_from_function

# Inequality tags.  "analysis" forms are in P; "synthesis" forms in (W, Z, K_psi).
CT_LIP_ANALYSIS = "CT-Lip-analysis"
CT_LIP_SYNTHESIS = "CT-Lip-synthesis"
DT_LIP_ANALYSIS = "DT-Lip-analysis"
DT_LIP_SYNTHESIS = "DT-Lip-synthesis"
CT_SEC_ANALYSIS = "CT-Sec-analysis"
CT_SEC_SYNTHESIS = "CT-Sec-synthesis"
DT_SEC_ANALYSIS = "DT-Sec-analysis"
DT_SEC_SYNTHESIS = "DT-Sec-synthesis"
CT_LIP_CONSERVATIVE = "CT-Lip-conservative"

ALL_TAGS = (
    CT_LIP_ANALYSIS, CT_LIP_SYNTHESIS, DT_LIP_ANALYSIS, DT_LIP_SYNTHESIS,
    CT_SEC_ANALYSIS, CT_SEC_SYNTHESIS, DT_SEC_ANALYSIS, DT_SEC_SYNTHESIS,
    CT_LIP_CONSERVATIVE,
)

_ANALYSIS_TAGS = (CT_LIP_ANALYSIS, DT_LIP_ANALYSIS, CT_SEC_ANALYSIS, DT_SEC_ANALYSIS)
_DT_TAGS = (DT_LIP_ANALYSIS, DT_LIP_SYNTHESIS, DT_SEC_ANALYSIS, DT_SEC_SYNTHESIS)
_LIP_TAGS = (
    CT_LIP_ANALYSIS, CT_LIP_SYNTHESIS, DT_LIP_ANALYSIS, DT_LIP_SYNTHESIS,
    CT_LIP_CONSERVATIVE,
)


class PreconditionError(ValueError):
    """An inequality builder's structural precondition is violated."""


def lower_monotone(nc: Monotone) -> SectorBounded:
    """Lower a monotone class to its equivalent sector bound [0, Gamma]
    with weight Gamma^{-1}."""
    return SectorBounded(gamma=nc.gamma, theta=linalg.inverse(nc.gamma))


def _check_eta(eta: float, domain: str) -> float:
    eta = float(eta)
    if domain == DISCRETE:
        if not 0 < eta < 1:
            raise PreconditionError(
                f"discrete-time contraction factor must satisfy 0 < eta < 1, got {eta}"
            )
    else:
        if not eta > 0:
            raise PreconditionError(f"contraction rate must be positive, got {eta}")
    return eta


def _check_lip_dims(nc: Lipschitz, n_y: int, n_psi: int):
    if nc.n_y != n_y or nc.n_psi != n_psi:
        raise linalg.DimensionError(
            f"Lipschitz class dims ({nc.n_y}, {nc.n_psi}) do not match "
            f"system dims ({n_y}, {n_psi})"
        )


def _check_sec_dims(nc: SectorBounded, n_y: int, n_psi: int):
    if nc.n_y != n_y or nc.n_psi != n_psi:
        raise linalg.DimensionError(
            f"sector class dims ({nc.n_y}, {nc.n_psi}) do not match "
            f"system dims ({n_y}, {n_psi})"
        )


def _require_bcl_nonzero(cl: ClosedLoop):
    # The analysis forms need B_cl != 0 to pin down a positive multiplier.
    if np.all(cl.B_cl == 0.0):
        raise PreconditionError("analysis form requires B_cl != 0")


def build_ct_lip_analysis(cl: ClosedLoop, nc: Lipschitz, eta: float) -> AffinePencil:
    """Continuous-time Lipschitz analysis inequality, variable P.

    Blocks (n_x, n_psi):
        [[<P A_cl> + 2 eta P + rho^2 C^T Theta_y C,  P B_cl],
         [B_cl^T P,                                  -Theta_psi]]
    """
    if cl.domain != CONTINUOUS:
        raise PreconditionError("continuous-time builder got a discrete-time loop")
    eta = _check_eta(eta, CONTINUOUS)
    _check_lip_dims(nc, cl.n_y, cl.n_psi)
    _require_bcl_nonzero(cl)
    const = nc.rho ** 2 * cl.C.T @ nc.theta_y @ cl.C
    layout = VariableLayout([VariableLayout.sym("P", cl.n_x)])

    def blocks(v):
        p = v["P"]
        return linalg.assemble_sym(
            [cl.n_x, cl.n_psi],
            {
                (0, 0): linalg.brack(p @ cl.A_cl) + 2 * eta * p + const,
                (0, 1): p @ cl.B_cl,
                (1, 1): -nc.theta_psi,
            },
        )

    return pencil_from_function(layout, blocks)


def build_ct_lip_synthesis(sys: LureSystem, nc: Lipschitz, eta: float) -> AffinePencil:
    """Continuous-time Lipschitz synthesis inequality, variables (W, Z, K_psi).

    Blocks (n_x, n_psi, n_y):
        [[<A W + B Z> + 2 eta W,  B_cl,        W C^T],
         [B_cl^T,                 -Theta_psi,  0],
         [C W,                    0,           -(1/rho^2) Theta_y^{-1}]]
    with B_cl = B_psi + B K_psi affine in K_psi.
    """
    if sys.domain != CONTINUOUS:
        raise PreconditionError("continuous-time builder got a discrete-time system")
    eta = _check_eta(eta, CONTINUOUS)
    _check_lip_dims(nc, sys.n_y, sys.n_psi)
    _warn_bcl_identically_zero(sys)
    thy_inv = linalg.inverse(nc.theta_y) / nc.rho ** 2
    layout = VariableLayout([
        VariableLayout.sym("W", sys.n_x),
        VariableLayout.mat("Z", sys.n_u, sys.n_x),
        VariableLayout.mat("K_psi", sys.n_u, sys.n_psi),
    ])

    def blocks(v):
        w, z, kp = v["W"], v["Z"], v["K_psi"]
        b_cl = sys.B_psi + sys.B @ kp
        return linalg.assemble_sym(
            [sys.n_x, sys.n_psi, sys.n_y],
            {
                (0, 0): linalg.brack(sys.A @ w + sys.B @ z) + 2 * eta * w,
                (0, 1): b_cl,
                (0, 2): w @ sys.C.T,
                (1, 1): -nc.theta_psi,
                (2, 2): -thy_inv,
            },
        )

    return pencil_from_function(layout, blocks)


def build_dt_lip_analysis(cl: ClosedLoop, nc: Lipschitz, eta: float) -> AffinePencil:
    """Discrete-time Lipschitz analysis inequality, variable P.

    Blocks (n_x, n_psi):
        [[A_cl^T P A_cl - eta^2 P + rho^2 C^T Theta_y C,  A_cl^T P B_cl],
         [B_cl^T P A_cl,                  B_cl^T P B_cl - Theta_psi]]
    Quadratic in A_cl, B_cl but affine in P.
    """
    if cl.domain != DISCRETE:
        raise PreconditionError("discrete-time builder got a continuous-time loop")
    eta = _check_eta(eta, DISCRETE)
    _check_lip_dims(nc, cl.n_y, cl.n_psi)
    _require_bcl_nonzero(cl)
    const = nc.rho ** 2 * cl.C.T @ nc.theta_y @ cl.C
    layout = VariableLayout([VariableLayout.sym("P", cl.n_x)])

    def blocks(v):
        p = v["P"]
        return linalg.assemble_sym(
            [cl.n_x, cl.n_psi],
            {
                (0, 0): cl.A_cl.T @ p @ cl.A_cl - eta ** 2 * p + const,
                (0, 1): cl.A_cl.T @ p @ cl.B_cl,
                (1, 1): cl.B_cl.T @ p @ cl.B_cl - nc.theta_psi,
            },
        )

    return pencil_from_function(layout, blocks)


def build_dt_lip_synthesis(sys: LureSystem, nc: Lipschitz, eta: float) -> AffinePencil:
    """Discrete-time Lipschitz synthesis inequality, variables (W, Z, K_psi).

    Blocks (n_x, n_psi, n_y, n_x):
        [[-eta^2 W,  0,           W C^T,                    (A W + B Z)^T],
         [0,         -Theta_psi,  0,                        B_cl^T],
         [C W,       0,           -(1/rho^2) Theta_y^{-1},  0],
         [A W + B Z, B_cl,        0,                        -W]]
    """
    if sys.domain != DISCRETE:
        raise PreconditionError("discrete-time builder got a continuous-time system")
    eta = _check_eta(eta, DISCRETE)
    _check_lip_dims(nc, sys.n_y, sys.n_psi)
    _warn_bcl_identically_zero(sys)
    thy_inv = linalg.inverse(nc.theta_y) / nc.rho ** 2
    layout = VariableLayout([
        VariableLayout.sym("W", sys.n_x),
        VariableLayout.mat("Z", sys.n_u, sys.n_x),
        VariableLayout.mat("K_psi", sys.n_u, sys.n_psi),
    ])

    def blocks(v):
        w, z, kp = v["W"], v["Z"], v["K_psi"]
        b_cl = sys.B_psi + sys.B @ kp
        awbz = sys.A @ w + sys.B @ z
        return linalg.assemble_sym(
            [sys.n_x, sys.n_psi, sys.n_y, sys.n_x],
            {
                (0, 0): -eta ** 2 * w,
                (0, 2): w @ sys.C.T,
                (0, 3): awbz.T,
                (1, 1): -nc.theta_psi,
                (1, 3): b_cl.T,
                (2, 2): -thy_inv,
                (3, 3): -w,
            },
        )

    return pencil_from_function(layout, blocks)


def _sector_g(c: np.ndarray, nc: SectorBounded) -> np.ndarray:
    # G = C^T Gamma^T Theta, an (n_x, n_psi) coupling matrix.
    return c.T @ nc.gamma.T @ nc.theta


def build_ct_sector_analysis(cl: ClosedLoop, nc: SectorBounded, eta: float) -> AffinePencil:
    """Continuous-time sector-bounded analysis inequality, variable P.

    Blocks (n_x, n_psi):
        [[<P A_cl> + 2 eta P,  P B_cl + G],
         [B_cl^T P + G^T,      -2 Theta]]
    with G = C^T Gamma^T Theta.
    """
    if cl.domain != CONTINUOUS:
        raise PreconditionError("continuous-time builder got a discrete-time loop")
    eta = _check_eta(eta, CONTINUOUS)
    _check_sec_dims(nc, cl.n_y, cl.n_psi)
    g = _sector_g(cl.C, nc)
    layout = VariableLayout([VariableLayout.sym("P", cl.n_x)])

    def blocks(v):
        p = v["P"]
        return linalg.assemble_sym(
            [cl.n_x, cl.n_psi],
            {
                (0, 0): linalg.brack(p @ cl.A_cl) + 2 * eta * p,
                (0, 1): p @ cl.B_cl + g,
                (1, 1): -2 * nc.theta,
            },
        )

    return pencil_from_function(layout, blocks)


def build_ct_sector_synthesis(sys: LureSystem, nc: SectorBounded, eta: float) -> AffinePencil:
    """Continuous-time sector-bounded synthesis inequality, variables (W, Z, K_psi).

    Blocks (n_x, n_psi):
        [[<A W + B Z> + 2 eta W,  B_cl + W G],
         [(B_cl + W G)^T,         -2 Theta]]
    """
    if sys.domain != CONTINUOUS:
        raise PreconditionError("continuous-time builder got a discrete-time system")
    eta = _check_eta(eta, CONTINUOUS)
    _check_sec_dims(nc, sys.n_y, sys.n_psi)
    _warn_bcl_identically_zero(sys)
    g = _sector_g(sys.C, nc)
    layout = VariableLayout([
        VariableLayout.sym("W", sys.n_x),
        VariableLayout.mat("Z", sys.n_u, sys.n_x),
        VariableLayout.mat("K_psi", sys.n_u, sys.n_psi),
    ])

    def blocks(v):
        w, z, kp = v["W"], v["Z"], v["K_psi"]
        b_cl = sys.B_psi + sys.B @ kp
        return linalg.assemble_sym(
            [sys.n_x, sys.n_psi],
            {
                (0, 0): linalg.brack(sys.A @ w + sys.B @ z) + 2 * eta * w,
                (0, 1): b_cl + w @ g,
                (1, 1): -2 * nc.theta,
            },
        )

    return pencil_from_function(layout, blocks)


def build_dt_sector_analysis(cl: ClosedLoop, nc: SectorBounded, eta: float) -> AffinePencil:
    """Discrete-time sector-bounded analysis inequality, variable P.

    Blocks (n_x, n_psi):
        [[A_cl^T P A_cl - eta^2 P,  A_cl^T P B_cl + G],
         [B_cl^T P A_cl + G^T,      B_cl^T P B_cl - 2 Theta]]
    """
    if cl.domain != DISCRETE:
        raise PreconditionError("discrete-time builder got a continuous-time loop")
    eta = _check_eta(eta, DISCRETE)
    _check_sec_dims(nc, cl.n_y, cl.n_psi)
    g = _sector_g(cl.C, nc)
    layout = VariableLayout([VariableLayout.sym("P", cl.n_x)])

    def blocks(v):
        p = v["P"]
        return linalg.assemble_sym(
            [cl.n_x, cl.n_psi],
            {
                (0, 0): cl.A_cl.T @ p @ cl.A_cl - eta ** 2 * p,
                (0, 1): cl.A_cl.T @ p @ cl.B_cl + g,
                (1, 1): cl.B_cl.T @ p @ cl.B_cl - 2 * nc.theta,
            },
        )

    return pencil_from_function(layout, blocks)


def build_dt_sector_synthesis(sys: LureSystem, nc: SectorBounded, eta: float) -> AffinePencil:
    """Discrete-time sector-bounded synthesis inequality, variables (W, Z, K_psi).

    Blocks (n_x, n_psi, n_x):
        [[-eta^2 W,   W G,       (A W + B Z)^T],
         [G^T W,      -2 Theta,  B_cl^T],
         [A W + B Z,  B_cl,      -W]]
    """
    if sys.domain != DISCRETE:
        raise PreconditionError("discrete-time builder got a continuous-time system")
    eta = _check_eta(eta, DISCRETE)
    _check_sec_dims(nc, sys.n_y, sys.n_psi)
    _warn_bcl_identically_zero(sys)
    g = _sector_g(sys.C, nc)
    layout = VariableLayout([
        VariableLayout.sym("W", sys.n_x),
        VariableLayout.mat("Z", sys.n_u, sys.n_x),
        VariableLayout.mat("K_psi", sys.n_u, sys.n_psi),
    ])

    def blocks(v):
        w, z, kp = v["W"], v["Z"], v["K_psi"]
        b_cl = sys.B_psi + sys.B @ kp
        awbz = sys.A @ w + sys.B @ z
        return linalg.assemble_sym(
            [sys.n_x, sys.n_psi, sys.n_x],
            {
                (0, 0): -eta ** 2 * w,
                (0, 1): w @ g,
                (0, 2): awbz.T,
                (1, 1): -2 * nc.theta,
                (1, 2): b_cl.T,
                (2, 2): -w,
            },
        )

    return pencil_from_function(layout, blocks)


def build_ct_lip_conservative(sys: LureSystem, nc: Lipschitz, eta: float) -> AffinePencil:
    """Conservative single-block continuous-time Lipschitz inequality.

    <A W + B Z> + 2 (eta + rho) W <= 0, valid only in the comparison
    setting n_x = n_y = n_psi with B_psi = C = I, Theta_y = Theta_psi = I,
    and K_psi fixed to zero.
    """
    if sys.domain != CONTINUOUS:
        raise PreconditionError("continuous-time builder got a discrete-time system")
    eta = _check_eta(eta, CONTINUOUS)
    n = sys.n_x
    eye = np.eye(n)
    if sys.n_y != n or sys.n_psi != n:
        raise PreconditionError("conservative form requires n_x = n_y = n_psi")
    if not (np.array_equal(sys.B_psi, eye) and np.array_equal(sys.C, eye)):
        raise PreconditionError("conservative form requires B_psi = C = I")
    if not (np.array_equal(nc.theta_y, eye) and np.array_equal(nc.theta_psi, eye)):
        raise PreconditionError("conservative form requires Theta_y = Theta_psi = I")
    layout = VariableLayout([
        VariableLayout.sym("W", n),
        VariableLayout.mat("Z", sys.n_u, n),
    ])

    def blocks(v):
        w, z = v["W"], v["Z"]
        return linalg.brack(sys.A @ w + sys.B @ z) + 2 * (eta + nc.rho) * w

    return pencil_from_function(layout, blocks)


def _warn_bcl_identically_zero(sys: LureSystem):
    # In synthesis forms B_cl = B_psi + B K_psi is variable; it can only be
    # identically zero when both B_psi and B vanish.
    if np.all(sys.B_psi == 0.0) and np.all(sys.B == 0.0):
        warnings.warn(
            "B_psi = 0 and B = 0: B_cl is identically zero, the synthesis "
            "form degenerates",
            stacklevel=3,
        )


@dataclass(frozen=True)
class LmiSpec:
    """A fully specified inequality instance: tag, system, class, and rate.

    Monotone classes are lowered to their sector-bounded equivalent before
    building.  Analysis tags additionally need gains to close the loop.
    """

    tag: str
    system: LureSystem
    nonlinearity: NonlinearityClass
    eta: float

    def __post_init__(self):
        if self.tag not in ALL_TAGS:
            raise ValueError(f"unknown inequality tag {self.tag!r}")
        domain = DISCRETE if self.tag in _DT_TAGS else CONTINUOUS
        if self.system.domain != domain:
            raise PreconditionError(
                f"tag {self.tag} requires a {domain} system, got {self.system.domain}"
            )
        _check_eta(self.eta, domain)
        if self.tag in _LIP_TAGS:
            if not isinstance(self.nonlinearity, Lipschitz):
                raise PreconditionError(
                    f"tag {self.tag} requires a Lipschitz nonlinearity class"
                )
        else:
            if not isinstance(self.nonlinearity, (SectorBounded, Monotone)):
                raise PreconditionError(
                    f"tag {self.tag} requires a sector-bounded or monotone class"
                )

    @property
    def is_analysis(self) -> bool:
        return self.tag in _ANALYSIS_TAGS

    def effective_class(self) -> NonlinearityClass:
        if isinstance(self.nonlinearity, Monotone):
            return lower_monotone(self.nonlinearity)
        return self.nonlinearity

    def build(self, gains: Gains | None = None) -> AffinePencil:
        """Build the pencil; analysis tags require gains."""
        nc = self.effective_class()
        if self.is_analysis:
            if gains is None:
                raise PreconditionError(f"tag {self.tag} requires gains")
            cl = close_loop(self.system, gains)
            builder = {
                CT_LIP_ANALYSIS: build_ct_lip_analysis,
                DT_LIP_ANALYSIS: build_dt_lip_analysis,
                CT_SEC_ANALYSIS: build_ct_sector_analysis,
                DT_SEC_ANALYSIS: build_dt_sector_analysis,
            }[self.tag]
            return builder(cl, nc, self.eta)
        builder = {
            CT_LIP_SYNTHESIS: build_ct_lip_synthesis,
            DT_LIP_SYNTHESIS: build_dt_lip_synthesis,
            CT_SEC_SYNTHESIS: build_ct_sector_synthesis,
            DT_SEC_SYNTHESIS: build_dt_sector_synthesis,
            CT_LIP_CONSERVATIVE: build_ct_lip_conservative,
        }[self.tag]
        return builder(self.system, nc, self.eta)


def auto_tag(system: LureSystem, nc: NonlinearityClass, analysis: bool) -> str:
    """Select the inequality tag from (domain, nonlinearity variant)."""
    dt = system.domain == DISCRETE
    lip = isinstance(nc, Lipschitz)
    if analysis:
        if lip:
            return DT_LIP_ANALYSIS if dt else CT_LIP_ANALYSIS
        return DT_SEC_ANALYSIS if dt else CT_SEC_ANALYSIS
    if lip:
        return DT_LIP_SYNTHESIS if dt else CT_LIP_SYNTHESIS
    return DT_SEC_SYNTHESIS if dt else CT_SEC_SYNTHESIS
