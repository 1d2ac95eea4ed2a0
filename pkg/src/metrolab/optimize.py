"""Generator-weight optimization and the beam-splitter loss channel.

The phase generator n_zeta = cos(zeta) n0 + sin(zeta) n1 has variance
determined by the 2x2 covariance matrix of the mode photon numbers, so
the optimal weight angle is solved in closed form as its top
eigenvector.  The K-mode generalization returns a unit weight vector
over any set of probe modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fock import MixedState, PureState, State, partial_trace
from .operators import PairAxis, rotation_unitary, weighted_number
from .metrology import variance

_DEGENERACY_TOL = 1e-14
_CONSISTENCY_ATOL = 1e-10

_NAMED_AXES = {
    "x": (math.pi / 2, 0.0),
    "y": (math.pi / 2, math.pi / 2),
    "z": (0.0, 0.0),
}


@dataclass(frozen=True)
class ZetaResult:
    """Optimal weight angle for the two leading modes.

    var_max + var_perp always equals Var(n0) + Var(n1); `degenerate`
    flags an isotropic covariance, where every angle is optimal and
    zeta_opt = 0 is returned by convention.
    """

    zeta_opt: float
    var_max: float
    var_perp: float
    cov: np.ndarray = field(repr=False)
    degenerate: bool = False


@dataclass(frozen=True)
class WeightResult:
    """Top covariance eigenvector over K probe modes (unit weight vector)."""

    weights: np.ndarray
    var_max: float
    var_min: float
    cov: np.ndarray = field(repr=False)
    degenerate: bool = False


def number_covariance(state: State, modes: Sequence[int] | None = None) -> np.ndarray:
    """Covariance matrix of the photon numbers of the given modes.

    Number operators commute and are diagonal, so only the occupation
    distribution matters; works identically for pure and mixed states.
    """
    basis = state.basis
    if modes is None:
        modes = range(basis.num_modes)
    modes = [int(m) for m in modes]
    if any(m < 0 or m >= basis.num_modes for m in modes):
        raise ValueError(f"modes {modes} outside 0..{basis.num_modes - 1}")
    if isinstance(state, PureState):
        probs = np.abs(state.amplitudes) ** 2
    else:
        probs = np.clip(np.real(np.diag(state.matrix)), 0.0, None)
    occ = basis.occupations()[:, modes].astype(float)
    mean = probs @ occ
    second = occ.T @ (probs[:, None] * occ)
    return second - np.outer(mean, mean)


def optimal_zeta(state: State) -> ZetaResult:
    """Closed-form maximizer of Var(cos(zeta) n0 + sin(zeta) n1).

    zeta* = atan2(2 Cov(n0,n1), Var(n0) - Var(n1)) / 2, folded into
    [0, pi); var_max is the top eigenvalue of the covariance matrix and
    var_perp the bottom one.
    """
    if state.basis.num_modes < 2:
        raise ValueError("optimal_zeta needs at least 2 modes")
    cov = number_covariance(state, (0, 1))
    diff = cov[0, 0] - cov[1, 1]
    off = cov[0, 1]
    degenerate = math.hypot(diff, 2 * off) <= _DEGENERACY_TOL * max(1.0, abs(np.trace(cov)))
    zeta = 0.0 if degenerate else (0.5 * math.atan2(2 * off, diff)) % math.pi
    var_max = _weighted_variance(cov, zeta)
    var_perp = float(cov[0, 0] + cov[1, 1]) - var_max
    return ZetaResult(
        zeta_opt=zeta,
        var_max=var_max,
        var_perp=max(var_perp, 0.0),
        cov=cov,
        degenerate=degenerate,
    )


def _weighted_variance(cov: np.ndarray, zeta: float) -> float:
    c, s = math.cos(zeta), math.sin(zeta)
    return float(c * c * cov[0, 0] + s * s * cov[1, 1] + 2 * c * s * cov[0, 1])


def optimal_weights(state: State, modes: Sequence[int]) -> WeightResult:
    """K-mode generalization: top eigenvector of the number covariance.

    The two-mode zeta solution is the special case
    weights = (cos(zeta*), sin(zeta*)).
    """
    modes = list(modes)
    if len(modes) < 2:
        raise ValueError("optimal_weights needs at least 2 modes")
    cov = number_covariance(state, modes)
    eigvals, eigvecs = np.linalg.eigh(cov)
    weights = eigvecs[:, -1]
    lead = np.flatnonzero(np.abs(weights) > 1e-12)
    if lead.size and weights[lead[0]] < 0:
        weights = -weights
    degenerate = bool(eigvals[-1] - eigvals[0] <= _DEGENERACY_TOL * max(1.0, abs(eigvals[-1])))
    return WeightResult(
        weights=weights,
        var_max=float(eigvals[-1]),
        var_min=float(max(eigvals[0], 0.0)),
        cov=cov,
        degenerate=degenerate,
    )


def estimated_parameter(zeta: float, theta13: float, theta23: float) -> float:
    """Magnitude theta such that theta * n_zeta = theta13 * n0 + theta23 * n1.

    Requires (theta13, theta23) parallel to (cos(zeta), sin(zeta)) within
    1e-10; at zeta = pi/4 this returns (theta13 + theta23) / sqrt(2).
    """
    c, s = math.cos(zeta), math.sin(zeta)
    theta = theta13 / c if abs(c) >= abs(s) else theta23 / s
    if abs(theta13 - theta * c) > _CONSISTENCY_ATOL or abs(theta23 - theta * s) > _CONSISTENCY_ATOL:
        raise ValueError(
            f"(theta13={theta13}, theta23={theta23}) is not proportional to "
            f"(cos(zeta), sin(zeta)) for zeta={zeta}"
        )
    return theta


def _axis_angles(axis) -> tuple[float, float]:
    if isinstance(axis, str):
        try:
            return _NAMED_AXES[axis]
        except KeyError:
            raise ValueError(f"unknown axis {axis!r}; use 'x', 'y', 'z' or (beta, phi)")
    beta, phi = axis
    return float(beta), float(phi)


def lossy_probe(
    state: PureState, probe_mode: int, kappa: float, axis="x"
) -> MixedState:
    """Couple one probe mode to the environment mode and trace it out.

    The input must be a four-mode pure state (modes 0-2 probes, mode 3
    environment).  The coupling is the rotation exp(i kappa J_axis) on
    the (probe_mode, 3) pair, x-axis by default; kappa = pi transfers
    the probe mode's photons entirely into the environment.
    """
    if state.basis.num_modes != 4:
        raise ValueError("lossy_probe expects a four-mode state")
    probe_mode = int(probe_mode)
    if probe_mode not in (0, 1, 2):
        raise ValueError("probe_mode must be one of the probe modes 0, 1, 2")
    beta, phi = _axis_angles(axis)
    pair = PairAxis(probe_mode, 3, beta=beta, phi=phi)
    coupled = rotation_unitary(state.basis, pair, kappa).apply(state)
    return partial_trace(coupled, keep=(0, 1, 2))


def sweep_qfi_vs_zeta(state: State, zetas: Sequence[float]) -> np.ndarray:
    """Rows (zeta, 4 * Var(n_zeta)) for each grid point.

    Uses the operator route on purpose, so the sweep is an independent
    check of the closed-form :func:`optimal_zeta`.
    """
    zetas = [float(z) for z in zetas]
    if not zetas:
        raise ValueError("zeta grid must be non-empty")
    rows = np.empty((len(zetas), 2))
    for k, zeta in enumerate(zetas):
        n_zeta, _ = weighted_number(state.basis, zeta)
        rows[k] = (zeta, 4.0 * variance(state, n_zeta))
    return rows
