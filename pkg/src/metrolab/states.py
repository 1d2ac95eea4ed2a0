"""Probe-state factories on truncated Fock bases.

Two-mode states with a definite total photon number N are written as
sum_n c_n |n, N-n>: mode 0 carries the payload, mode 1 the phase
reference.  Single-mode factories (coherent, cat) use a one-mode basis
whose cutoff must make the discarded Poisson tail negligible.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.stats import poisson

from .fock import NORM_ATOL, PureState, build_basis
from .operators import PairAxis, rotation_unitary

COHERENT_TAIL_TOL = 1e-12


def _checked_profile(coeffs, expected_len: int) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.shape != (expected_len,):
        raise ValueError(f"expected {expected_len} coefficients, got {c.shape}")
    nrm = float(np.linalg.norm(c))
    if abs(nrm - 1.0) > NORM_ATOL:
        raise ValueError(f"coefficient norm {nrm} is not 1 within {NORM_ATOL}")
    return c


def two_mode_fixed_n(coeffs: Sequence[complex], n_total: int) -> PureState:
    """sum_n c_n |n, N-n> on a two-mode basis with cutoff N.

    `coeffs` must have length N+1 and unit norm; the output occupies only
    the fixed-N sector.
    """
    c = _checked_profile(coeffs, n_total + 1)
    basis = build_basis(2, n_total)
    amp = np.zeros(basis.dim, dtype=complex)
    amp[basis.sector_slice(n_total)] = c
    return PureState(basis, amp, normalize=True)


def noon(n_total: int) -> PureState:
    """(|N,0> + |0,N>) / sqrt(2)."""
    if n_total < 1:
        raise ValueError("noon requires n_total >= 1")
    c = np.zeros(n_total + 1, dtype=complex)
    c[0] = c[n_total] = 1 / math.sqrt(2)
    return two_mode_fixed_n(c, n_total)


def rotated_fock(n_total: int, theta: float, phi: float = 0.0) -> PureState:
    """All N photons in the rotated mode cos(t/2) a1† + e^{i phi} sin(t/2) a0†.

    Amplitude on |k, N-k> is sqrt(C(N,k)) cos^{N-k}(theta/2)
    (e^{i phi} sin(theta/2))^k.  This expansion *defines* the rotation
    sign convention: it equals exp(i theta J_n) |0, N> for the axis
    (beta=pi/2, phi_axis=pi/2 - phi).
    """
    if n_total < 0:
        raise ValueError("n_total must be >= 0")
    half = theta / 2.0
    c = math.cos(half)
    s = math.sin(half) * np.exp(1j * phi)
    k = np.arange(n_total + 1)
    coeffs = np.array(
        [math.sqrt(math.comb(n_total, int(kk))) for kk in k], dtype=complex
    )
    coeffs *= c ** (n_total - k) * s**k
    basis = build_basis(2, n_total)
    amp = np.zeros(basis.dim, dtype=complex)
    amp[basis.sector_slice(n_total)] = coeffs
    return PureState(basis, amp, normalize=True)


def rotation_axis_for(phi: float) -> PairAxis:
    """Axis such that exp(i theta J_axis)|0,N> reproduces rotated_fock(N, theta, phi)."""
    return PairAxis(0, 1, beta=math.pi / 2, phi=math.pi / 2 - phi)


def fock_cat(n_total: int, theta: float, phi: float = 0.0) -> PureState:
    """Normalized |0,N> + rotated_fock(N, theta, phi).

    The branch overlap is cos^N(theta/2), so the squared norm before
    normalization is 2 + 2 cos^N(theta/2).
    """
    if n_total < 1:
        raise ValueError("fock_cat requires n_total >= 1")
    branch = rotated_fock(n_total, theta, phi)
    basis = branch.basis
    amp = branch.amplitudes.copy()
    amp[basis.rank((0, n_total))] += 1.0
    return PureState(basis, amp, normalize=True)


def coherent_cutoff(alpha: complex, tail: float = COHERENT_TAIL_TOL) -> int:
    """Smallest cutoff whose Poisson tail P(n > cutoff) is below `tail`."""
    mean = abs(alpha) ** 2
    cutoff = max(int(mean), 0)
    while poisson.sf(cutoff, mean) >= tail:
        cutoff += 1
    return cutoff


def coherent_truncated(alpha: complex, cutoff: int) -> PureState:
    """Coherent state |alpha> truncated at `cutoff` photons and renormalized.

    Raises if the discarded Poisson tail is not below 1e-12.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    if poisson.sf(cutoff, abs(alpha) ** 2) >= COHERENT_TAIL_TOL:
        raise ValueError(
            f"cutoff {cutoff} keeps a Poisson tail >= {COHERENT_TAIL_TOL} "
            f"for |alpha|^2 = {abs(alpha) ** 2:.6g}"
        )
    amp = np.zeros(cutoff + 1, dtype=complex)
    amp[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, cutoff + 1):
        amp[n] = amp[n - 1] * alpha / math.sqrt(n)
    return PureState(build_basis(1, cutoff), amp, normalize=True)


def cv_cat(alpha: complex, cutoff: int) -> PureState:
    """Normalized |0> + |alpha> on a single mode.

    The squared norm before normalization is 2 + 2 Re<0|alpha>
    = 2 + 2 exp(-|alpha|^2 / 2); truncation follows the coherent rule.
    """
    branch = coherent_truncated(alpha, cutoff)
    amp = branch.amplitudes.copy()
    amp[0] += 1.0
    return PureState(branch.basis, amp, normalize=True)


def correlated_three_mode(coeffs: Sequence[complex], n_total: int) -> PureState:
    """Maximally number-correlated sum_n c_n |n, n, N-2n> on three modes.

    `coeffs` runs over n = 0..floor(N/2); mode 2 is the phase reference.
    """
    c = _checked_profile(coeffs, n_total // 2 + 1)
    basis = build_basis(3, n_total)
    amp = np.zeros(basis.dim, dtype=complex)
    for n, cn in enumerate(c):
        amp[basis.rank((n, n, n_total - 2 * n))] = cn
    return PureState(basis, amp, normalize=True)


def general_probe(
    coeffs,
    n_total: int,
    gates: Sequence[tuple[PairAxis, float]] = (),
    env_occupation: int = 0,
) -> PureState:
    """Four-mode probe: gates applied to sum c_{n1,n2} |n1, n2, N-n1-n2, e>.

    `coeffs` is an (N+1, N+1) array read over the triangle n1+n2 <= N
    (entries outside it must be zero).  Modes 0-2 are probes, mode 3 is
    the environment, initially holding `env_occupation` photons (default
    vacuum).  Gates are (PairAxis, angle) pairs applied in list order:
    the first gate acts first on the ket.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (n_total + 1, n_total + 1):
        raise ValueError(
            f"coefficient array must be ({n_total + 1}, {n_total + 1}), got {c.shape}"
        )
    n1g, n2g = np.meshgrid(np.arange(n_total + 1), np.arange(n_total + 1), indexing="ij")
    outside = (n1g + n2g > n_total) & (c != 0)
    if np.any(outside):
        raise ValueError("coefficients outside the n1 + n2 <= n_total region")
    nrm = float(np.linalg.norm(c))
    if abs(nrm - 1.0) > NORM_ATOL:
        raise ValueError(f"coefficient norm {nrm} is not 1 within {NORM_ATOL}")
    env_occupation = int(env_occupation)
    if env_occupation < 0:
        raise ValueError("env_occupation must be >= 0")

    basis = build_basis(4, n_total + env_occupation)
    amp = np.zeros(basis.dim, dtype=complex)
    for n1 in range(n_total + 1):
        for n2 in range(n_total + 1 - n1):
            if c[n1, n2] != 0:
                occ = (n1, n2, n_total - n1 - n2, env_occupation)
                amp[basis.rank(occ)] = c[n1, n2]
    state = PureState(basis, amp, normalize=True)
    for pair, angle in gates:
        state = rotation_unitary(basis, pair, angle).apply(state)
    return state


def with_reference(state: PureState, n_total: int) -> PureState:
    """Embed a single-mode state as sum_k d_k |k, N-k> (reference mode added).

    Coefficients beyond the fixed-N sector (k > N) are truncated and the
    result renormalized, mirroring the large-N correspondence between
    single-mode and fixed-total-number descriptions.
    """
    if state.basis.num_modes != 1:
        raise ValueError("with_reference expects a single-mode state")
    basis = build_basis(2, n_total)
    k_max = min(state.basis.n_total, n_total)
    amp = np.zeros(basis.dim, dtype=complex)
    block = basis.sector_slice(n_total)
    amp[block.start : block.start + k_max + 1] = state.amplitudes[: k_max + 1]
    return PureState(basis, amp, normalize=True)


def drop_reference(state: PureState, support_atol: float = 1e-10) -> PureState:
    """Inverse of :func:`with_reference`: extract the mode-0 profile.

    Requires the two-mode state to live in its fixed-N sector up to
    `support_atol`; returns the pure single-mode state with the same
    coefficients (coherences intact) on a cutoff-N basis.
    """
    if state.basis.num_modes != 2:
        raise ValueError("drop_reference expects a two-mode state")
    n_total = state.basis.n_total
    block = state.amplitudes[state.basis.sector_slice(n_total)]
    if 1.0 - float(np.sum(np.abs(block) ** 2)) > support_atol:
        raise ValueError("state has support outside the fixed-N sector")
    return PureState(build_basis(1, n_total), block, normalize=True)


def cv_ratio(state: PureState) -> float:
    """Diagnostic mean(n_0) / (N/2) for a fixed-N two-mode state.

    Small values indicate the payload mode is far from the cutoff, i.e.
    the single-mode continuous-variable description is accurate.  No
    threshold is enforced; callers decide what counts as small.
    """
    profile = drop_reference(state)
    n_total = state.basis.n_total
    if n_total == 0:
        raise ValueError("cv_ratio is undefined for n_total = 0")
    probs = np.abs(profile.amplitudes) ** 2
    nbar = float(probs @ np.arange(n_total + 1))
    return nbar / (n_total / 2.0)
