"""Truncated number-basis simulator.

Brute-force oracle for the closed forms in :mod:`gausslab.states`:
displacement operators and coherent states, one-mode quantum-limited
attenuator/amplifier channels realized through unitary dilations
(beamsplitter and two-mode squeezer with vacuum ancilla), gauge rotations,
transposition, complementary outputs, and exact output spectra.

Dilations exploit that both generators conserve a number quantity
(total photons for the beamsplitter, photon difference for the squeezer):
the dilation unitary is block tridiagonal and each block exponential is
computed exactly from its spectral decomposition.  Squeezer blocks are
built with ancilla range ``2 * cutoff`` and the Kraus operators cropped to
``cutoff``, which pushes edge-reflection artifacts below ~tanh(r)^(2d).

Truncation policy: operations report the trace deficit (leakage) and never
renormalize silently; callers enforce their own leakage budgets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.special import gammaln

from ._linalg import hermiticity_defect
from .channels import GaugeCovariantChannel
from .errors import (
    AmplitudeTooLarge,
    DimensionMismatch,
    InvalidState,
    NotDiagonal,
    NotHermitian,
    ParameterOutOfRange,
    TruncationLeakage,
)

DIM_GUARD = 4096


@dataclass(frozen=True)
class FockSpace:
    """Truncated Fock space: 1 or 2 modes, ``cutoff`` levels per mode."""

    modes: int
    cutoff: int

    def __post_init__(self):
        if self.modes not in (1, 2):
            raise DimensionMismatch("only 1- or 2-mode Fock spaces are supported")
        if self.cutoff < 2:
            raise ValueError("cutoff must be >= 2")
        if self.cutoff ** self.modes > DIM_GUARD:
            raise ValueError(
                f"total dimension {self.cutoff ** self.modes} exceeds guard {DIM_GUARD}"
            )

    @property
    def dim(self) -> int:
        return self.cutoff ** self.modes


@dataclass(frozen=True)
class PureState:
    space: FockSpace
    amplitudes: np.ndarray


@dataclass(frozen=True)
class FockOperator:
    space: FockSpace
    matrix: np.ndarray


@dataclass(frozen=True)
class OneModeChannelKraus:
    """Kraus list of a one-mode quantum-limited channel in the number basis."""

    kind: str  # "attenuator" | "amplifier"
    parameter: float
    space: FockSpace
    ops: tuple[np.ndarray, ...]


def pure_state(space: FockSpace, amplitudes, normalize: bool = False) -> PureState:
    amp = np.asarray(amplitudes, dtype=np.complex128).ravel()
    if amp.size != space.dim:
        raise DimensionMismatch(f"expected {space.dim} amplitudes, got {amp.size}")
    norm = np.linalg.norm(amp)
    if normalize:
        amp = amp / norm
    elif abs(norm - 1.0) > 1e-10:
        raise InvalidState(f"state norm {norm!r} differs from 1 beyond 1e-10")
    return PureState(space=space, amplitudes=amp)


def vacuum_state(space: FockSpace) -> PureState:
    amp = np.zeros(space.dim, dtype=np.complex128)
    amp[0] = 1.0
    return PureState(space=space, amplitudes=amp)


def number_state(space: FockSpace, occupation) -> PureState:
    amp = np.zeros(space.dim, dtype=np.complex128)
    if space.modes == 1:
        idx = int(occupation)
    else:
        n1, n2 = occupation
        idx = int(n1) * space.cutoff + int(n2)
    amp[idx] = 1.0
    return PureState(space=space, amplitudes=amp)


def tensor_pure(a: PureState, b: PureState) -> PureState:
    if a.space.modes != 1 or b.space.modes != 1 or a.space.cutoff != b.space.cutoff:
        raise DimensionMismatch("tensor_pure needs two one-mode states of equal cutoff")
    space = FockSpace(2, a.space.cutoff)
    return PureState(space=space, amplitudes=np.kron(a.amplitudes, b.amplitudes))


def density(psi: PureState) -> FockOperator:
    return FockOperator(space=psi.space, matrix=np.outer(psi.amplitudes, psi.amplitudes.conj()))


def coherent_state(zeta: complex, space: FockSpace) -> PureState:
    """Coherent vector with amplitudes e^{-|z|^2/2} z^n / sqrt(n!), renormalized.

    Guard: |zeta|^2 <= cutoff/4 keeps the truncated tail below ~1e-8.
    """
    if space.modes != 1:
        raise DimensionMismatch("coherent_state is one-mode; tensor states explicitly")
    zeta = complex(zeta)
    if abs(zeta) ** 2 > space.cutoff / 4.0:
        raise AmplitudeTooLarge(
            f"|zeta|^2 = {abs(zeta)**2:.3f} exceeds cutoff/4 = {space.cutoff / 4.0}"
        )
    n = np.arange(space.cutoff)
    if zeta == 0:
        return vacuum_state(space)
    logmag = -0.5 * abs(zeta) ** 2 + n * np.log(abs(zeta)) - 0.5 * gammaln(n + 1.0)
    amp = np.exp(logmag) * np.exp(1j * n * np.angle(zeta))
    norm = np.linalg.norm(amp)
    if abs(norm - 1.0) > 1e-8:
        raise AmplitudeTooLarge(f"truncated coherent state lost {1 - norm:.2e} of its norm")
    return PureState(space=space, amplitudes=amp / norm)


def annihilation(cutoff: int) -> np.ndarray:
    a = np.zeros((cutoff, cutoff), dtype=np.complex128)
    ns = np.arange(1, cutoff)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def number_operator(space: FockSpace) -> FockOperator:
    return FockOperator(space=space, matrix=np.diag(_total_occupation(space)).astype(np.complex128))


def _total_occupation(space: FockSpace) -> np.ndarray:
    n = np.arange(space.cutoff)
    if space.modes == 1:
        return n.astype(float)
    return (n[:, None] + n[None, :]).ravel().astype(float)


def displacement_matrix(z: complex, space: FockSpace) -> FockOperator:
    """exp(z a^dag - conj(z) a), truncated at the cutoff (one mode)."""
    if space.modes != 1:
        raise DimensionMismatch("displacement_matrix is one-mode")
    z = complex(z)
    if abs(z) ** 2 > space.cutoff / 4.0:
        raise AmplitudeTooLarge(
            f"|z|^2 = {abs(z)**2:.3f} exceeds cutoff/4 = {space.cutoff / 4.0}"
        )
    a = annihilation(space.cutoff)
    return FockOperator(space=space, matrix=sla.expm(z * a.conj().T - np.conj(z) * a))


def gauge_rotation(phi: float, space: FockSpace) -> FockOperator:
    """Diagonal e^{i n phi} in the total photon number n."""
    return FockOperator(space=space,
                        matrix=np.diag(np.exp(1j * phi * _total_occupation(space))))


def thermal_state(n_mean: float, space: FockSpace) -> FockOperator:
    """Fock-diagonal geometric state with mean photon number ``n_mean``.

    Raw truncated weights; the trace deficit is the thermal tail.
    """
    if space.modes != 1:
        raise DimensionMismatch("thermal_state is one-mode")
    if n_mean < 0:
        raise ParameterOutOfRange("mean photon number must be >= 0")
    n = np.arange(space.cutoff, dtype=float)
    if n_mean == 0:
        w = np.zeros(space.cutoff)
        w[0] = 1.0
    else:
        w = np.exp(n * np.log(n_mean / (n_mean + 1.0)) - np.log(n_mean + 1.0))
    return FockOperator(space=space, matrix=np.diag(w).astype(np.complex128))


def random_pure_state(seed, space: FockSpace, support: int | None = None) -> PureState:
    """Haar-random vector on the (optionally occupation-bounded) subspace.

    ``support`` caps the per-mode occupation; amplitudes outside are zero.
    Deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    d = space.cutoff
    s = d if support is None else min(int(support), d)
    if space.modes == 1:
        sub = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        amp = np.zeros(d, dtype=np.complex128)
        amp[:s] = sub
    else:
        sub = rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s))
        grid = np.zeros((d, d), dtype=np.complex128)
        grid[:s, :s] = sub
        amp = grid.ravel()
    return PureState(space=space, amplitudes=amp / np.linalg.norm(amp))


def mean_photon(obj: PureState | FockOperator) -> tuple[float, ...]:
    """Per-mode mean occupation numbers."""
    if isinstance(obj, PureState):
        prob = np.abs(obj.amplitudes) ** 2
        space = obj.space
    else:
        prob = np.real(np.diagonal(obj.matrix))
        space = obj.space
    d = space.cutoff
    n = np.arange(d, dtype=float)
    if space.modes == 1:
        return (float(prob @ n),)
    grid = prob.reshape(d, d)
    return (float(grid.sum(axis=1) @ n), float(grid.sum(axis=0) @ n))


def leakage(rho: FockOperator) -> float:
    """Probability mass pushed past the cutoff: 1 - Tr rho."""
    return float(1.0 - np.real(np.trace(rho.matrix)))


def require_leakage(rho: FockOperator, budget: float = 1e-6) -> FockOperator:
    lk = leakage(rho)
    if lk > budget:
        raise TruncationLeakage(f"truncation leakage {lk:.3e} exceeds budget {budget:.1e}")
    return rho


def spectrum(rho: FockOperator, clamp: float = 1e-8) -> np.ndarray:
    """Real eigenvalues, descending; negatives above -clamp are set to 0."""
    defect = hermiticity_defect(rho.matrix)
    if defect > 1e-10:
        raise NotHermitian(f"operator is not Hermitian: defect {defect:.3e}")
    w = np.linalg.eigvalsh(0.5 * (rho.matrix + rho.matrix.conj().T))[::-1]
    if w[-1] < -clamp:
        raise InvalidState(f"operator has eigenvalue {w[-1]:.3e} below -{clamp:.1e}")
    return np.clip(w, 0.0, None)


def transpose_state(rho: FockOperator) -> FockOperator:
    """Transposition in the number basis (spectrum preserving)."""
    return FockOperator(space=rho.space, matrix=rho.matrix.T.copy())


# ---------------------------------------------------------------------------
# Dilation blocks.  Both generators are real skew-symmetric tridiagonal in a
# conserved-sector basis; exp is taken through eigh of the phase-rotated
# (real symmetric) tridiagonal matrix.
# ---------------------------------------------------------------------------

def _skew_expm(sub: np.ndarray, column_only: bool) -> np.ndarray:
    """exp(B) for real B with B[j+1, j] = sub[j], B[j, j+1] = -sub[j]."""
    J = len(sub) + 1
    if J == 1:
        one = np.ones(1, dtype=np.complex128)
        return one if column_only else np.eye(1, dtype=np.complex128)
    lam, w = sla.eigh_tridiagonal(np.zeros(J), -np.asarray(sub, dtype=float))
    phases = (1j) ** np.arange(J)
    if column_only:
        return np.conj(phases) * (w @ (np.exp(-1j * lam) * w[0, :]))
    full = (w * np.exp(-1j * lam)) @ w.T
    return np.conj(phases)[:, None] * full * phases[None, :]


_COLUMN_CACHE: dict[tuple, tuple] = {}


def _attenuator_columns(k: float, d: int) -> tuple[np.ndarray, ...]:
    """Beamsplitter dilation columns: cols[n][l] = <n-l, l| U |n, 0>.

    Total photon number is conserved, so every sector with n < d is complete
    and the amplitudes are exact.
    """
    key = ("att", float(k), d)
    if key not in _COLUMN_CACHE:
        theta = float(np.arccos(np.clip(k, 0.0, 1.0)))
        cols = []
        for n in range(d):
            sub = np.array([-theta * np.sqrt((j + 1.0) * (n - j)) for j in range(n)])
            cols.append(_skew_expm(sub, column_only=True))
        _COLUMN_CACHE[key] = tuple(cols)
    return _COLUMN_CACHE[key]


def _amplifier_columns(kappa: float, d: int) -> tuple[np.ndarray, ...]:
    """Two-mode squeezer dilation columns: cols[n][l] = <n+l, l| U |n, 0>.

    Photon difference is conserved; blocks are built with ancilla range up
    to 2d - 1 - n and later cropped, suppressing edge reflection.
    """
    key = ("amp", float(kappa), d)
    if key not in _COLUMN_CACHE:
        r = float(np.arccosh(max(kappa, 1.0)))
        cols = []
        for n in range(d):
            jmax = 2 * d - 1 - n
            sub = np.array([r * np.sqrt((n + j + 1.0) * (j + 1.0)) for j in range(jmax)])
            cols.append(_skew_expm(sub, column_only=True))
        _COLUMN_CACHE[key] = tuple(cols)
    return _COLUMN_CACHE[key]


_KRAUS_CACHE: dict[tuple, OneModeChannelKraus] = {}


def attenuator_kraus(k: float, space: FockSpace) -> OneModeChannelKraus:
    """Kraus operators of the quantum-limited attenuator, k in [0, 1].

    A_l = <l| U |0> on the ancilla, with U the beamsplitter dilation
    exp(theta (a^dag b - a b^dag)), cos(theta) = k, ancilla in vacuum.
    """
    if space.modes != 1:
        raise DimensionMismatch("attenuator_kraus builds one-mode channels")
    if not 0.0 <= k <= 1.0:
        raise ParameterOutOfRange(f"attenuation must lie in [0, 1], got {k}")
    key = ("att", float(k), space.cutoff)
    if key not in _KRAUS_CACHE:
        d = space.cutoff
        cols = _attenuator_columns(k, d)
        ops = []
        for l in range(d):
            A = np.zeros((d, d), dtype=np.complex128)
            for n in range(l, d):
                A[n - l, n] = cols[n][l]
            if np.any(A):
                ops.append(A)
        _KRAUS_CACHE[key] = OneModeChannelKraus("attenuator", float(k), space, tuple(ops))
    return _KRAUS_CACHE[key]


def amplifier_kraus(kappa: float, space: FockSpace) -> OneModeChannelKraus:
    """Kraus operators of the quantum-limited amplifier, kappa >= 1.

    A_l = <l| U |0> on the ancilla, with U the two-mode squeezer dilation
    exp(r (a^dag b^dag - a b)), cosh(r) = kappa, ancilla in vacuum.
    Guard: kappa^2 - 1 <= cutoff/8 keeps the vacuum-output thermal tail
    inside the cutoff.
    """
    if space.modes != 1:
        raise DimensionMismatch("amplifier_kraus builds one-mode channels")
    if kappa < 1.0:
        raise ParameterOutOfRange(f"gain must satisfy kappa >= 1, got {kappa}")
    if kappa ** 2 - 1.0 > space.cutoff / 8.0:
        raise ParameterOutOfRange(
            f"kappa^2 - 1 = {kappa**2 - 1:.3f} exceeds cutoff/8 = {space.cutoff / 8.0}"
        )
    key = ("amp", float(kappa), space.cutoff)
    if key not in _KRAUS_CACHE:
        d = space.cutoff
        cols = _amplifier_columns(kappa, d)
        ops = []
        for l in range(d):
            A = np.zeros((d, d), dtype=np.complex128)
            for n in range(0, d - l):
                A[n + l, n] = cols[n][l]
            if np.any(A):
                ops.append(A)
        _KRAUS_CACHE[key] = OneModeChannelKraus("amplifier", float(kappa), space, tuple(ops))
    return _KRAUS_CACHE[key]


def kraus_completeness_defect(kraus: OneModeChannelKraus, n_max: int) -> float:
    """max |sum_l A_l^dag A_l - I| over the occupation block n <= n_max."""
    d = kraus.space.cutoff
    total = np.zeros((d, d), dtype=np.complex128)
    for A in kraus.ops:
        total += A.conj().T @ A
    block = total[: n_max + 1, : n_max + 1] - np.eye(n_max + 1)
    return float(np.abs(block).max())


def _sandwich(ops: tuple[np.ndarray, ...], rho: np.ndarray) -> np.ndarray:
    stack = np.stack(ops)
    tmp = stack @ rho
    return np.einsum("lij,lkj->ik", tmp, stack.conj(), optimize=True)


def apply_kraus(kraus, rho: FockOperator) -> FockOperator:
    """sum_l A_l rho A_l^dag.

    ``kraus`` is a OneModeChannelKraus (one-mode operator required) or, for
    two-mode operators, a sequence of per-mode OneModeChannelKraus entries
    (None leaves a mode untouched).  Trace deficit is reported via
    :func:`leakage`.
    """
    space = rho.space
    if isinstance(kraus, OneModeChannelKraus):
        if space.modes != 1:
            raise DimensionMismatch("got a one-mode Kraus list for a multimode operator")
        if kraus.space.cutoff != space.cutoff:
            raise DimensionMismatch("Kraus cutoff does not match the operator")
        return FockOperator(space=space, matrix=_sandwich(kraus.ops, rho.matrix))
    if space.modes != len(kraus):
        raise DimensionMismatch(f"need {space.modes} per-mode channels, got {len(kraus)}")
    mat = rho.matrix
    for mode, ch in enumerate(kraus):
        if ch is None:
            continue
        if ch.space.cutoff != space.cutoff:
            raise DimensionMismatch("Kraus cutoff does not match the operator")
        mat = _apply_mode(ch.ops, mat, space.cutoff, mode)
    return FockOperator(space=space, matrix=mat)


def _apply_mode(ops: tuple[np.ndarray, ...], rho: np.ndarray, d: int, mode: int) -> np.ndarray:
    rho4 = rho.reshape(d, d, d, d)  # [m1, m2 | n1, n2]
    out = np.zeros_like(rho4)
    for A in ops:
        if mode == 0:
            t = np.einsum("am,mbnd->abnd", A, rho4, optimize=True)
            out += np.einsum("abnd,cn->abcd", t, A.conj(), optimize=True)
        else:
            t = np.einsum("bm,amcn->abcn", A, rho4, optimize=True)
            out += np.einsum("abcn,dn->abcd", t, A.conj(), optimize=True)
    return out.reshape(d * d, d * d)


def complementary_output(kappa: float, rho: FockOperator) -> FockOperator:
    """Environment output of the amplifier dilation.

    Applies the dilation unitary to rho (x) |0><0|, traces out the system
    over the full dilation range, and returns the ancilla state cropped to
    the cutoff.
    """
    space = rho.space
    if space.modes != 1:
        raise DimensionMismatch("complementary_output is one-mode")
    if kappa < 1.0:
        raise ParameterOutOfRange(f"gain must satisfy kappa >= 1, got {kappa}")
    d = space.cutoff
    cols = _amplifier_columns(kappa, d)
    out = np.zeros((d, d), dtype=np.complex128)
    for m in range(2 * d - 1):
        lo = max(0, m - d + 1)
        hi = min(m, d - 1)
        ns = np.arange(lo, hi + 1)
        w = np.array([cols[n][m - n] for n in ns])
        ls = m - ns
        block = (w[:, None] * rho.matrix[np.ix_(ns, ns)]) * w.conj()[None, :]
        out[np.ix_(ls, ls)] += block
    return FockOperator(space=space, matrix=out)


def amplifier_dilation_marginals(kappa: float, psi: PureState) -> tuple[FockOperator, FockOperator]:
    """Both marginals of U (psi (x) |0>), on the doubled space.

    Returns (system output, ancilla output) as operators with cutoff 2d;
    their nonzero spectra coincide exactly for any pure input.
    """
    space = psi.space
    if space.modes != 1:
        raise DimensionMismatch("amplifier_dilation_marginals is one-mode")
    d = space.cutoff
    big = FockSpace(1, 2 * d)
    cols = _amplifier_columns(kappa, d)
    omega = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    for n in range(d):
        ls = np.arange(len(cols[n]))
        omega[n + ls, ls] = psi.amplitudes[n] * cols[n]
    sys_out = omega @ omega.conj().T
    anc_out = omega.T @ omega.conj()
    return (FockOperator(space=big, matrix=sys_out),
            FockOperator(space=big, matrix=anc_out))


def beamsplitter_unitary(theta: float, space: FockSpace) -> FockOperator:
    """Two-mode beamsplitter exp(theta (a^dag b - a b^dag)) on the truncated
    space; exact on total-photon sectors that fit under the cutoff."""
    if space.modes != 2:
        raise DimensionMismatch("beamsplitter_unitary needs a two-mode space")
    d = space.cutoff
    U = np.zeros((d * d, d * d), dtype=np.complex128)
    for total in range(2 * d - 1):
        jmin = max(0, total - d + 1)
        jmax = min(total, d - 1)
        js = np.arange(jmin, jmax + 1)
        sub = np.array([-theta * np.sqrt((j + 1.0) * (total - j)) for j in js[:-1]])
        block = _skew_expm(sub, column_only=False)
        idx = (total - js) * d + js
        U[np.ix_(idx, idx)] = block
    return FockOperator(space=space, matrix=U)


# ---------------------------------------------------------------------------
# Realization of arbitrary gauge-covariant channels as Fock pipelines.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModePipeline:
    """One-mode factorization: gauge phase, quantum-limited attenuation k1,
    quantum-limited gain kappa2 (channel = amplifier after attenuator after
    rotation)."""

    phase: float
    attenuation: float
    gain: float


@dataclass(frozen=True)
class FockChannel:
    """A channel materialized as per-mode Kraus stages on a Fock space."""

    space: FockSpace
    pipelines: tuple[ModePipeline, ...]
    stages: tuple[tuple, ...]  # per mode: (attenuator kraus | None, amplifier kraus | None)

    def apply(self, rho: FockOperator) -> FockOperator:
        if rho.space != self.space:
            raise DimensionMismatch("operator lives on a different space")
        d = self.space.cutoff
        n = np.arange(d)
        if self.space.modes == 1:
            ph = np.exp(1j * self.pipelines[0].phase * n)
        else:
            ph = np.exp(1j * (self.pipelines[0].phase * n[:, None]
                              + self.pipelines[1].phase * n[None, :])).ravel()
        mat = (ph[:, None] * rho.matrix) * ph.conj()[None, :]
        for mode, (att, amp) in enumerate(self.stages):
            for stage in (att, amp):
                if stage is None:
                    continue
                if self.space.modes == 1:
                    mat = _sandwich(stage.ops, mat)
                else:
                    mat = _apply_mode(stage.ops, mat, d, mode)
        return FockOperator(space=self.space, matrix=mat)

    def apply_pure(self, psi: PureState) -> FockOperator:
        return self.apply(density(psi))


def realize_channel(ch: GaugeCovariantChannel, space: FockSpace) -> FockChannel:
    """Materialize a channel as rotation + attenuator + amplifier stages.

    Multimode channels must be diagonal (tensor products of one-mode
    channels); general multimode unitary envelopes are out of scope here
    and handled analytically in :mod:`gausslab.channels`.
    """
    if ch.modes != space.modes:
        raise DimensionMismatch(f"channel on {ch.modes} modes, space on {space.modes}")
    if ch.modes > 1:
        if (np.abs(ch.K - np.diag(np.diagonal(ch.K))).max() > 1e-12
                or np.abs(ch.mu - np.diag(np.diagonal(ch.mu))).max() > 1e-12):
            raise NotDiagonal("multimode realization needs diagonal K and mu")
    pipelines = []
    stages = []
    for j in range(ch.modes):
        kj = complex(ch.K[j, j])
        mj = float(np.real(ch.mu[j, j]))
        gain = float(np.sqrt(mj + (abs(kj) ** 2 + 1.0) / 2.0))
        gain = max(gain, 1.0)
        k1 = min(abs(kj) / gain, 1.0)
        phase = float(np.angle(kj)) if abs(kj) > 0 else 0.0
        pipelines.append(ModePipeline(phase=phase, attenuation=k1, gain=gain))
        one_mode = FockSpace(1, space.cutoff)
        att = attenuator_kraus(k1, one_mode) if k1 < 1.0 - 1e-14 else None
        amp = amplifier_kraus(gain, one_mode) if gain > 1.0 + 1e-14 else None
        stages.append((att, amp))
    return FockChannel(space=space, pipelines=tuple(pipelines), stages=tuple(stages))
