"""Exact matrix algebra of multimode Gaussian gauge-covariant channels.

A channel on ``s`` modes is the pair ``(K, mu)`` of complex ``s x s``
matrices: ``K`` is the transmission/gain matrix and ``mu`` the Hermitian
noise correlation matrix, in units where the vacuum variance is 1/2.  The
channel maps gauge-invariant correlation matrices as
``alpha -> K alpha K* + mu`` and is physical iff

    mu >= +(I - K K*)/2   and   mu >= -(I - K K*)/2.

Quantum-limited attenuators saturate the first bound (``K K* <= I``,
``mu = (I - K K*)/2``), quantum-limited amplifiers the second
(``K K* >= I``, ``mu = (K K* - I)/2``).  Every valid channel factors as a
quantum-limited attenuator followed by a quantum-limited amplifier.

All operations are pure functions of immutable values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._linalg import (
    HERMITICITY_TOL,
    as_complex_matrix,
    min_eig,
    opnorm,
    psd_sqrt,
    require_hermitian,
    spectral_abs,
)
from .errors import (
    DimensionMismatch,
    FileFormatError,
    InvalidNoise,
    NotDiagonal,
    NotQuantumLimited,
    NotQuantumLimitedAmplifier,
    ValidityError,
)

DEFAULT_TOL = 1e-10


class ChannelClass(Enum):
    IDENTITY = "Identity"
    ATTENUATOR = "Attenuator"
    AMPLIFIER = "Amplifier"
    QUANTUM_LIMITED_ATTENUATOR = "QuantumLimitedAttenuator"
    QUANTUM_LIMITED_AMPLIFIER = "QuantumLimitedAmplifier"
    GENERAL = "General"


@dataclass(frozen=True)
class GaugeCovariantChannel:
    """Validated channel data. Build through :func:`build_channel`."""

    modes: int
    K: np.ndarray
    mu: np.ndarray

    def gram(self) -> np.ndarray:
        """K K*, the Hermitian gain Gram matrix."""
        return self.K @ self.K.conj().T


@dataclass(frozen=True)
class Decomposition:
    """Quantum-limited factors: ``channel = amplifier after attenuator``."""

    attenuator: GaugeCovariantChannel
    amplifier: GaugeCovariantChannel

    def reconstruct(self) -> GaugeCovariantChannel:
        return concatenate(self.attenuator, self.amplifier)


@dataclass(frozen=True)
class DiagonalForm:
    """Singular-value form ``K = V_B diag(k_diag) V_A`` of a quantum-limited
    channel, with the list of one-mode quantum-limited factors."""

    kind: ChannelClass
    V_A: np.ndarray
    V_B: np.ndarray
    k_diag: np.ndarray
    per_mode: tuple[GaugeCovariantChannel, ...]


@dataclass(frozen=True)
class StrictnessReport:
    """Sufficient conditions under which coherent inputs are the only
    minimizers of concave output functionals."""

    condition_a: bool
    condition_b: bool
    min_singular_value: float
    excess_noise_min_eig: float
    quantum_limited_defect: float


def build_channel(K, mu, tol: float = DEFAULT_TOL) -> GaugeCovariantChannel:
    """Validate and construct a channel from its matrix pair.

    Raises DimensionMismatch for shape errors, NotHermitian if ``mu`` is
    not Hermitian within 1e-12, and InvalidNoise if either eigenvalue
    condition ``mu -/+ (I - K K*)/2 >= -tol`` fails.
    """
    K = as_complex_matrix(K)
    mu = as_complex_matrix(mu)
    if K.shape != mu.shape:
        raise DimensionMismatch(f"K has shape {K.shape} but mu has shape {mu.shape}")
    s = K.shape[0]
    if s < 1:
        raise DimensionMismatch("channel needs at least one mode")
    mu = require_hermitian(mu, HERMITICITY_TOL, name="mu")
    bound = 0.5 * (np.eye(s) - K @ K.conj().T)
    bound = 0.5 * (bound + bound.conj().T)
    for sign, signed in (("+", bound), ("-", -bound)):
        lo = min_eig(mu - signed)
        if lo < -tol:
            raise InvalidNoise(
                f"mu - ({sign})(I - K K*)/2 has min eigenvalue {lo:.3e} < -{tol:.1e}"
            )
    return GaugeCovariantChannel(modes=s, K=K, mu=mu)


def identity_channel(modes: int = 1) -> GaugeCovariantChannel:
    return build_channel(np.eye(modes), np.zeros((modes, modes)))


def attenuator_channel(k, modes: int = 1) -> GaugeCovariantChannel:
    """Quantum-limited attenuator with diagonal transmission ``k``."""
    k = np.atleast_1d(np.asarray(k, dtype=np.complex128))
    if k.size == 1 and modes > 1:
        k = np.repeat(k, modes)
    K = np.diag(k)
    mu = 0.5 * (np.eye(k.size) - K @ K.conj().T)
    return build_channel(K, mu)


def amplifier_channel(kappa, modes: int = 1) -> GaugeCovariantChannel:
    """Quantum-limited amplifier with diagonal gain ``kappa``."""
    kappa = np.atleast_1d(np.asarray(kappa, dtype=np.complex128))
    if kappa.size == 1 and modes > 1:
        kappa = np.repeat(kappa, modes)
    K = np.diag(kappa)
    mu = 0.5 * (K @ K.conj().T - np.eye(kappa.size))
    return build_channel(K, mu)


def classical_noise_channel(n: float, modes: int = 1) -> GaugeCovariantChannel:
    """Additive classical noise: K = I, mu = n I with n >= 0."""
    return build_channel(np.eye(modes), n * np.eye(modes))


def classify(ch: GaugeCovariantChannel, tol: float = DEFAULT_TOL) -> ChannelClass:
    """Most specific class of a valid channel.

    Precedence on ties: Identity, then QuantumLimitedAttenuator, then
    QuantumLimitedAmplifier, then Attenuator, then Amplifier, then General.
    """
    s = ch.modes
    eye = np.eye(s)
    gram = ch.gram()
    if opnorm(ch.K - eye) <= tol and opnorm(ch.mu) <= tol:
        return ChannelClass.IDENTITY
    attenuating = min_eig(eye - gram) >= -tol
    amplifying = min_eig(gram - eye) >= -tol
    if attenuating and opnorm(ch.mu - 0.5 * (eye - gram)) <= tol:
        return ChannelClass.QUANTUM_LIMITED_ATTENUATOR
    if amplifying and opnorm(ch.mu - 0.5 * (gram - eye)) <= tol:
        return ChannelClass.QUANTUM_LIMITED_AMPLIFIER
    if attenuating:
        return ChannelClass.ATTENUATOR
    if amplifying:
        return ChannelClass.AMPLIFIER
    return ChannelClass.GENERAL


def concatenate(first: GaugeCovariantChannel, second: GaugeCovariantChannel,
                tol: float = DEFAULT_TOL) -> GaugeCovariantChannel:
    """Composition ``second after first``: K = K2 K1, mu = K2 mu1 K2* + mu2."""
    if first.modes != second.modes:
        raise DimensionMismatch(
            f"cannot concatenate channels on {first.modes} and {second.modes} modes"
        )
    K = second.K @ first.K
    mu = second.K @ first.mu @ second.K.conj().T + second.mu
    return build_channel(K, mu, tol=tol)


def decompose(ch: GaugeCovariantChannel, tol: float = DEFAULT_TOL) -> Decomposition:
    """Factor a valid channel into a quantum-limited attenuator followed by
    a quantum-limited amplifier.

    The amplifier gain is the principal Hermitian root
    ``K2 = sqrt(mu + (K K* + I)/2) >= I`` (hence always invertible) and the
    attenuator is ``K1 = K2^{-1} K`` with minimal noise.
    """
    s = ch.modes
    eye = np.eye(s)
    m = ch.mu + 0.5 * (ch.gram() + eye)
    m = 0.5 * (m + m.conj().T)
    if min_eig(m) < 1.0 - 1e-8:
        raise ValidityError(
            f"channel is invalid: mu + (K K* + I)/2 has min eigenvalue {min_eig(m):.6f} < 1"
        )
    K2 = psd_sqrt(m)
    mu2 = 0.5 * (K2 @ K2.conj().T - eye)
    K1 = np.linalg.solve(K2, ch.K)
    mu1 = 0.5 * (eye - K1 @ K1.conj().T)
    return Decomposition(
        attenuator=build_channel(K1, mu1, tol=max(tol, 1e-10)),
        amplifier=build_channel(K2, mu2, tol=max(tol, 1e-10)),
    )


def _fix_svd_phases(u: np.ndarray, vh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Make the largest-modulus entry of each right-singular vector real
    # positive; compensate in the left factor to keep the product fixed.
    u = u.copy()
    vh = vh.copy()
    for i in range(vh.shape[0]):
        j = int(np.argmax(np.abs(vh[i, :])))
        phase = vh[i, j] / abs(vh[i, j]) if abs(vh[i, j]) > 0 else 1.0
        vh[i, :] /= phase
        u[:, i] *= phase
    return u, vh


def diagonalize(ch: GaugeCovariantChannel, tol: float = DEFAULT_TOL) -> DiagonalForm:
    """Singular-value form of a quantum-limited channel.

    Returns unitaries with ``V_B @ diag(k_diag) @ V_A = K``, singular values
    sorted descending, and the one-mode quantum-limited factors read off the
    diagonal.
    """
    cls = classify(ch, tol=tol)
    if cls is ChannelClass.IDENTITY:
        kind = ChannelClass.QUANTUM_LIMITED_ATTENUATOR
    elif cls in (ChannelClass.QUANTUM_LIMITED_ATTENUATOR,
                 ChannelClass.QUANTUM_LIMITED_AMPLIFIER):
        kind = cls
    else:
        raise NotQuantumLimited(f"cannot diagonalize a {cls.value} channel")
    u, sv, vh = np.linalg.svd(ch.K)
    u, vh = _fix_svd_phases(u, vh)
    if kind is ChannelClass.QUANTUM_LIMITED_ATTENUATOR:
        sv = np.clip(sv, 0.0, 1.0)
        per_mode = tuple(attenuator_channel(x) for x in sv)
    else:
        sv = np.clip(sv, 1.0, None)
        per_mode = tuple(amplifier_channel(x) for x in sv)
    return DiagonalForm(kind=kind, V_A=vh, V_B=u, k_diag=sv, per_mode=per_mode)


def complementary_attenuator(amp: GaugeCovariantChannel,
                             tol: float = DEFAULT_TOL) -> GaugeCovariantChannel:
    """Attenuator with diagonal ``sqrt(1 - kappa_j^{-2})`` associated to a
    diagonal quantum-limited amplifier; composing it with the amplifier and a
    transposition reproduces the amplifier's complementary channel."""
    off = np.abs(amp.K - np.diag(np.diagonal(amp.K))).max()
    if off > tol or np.abs(amp.mu - np.diag(np.diagonal(amp.mu))).max() > tol:
        raise NotDiagonal("amplifier must have diagonal K and mu")
    kappa = np.diagonal(amp.K)
    if np.abs(kappa.imag).max() > tol or (kappa.real < 1.0 - tol).any():
        raise NotQuantumLimitedAmplifier("diagonal gains must be real and >= 1")
    eye = np.eye(amp.modes)
    if opnorm(amp.mu - 0.5 * (amp.gram() - eye)) > tol:
        raise NotQuantumLimitedAmplifier("noise is not the minimal amplifier noise")
    kappa = np.clip(kappa.real, 1.0, None)
    k_tilde = np.sqrt(np.clip(1.0 - kappa**-2, 0.0, None))
    return attenuator_channel(k_tilde)


def strictness_conditions(ch: GaugeCovariantChannel,
                          tol: float = DEFAULT_TOL) -> StrictnessReport:
    """Evaluate the two sufficient strict-minimizer conditions.

    (a) K invertible and mu strictly above the minimal amplifier noise;
    (b) K K* strictly above I with exactly the minimal amplifier noise.
    """
    eye = np.eye(ch.modes)
    smin = float(np.linalg.svd(ch.K, compute_uv=False)[-1])
    excess = ch.mu - 0.5 * (ch.gram() - eye)
    excess = 0.5 * (excess + excess.conj().T)
    excess_min = min_eig(excess)
    ql_defect = opnorm(excess)
    gain_min = min_eig(ch.gram() - eye)
    return StrictnessReport(
        condition_a=bool(smin > tol and excess_min > tol),
        condition_b=bool(gain_min > tol and ql_defect <= tol),
        min_singular_value=smin,
        excess_noise_min_eig=excess_min,
        quantum_limited_defect=ql_defect,
    )


def random_channel(rng: np.random.Generator, modes: int,
                   scale: float = 1.0) -> GaugeCovariantChannel:
    """Random valid channel: complex Gaussian K, noise ``|A| + B B*`` with
    ``A = (I - K K*)/2``, which satisfies both validity bounds for any B."""
    s = modes
    K = scale * (rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s))) / np.sqrt(2 * s)
    A = 0.5 * (np.eye(s) - K @ K.conj().T)
    B = 0.4 * (rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s)))
    mu = spectral_abs(0.5 * (A + A.conj().T)) + B @ B.conj().T
    return build_channel(K, mu)


# ---------------------------------------------------------------------------
# Channel JSON file format: {"modes": s, "K": [[{"re": x, "im": y}, ...]],
# "mu": [[...]]}, row-major.
# ---------------------------------------------------------------------------

def _matrix_to_json(m: np.ndarray) -> list:
    return [[{"re": float(v.real), "im": float(v.imag)} for v in row] for row in m]


def _matrix_from_json(rows, name: str, s: int) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != s:
        raise FileFormatError(f"{name}: expected {s} rows")
    out = np.zeros((s, s), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != s:
            raise FileFormatError(f"{name}: row {i} must have {s} entries")
        for j, cell in enumerate(row):
            try:
                out[i, j] = complex(float(cell["re"]), float(cell["im"]))
            except (TypeError, KeyError, ValueError) as exc:
                raise FileFormatError(
                    f"{name}: malformed entry at row {i}, column {j}: {cell!r}"
                ) from exc
    return out


def channel_to_dict(ch: GaugeCovariantChannel) -> dict:
    return {"modes": ch.modes, "K": _matrix_to_json(ch.K), "mu": _matrix_to_json(ch.mu)}


def channel_from_dict(data: dict, tol: float = DEFAULT_TOL) -> GaugeCovariantChannel:
    if not isinstance(data, dict):
        raise FileFormatError("channel file must hold a JSON object")
    try:
        s = int(data["modes"])
    except (TypeError, KeyError, ValueError) as exc:
        raise FileFormatError("channel file needs an integer 'modes' field") from exc
    if s < 1:
        raise FileFormatError("'modes' must be >= 1")
    for key in ("K", "mu"):
        if key not in data:
            raise FileFormatError(f"channel file is missing '{key}'")
    K = _matrix_from_json(data["K"], "K", s)
    mu = _matrix_from_json(data["mu"], "mu", s)
    return build_channel(K, mu, tol=tol)


def load_channel(path, tol: float = DEFAULT_TOL) -> GaugeCovariantChannel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc
    return channel_from_dict(data, tol=tol)


def dump_channel(ch: GaugeCovariantChannel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_dict(ch), fh, indent=2, sort_keys=True)
        fh.write("\n")
