"""Generalized Husimi densities and Wehrl-type classical functionals.

One-mode phase-space layer: densities ``p_rho(z) = Tr rho D(z) rho0 D(z)*``
against the measure ``d^2z / pi`` (``rho0`` a gauge-invariant Gaussian
reference, the vacuum giving the ordinary Husimi function), concave
classical functionals by grid quadrature, the measure-reprepare channel,
its smoothing/convolution identity, and the generalized Berezin-Lieb
sandwich.

Densities are evaluated in closed form through displaced number states:
``D(z)|0>`` is the coherent column and ``D(z)|k+1> = (a^dag - conj(z))
D(z)|k> / sqrt(k+1)``, so arbitrary node sets (including the rescaled ones
used by the sandwich and convolution checks) need no interpolation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gammaincc, gammaln

from . import fock
from .channels import GaugeCovariantChannel, build_channel
from .errors import (
    DimensionMismatch,
    InvalidState,
    ParameterOutOfRange,
    QuadratureError,
    TailMassTooLarge,
    TruncationLeakage,
)
from .majorization import ConcaveFunctional, OptimalityReport, SampleRow, trace_functional

TAIL_BUDGET = 1e-4
NODE_CHUNK = 16384


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Square Cartesian lattice of spacing ``step`` covering ``|z| <= radius``;
    each node carries weight ``step^2 / pi`` for the measure d^2z/pi."""

    radius: float
    step: float
    axis: np.ndarray
    mask: np.ndarray

    @property
    def weight(self) -> float:
        return self.step ** 2 / np.pi

    @property
    def nodes(self) -> np.ndarray:
        return self.axis[:, None] + 1j * self.axis[None, :]

    def integrate(self, values: np.ndarray) -> float:
        return float(values[self.mask].sum() * self.weight)


def make_grid(radius: float = 6.0, step: float = 0.05) -> PhaseSpaceGrid:
    if step <= 0:
        raise QuadratureError("grid step must be positive")
    if radius / step > 400:
        raise QuadratureError(f"radius/step = {radius / step:.0f} exceeds 400 per axis")
    n = int(round(radius / step))
    axis = step * np.arange(-n, n + 1)
    nodes = axis[:, None] + 1j * axis[None, :]
    mask = np.abs(nodes) <= radius + 1e-12
    grid = PhaseSpaceGrid(radius=float(radius), step=float(step), axis=axis, mask=mask)
    norm = grid.integrate(np.exp(-np.abs(nodes) ** 2))
    if abs(norm - 1.0) > 1e-6:
        raise QuadratureError(f"vacuum-density quadrature is {norm!r}, expected 1 +/- 1e-6")
    return grid


@dataclass(frozen=True)
class ReferenceState:
    """One-mode gauge-invariant Gaussian reference with correlation a0 >= 1/2;
    realized as the Fock-diagonal geometric state with N0 = a0 - 1/2."""

    a0: float

    def __post_init__(self):
        if self.a0 < 0.5 - 1e-12:
            raise ParameterOutOfRange(f"reference correlation a0 = {self.a0} below 1/2")

    @property
    def n_mean(self) -> float:
        return max(self.a0 - 0.5, 0.0)

    def weights(self, floor: float = 1e-18) -> np.ndarray:
        n0 = self.n_mean
        if n0 == 0.0:
            return np.ones(1)
        k_max = int(np.ceil(np.log(floor * (n0 + 1.0)) / np.log(n0 / (n0 + 1.0))))
        k = np.arange(k_max + 1, dtype=float)
        return np.exp(k * np.log(n0 / (n0 + 1.0)) - np.log(n0 + 1.0))


@dataclass(frozen=True)
class HusimiField:
    grid: PhaseSpaceGrid
    values: np.ndarray
    tail_mass: float

    def integral(self) -> float:
        return self.grid.integrate(self.values)


def _as_reference(ref) -> ReferenceState:
    return ref if isinstance(ref, ReferenceState) else ReferenceState(float(ref))


def _coherent_columns(z_flat: np.ndarray, dim: int) -> np.ndarray:
    """phi_0[i, m] = <m| D(z_i) |0> = e^{-|z|^2/2} z^m / sqrt(m!)."""
    m = np.arange(dim)
    r = np.abs(z_flat)
    theta = np.angle(z_flat)
    logr = np.log(np.where(r > 0, r, 1.0))
    logmag = -0.5 * r[:, None] ** 2 + m[None, :] * logr[:, None] - 0.5 * gammaln(m + 1.0)[None, :]
    cols = np.exp(logmag) * np.exp(1j * m[None, :] * theta[:, None])
    cols[r == 0, :] = 0.0
    cols[r == 0, 0] = 1.0
    return cols


def _raise_column(phi: np.ndarray, z_flat: np.ndarray, k: int) -> np.ndarray:
    """phi_{k+1} from phi_k via (a^dag - conj(z)) / sqrt(k+1)."""
    dim = phi.shape[1]
    out = np.empty_like(phi)
    roots = np.sqrt(np.arange(1, dim))
    out[:, 0] = -np.conj(z_flat) * phi[:, 0]
    out[:, 1:] = roots[None, :] * phi[:, :-1] - np.conj(z_flat)[:, None] * phi[:, 1:]
    return out / np.sqrt(k + 1.0)


def husimi_values(state, ref, z_nodes: np.ndarray) -> np.ndarray:
    """p(z) = Tr[state . D(z) rho0 D(z)*] at arbitrary complex nodes."""
    ref = _as_reference(ref)
    shape = np.shape(z_nodes)
    z_flat = np.asarray(z_nodes, dtype=np.complex128).ravel()
    if isinstance(state, fock.PureState):
        if state.space.modes != 1:
            raise DimensionMismatch("husimi evaluation is one-mode")
        dim = state.space.cutoff
        factors = state.amplitudes[None, :]
        pure = True
    else:
        if state.space.modes != 1:
            raise DimensionMismatch("husimi evaluation is one-mode")
        dim = state.space.cutoff
        w, v = np.linalg.eigh(0.5 * (state.matrix + state.matrix.conj().T))
        keep = w > 1e-15
        factors = (np.sqrt(w[keep])[:, None] * v[:, keep].T.conj())
        pure = False
    weights = ref.weights()
    out = np.zeros(z_flat.size)
    for start in range(0, z_flat.size, NODE_CHUNK):
        sl = slice(start, min(start + NODE_CHUNK, z_flat.size))
        z = z_flat[sl]
        phi = _coherent_columns(z, dim)
        acc = np.zeros(z.size)
        for k, qk in enumerate(weights):
            if k > 0:
                phi = _raise_column(phi, z, k - 1)
            if pure:
                acc += qk * np.abs(phi.conj() @ factors[0]) ** 2
            else:
                acc += qk * (np.abs(phi.conj() @ factors.T.conj()) ** 2).sum(axis=1)
        out[sl] = acc
    out = np.where(out < 0, 0.0, out)
    if out.max(initial=0.0) > 1.0 + 1e-8:
        raise InvalidState(f"husimi density exceeds 1: max {out.max():.6f}")
    return out.reshape(shape)


def _occupation_probabilities(state) -> np.ndarray:
    if isinstance(state, fock.PureState):
        return np.abs(state.amplitudes) ** 2
    return np.clip(np.real(np.diagonal(state.matrix)), 0.0, None)


def estimate_tail_mass(state, ref, grid: PhaseSpaceGrid) -> float:
    """Gaussian-envelope estimate of the density mass outside the grid disc.

    The number-state density with reference width N0 has off-disc mass
    T(n) ~= Q(n + 1, R^2/(N0 + 1)); coherences are bounded through
    |rho_mn| <= sqrt(rho_mm rho_nn), giving (sum_n sqrt(P(n) T(n)))^2.
    """
    ref = _as_reference(ref)
    prob = _occupation_probabilities(state)
    n = np.arange(prob.size, dtype=float)
    tails = gammaincc(n + 1.0, grid.radius ** 2 / (ref.n_mean + 1.0))
    return float(np.sum(np.sqrt(prob * tails)) ** 2)


def husimi_density(state, ref, grid: PhaseSpaceGrid,
                   tail_budget: float = TAIL_BUDGET) -> HusimiField:
    """Generalized Husimi density of a one-mode state on the grid.

    With the vacuum reference (a0 = 1/2) this is exactly <z|rho|z>.
    """
    ref = _as_reference(ref)
    tail = estimate_tail_mass(state, ref, grid)
    if tail > tail_budget:
        raise TailMassTooLarge(
            f"estimated off-grid mass {tail:.2e} exceeds budget {tail_budget:.1e}"
        )
    values = husimi_values(state, ref, grid.nodes)
    return HusimiField(grid=grid, values=values, tail_mass=tail)


def classical_functional(field: HusimiField, f: ConcaveFunctional) -> float:
    """Quadrature of f(p(z)) against d^2z/pi over the grid disc.

    Requires f(0) = 0 so the off-grid tail contributes only through the
    (budgeted) tail mass."""
    return float(np.sum(f(field.values[field.grid.mask])) * field.grid.weight)


def wehrl_entropy(field: HusimiField) -> float:
    return classical_functional(field, ConcaveFunctional(kind="von_neumann"))


def normal_density(a: float, grid: PhaseSpaceGrid) -> HusimiField:
    """Normal density q_a(z) = (2a)^{-1} e^{-|z|^2/(2a)} against d^2z/pi."""
    if a <= 0:
        raise ParameterOutOfRange("normal density needs a > 0")
    values = np.exp(-np.abs(grid.nodes) ** 2 / (2.0 * a)) / (2.0 * a)
    return HusimiField(grid=grid, values=values, tail_mass=float(np.exp(-grid.radius ** 2 / (2 * a))))


def measure_reprepare_channel(c: float, a0: float = 0.5,
                              a0p: float = 0.5) -> GaugeCovariantChannel:
    """Heterodyne-measure-then-reprepare channel: K = c, mu = a0' + c^2 a0."""
    if c <= 0:
        raise ParameterOutOfRange("scaling constant c must be positive")
    ref = _as_reference(a0)
    refp = _as_reference(a0p)
    return build_channel(np.array([[c]]), np.array([[refp.a0 + c ** 2 * ref.a0]]))


def _measure_reprepare_output(state, c: float, a0: float, a0p: float,
                              cutoff: int, leakage_budget: float) -> fock.FockOperator:
    space = fock.FockSpace(1, cutoff)
    realized = fock.realize_channel(measure_reprepare_channel(c, a0, a0p), space)
    if isinstance(state, fock.PureState):
        if state.space.cutoff != cutoff:
            amp = np.zeros(cutoff, dtype=np.complex128)
            amp[: state.space.cutoff] = state.amplitudes[:cutoff]
            state = fock.pure_state(space, amp, normalize=True)
        out = realized.apply_pure(state)
    else:
        if state.space.cutoff != cutoff:
            mat = np.zeros((cutoff, cutoff), dtype=np.complex128)
            m = min(state.space.cutoff, cutoff)
            mat[:m, :m] = state.matrix[:m, :m]
            state = fock.FockOperator(space=space, matrix=mat)
        out = realized.apply(state)
    lk = fock.leakage(out)
    if lk > leakage_budget:
        raise TruncationLeakage(
            f"measure-reprepare output leaks {lk:.2e} > {leakage_budget:.1e}; raise the cutoff"
        )
    return out


def upper_symbol(state, c: float, a0: float, a0p: float, grid: PhaseSpaceGrid,
                 cutoff: int = 128, leakage_budget: float = TAIL_BUDGET) -> HusimiField:
    """Husimi density of the measure-reprepare output with reference a0'."""
    sigma = _measure_reprepare_output(state, c, a0, a0p, cutoff, leakage_budget)
    return husimi_density(sigma, a0p, grid)


@dataclass(frozen=True)
class BerezinLiebReport:
    lower: float
    middle: float
    upper: float
    c: float
    functional: str

    @property
    def min_slack(self) -> float:
        return min(self.middle - self.lower, self.upper - self.middle)

    def sandwiched(self, slack: float = 1e-3) -> bool:
        return self.min_slack >= -slack


def berezin_lieb_check(state, c: float, a0: float, a0p: float,
                       f: ConcaveFunctional, grid: PhaseSpaceGrid,
                       cutoff: int = 128,
                       leakage_budget: float = TAIL_BUDGET) -> BerezinLiebReport:
    """Sandwich for the measure-reprepare output sigma = Phi_c[state]:

        int f(lower symbol) <= Tr f(sigma) <= int f(upper symbol),

    with lower symbol c^{-2} p_state(z/c) and upper symbol the a0'-Husimi
    density of sigma.  Both integrals are pulled back to the base grid by
    the substitution z -> c z (jacobian c^2), so no enlarged grid is needed.
    """
    p_in = husimi_values(state, a0, grid.nodes)
    total = grid.integrate(p_in)
    if abs(total - 1.0) > 1e-3:
        raise QuadratureError(f"lower-symbol mass on the grid is {total!r}, expected 1")
    lower = c ** 2 * grid.integrate(np.asarray(f(p_in / c ** 2)))
    sigma = _measure_reprepare_output(state, c, a0, a0p, cutoff, leakage_budget)
    middle = trace_functional(fock.spectrum(sigma), f)
    p_bar_scaled = husimi_values(sigma, a0p, c * grid.nodes)
    upper = c ** 2 * grid.integrate(np.asarray(f(p_bar_scaled)))
    return BerezinLiebReport(lower=lower, middle=middle, upper=upper, c=c,
                             functional=f.label)


@dataclass(frozen=True)
class ConvolutionReport:
    sup_deviation: float
    c: float


def convolution_check(state, c: float, a0: float, a0p: float,
                      grid: PhaseSpaceGrid, cutoff: int = 128,
                      leakage_budget: float = TAIL_BUDGET) -> ConvolutionReport:
    """Identity  p_bar(z) = c^{-2} (p_state * q_{a0'/c^2})(z/c).

    The left side is the upper symbol evaluated at the rescaled nodes c u;
    the right side is a lattice convolution on the base grid.  Returns the
    sup-norm deviation over the grid disc.
    """
    sigma = _measure_reprepare_output(state, c, a0, a0p, cutoff, leakage_budget)
    lhs = husimi_values(sigma, a0p, c * grid.nodes)
    rhs = c ** -2 * smooth_field(state, c, a0, a0p, grid)
    dev = np.abs(lhs - rhs)[grid.mask].max()
    return ConvolutionReport(sup_deviation=float(dev), c=c)


def smooth_field(state, c: float, a0: float, a0p: float,
                 grid: PhaseSpaceGrid) -> np.ndarray:
    """(p_state * q_{a0'/c^2})(z) on the grid, by FFT lattice convolution."""
    p_in = husimi_values(state, a0, grid.nodes)
    kernel = normal_density(_as_reference(a0p).a0 / c ** 2, grid).values
    return fftconvolve(p_in, kernel, mode="same") * grid.weight


def smoothing_deviation(state, c: float, a0: float, a0p: float,
                        grid: PhaseSpaceGrid, f: ConcaveFunctional) -> float:
    """| int f(p) - int f(p * q_{a0'/c^2}) |, the quantity driven to zero by
    large c in the smoothing limit."""
    p_in = husimi_values(state, a0, grid.nodes)
    smoothed = smooth_field(state, c, a0, a0p, grid)
    lhs = grid.integrate(np.asarray(f(p_in)))
    rhs = grid.integrate(np.asarray(f(smoothed)))
    return abs(lhs - rhs)


def wehrl_optimality_test(a0: float, n_samples: int, seed: int,
                          grid: PhaseSpaceGrid, f: ConcaveFunctional,
                          probe_dim: int = 16, cutoff: int | None = None,
                          threads: int = 1) -> OptimalityReport:
    """Classical-functional minimality of coherent states.

    Evaluates int f(p_rho) for Fock probes and Haar samples (bounded
    occupation) against the vacuum-input value, which equals the value of
    every coherent input by translation invariance.
    """
    from .majorization import _parallel_map

    cutoff = cutoff or max(2 * probe_dim, 32)
    space = fock.FockSpace(1, cutoff)
    vac_field = husimi_density(fock.vacuum_state(space), a0, grid)
    vacuum_value = classical_functional(vac_field, f)

    def evaluate(state) -> tuple[float, float]:
        field = husimi_density(state, a0, grid)
        return classical_functional(field, f), field.tail_mass

    rows = []
    best = (np.inf, "")

    def record(tag: str, value: float, tail: float, seed_tag: str):
        nonlocal best
        rows.append(SampleRow(seed=seed_tag, label=tag, functional=f.label,
                              value=value, gap=value - vacuum_value, leakage=tail))
        if value < best[0]:
            best = (value, tag)

    for n in (1, 2):
        v, tail = evaluate(fock.number_state(space, n))
        record(f"fock({n})", v, tail, "probe")
    sampled = _parallel_map(
        lambda idx: evaluate(fock.random_pure_state([int(seed), idx], space,
                                                    support=probe_dim)),
        range(n_samples), threads)
    for idx, (v, tail) in enumerate(sampled):
        record(f"haar[{seed},{idx}]", v, tail, str(seed))
    return OptimalityReport(vacuum_value=vacuum_value, best_sampled_value=best[0],
                            best_input_descriptor=best[1], gap=best[0] - vacuum_value,
                            samples=n_samples, seed=seed, functional=f.label,
                            rejected=0, rows=tuple(rows))


def field_to_csv(field: HusimiField, path) -> None:
    """Dump (x, y, p) rows over the grid disc for external plotting."""
    grid = field.grid
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "p"])
        xs = grid.axis
        for i in range(xs.size):
            for j in range(xs.size):
                if grid.mask[i, j]:
                    writer.writerow([repr(xs[i]), repr(xs[j]), repr(field.values[i, j])])
