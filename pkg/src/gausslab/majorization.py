"""Majorization order on output spectra and verification sweeps.

Randomized and probe-driven checks that vacuum (and coherent) inputs
minimize every concave trace functional of the output, that output spectra
are majorized by the vacuum output, that the strict-minimizer conditions
produce strictly positive gaps, and that output purities multiply across
tensor products.  These are statistical verifications at finite cutoff,
not proofs.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from . import fock
from .channels import GaugeCovariantChannel, strictness_conditions
from .errors import ConditionNotMet, TruncationLeakage
from .states import output_purity

LEAKAGE_BUDGET = 1e-6
MAJORIZATION_TOL = 1e-8


# ---------------------------------------------------------------------------
# Concave functionals on [0, 1] with f(0) = 0.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcaveFunctional:
    """Tagged concave function on [0, 1] with f(0) = 0.

    Kinds: ``von_neumann`` (f = -x ln x), ``renyi`` (f = -x^p, p > 1),
    ``polygonal`` (piecewise-linear through knots, nonincreasing slopes).
    """

    kind: str
    p: float | None = None
    knots: tuple[tuple[float, float], ...] | None = None

    @property
    def label(self) -> str:
        if self.kind == "von_neumann":
            return "vonNeumann"
        if self.kind == "renyi":
            return f"renyi({self.p:g})"
        pts = ",".join(f"({x:g},{y:g})" for x, y in self.knots)
        return f"polygonal[{pts}]"

    @property
    def strictly_concave(self) -> bool:
        return self.kind in ("von_neumann", "renyi")

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        if self.kind == "von_neumann":
            out = -xlogy(x, x)
        elif self.kind == "renyi":
            out = -np.power(x, self.p)
        else:
            xs = np.array([k[0] for k in self.knots])
            ys = np.array([k[1] for k in self.knots])
            out = np.interp(x, xs, ys)
        return out if out.ndim else float(out)


def von_neumann_functional() -> ConcaveFunctional:
    return ConcaveFunctional(kind="von_neumann")


def renyi_functional(p: float) -> ConcaveFunctional:
    if not p > 1.0:
        raise ConditionNotMet(f"renyi functional needs p > 1, got {p}")
    return ConcaveFunctional(kind="renyi", p=float(p))


def polygonal_functional(knots) -> ConcaveFunctional:
    pts = tuple((float(x), float(y)) for x, y in knots)
    if pts[0] != (0.0, 0.0):
        raise ConditionNotMet("polygonal functional must start at (0, 0)")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if not (np.diff(xs) > 0).all():
        raise ConditionNotMet("polygonal knots must be strictly increasing in x")
    slopes = np.diff(ys) / np.diff(xs)
    if not (np.diff(slopes) <= 1e-12).all():
        raise ConditionNotMet("polygonal slopes must be nonincreasing (concavity)")
    return ConcaveFunctional(kind="polygonal", knots=pts)


def threshold_functional(t: float) -> ConcaveFunctional:
    """f_t(x) = min(x, t): the generating family of the concave order."""
    if not 0.0 < t < 1.0:
        raise ConditionNotMet("threshold must lie strictly inside (0, 1)")
    return polygonal_functional(((0.0, 0.0), (t, t), (1.0, t)))


def default_functionals() -> tuple[ConcaveFunctional, ...]:
    """The acceptance family: von Neumann, Renyi-2, three fixed polygonals."""
    return (
        von_neumann_functional(),
        renyi_functional(2.0),
        threshold_functional(0.1),
        threshold_functional(0.35),
        polygonal_functional(((0.0, 0.0), (0.2, 0.5), (0.6, 0.8), (1.0, 0.9))),
    )


def trace_functional(values, f: ConcaveFunctional) -> float:
    """sum_i f(lambda_i) over a spectrum, with 0 ln 0 = 0."""
    return float(np.sum(f(np.asarray(values, dtype=float))))


def majorizes(a, b, tol: float = MAJORIZATION_TOL) -> bool:
    """True iff every descending partial sum of ``a`` dominates ``b`` - tol."""
    return partial_sum_deficit(a, b) <= tol


def partial_sum_deficit(a, b) -> float:
    """max_m (sum_{i<=m} b_i - sum_{i<=m} a_i); <= 0 means a majorizes b."""
    a = np.sort(np.asarray(a, dtype=float))[::-1]
    b = np.sort(np.asarray(b, dtype=float))[::-1]
    n = max(a.size, b.size)
    ca = np.zeros(n)
    cb = np.zeros(n)
    ca[:a.size] = a
    cb[:b.size] = b
    return float(np.max(np.cumsum(cb) - np.cumsum(ca)))


def concave_order_agrees(a, b, tol: float = 1e-12) -> bool:
    """Threshold-family criterion: sum min(a_i, t) <= sum min(b_i, t) for all
    t in the union of component values (sufficient for piecewise-linear
    comparison at equal totals)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ts = np.union1d(a, b)
    ts = ts[ts > 0]
    sa = np.minimum(a[:, None], ts[None, :]).sum(axis=0)
    sb = np.minimum(b[:, None], ts[None, :]).sum(axis=0)
    return bool((sa <= sb + tol).all())


# ---------------------------------------------------------------------------
# Probe sets and sampling.
# ---------------------------------------------------------------------------

def default_pure_probes(space: fock.FockSpace,
                        include_coherent: bool = True) -> list[tuple[str, fock.PureState]]:
    """Deterministic one-mode probes: Fock states, balanced superpositions,
    and (optionally) small coherent states."""
    d = space.cutoff
    probes = [
        ("fock(1)", fock.number_state(space, 1)),
        ("fock(2)", fock.number_state(space, 2)),
    ]
    amp = np.zeros(d, dtype=np.complex128)
    amp[0] = amp[1] = 1 / np.sqrt(2)
    probes.append(("(|0>+|1>)/sqrt2", fock.pure_state(space, amp)))
    amp = np.zeros(d, dtype=np.complex128)
    amp[1] = 1 / np.sqrt(2)
    amp[2] = 1j / np.sqrt(2)
    probes.append(("(|1>+i|2>)/sqrt2", fock.pure_state(space, amp)))
    if include_coherent:
        probes.append(("coherent(0.5)", fock.coherent_state(0.5, space)))
        probes.append(("coherent(0.5i)", fock.coherent_state(0.5j, space)))
    return probes


def _sample_state(base_seed: int, index: int, retry: int,
                  space: fock.FockSpace, support: int) -> fock.PureState:
    return fock.random_pure_state([int(base_seed), int(index), int(retry)], space,
                                  support=support)


@dataclass(frozen=True)
class SampleRow:
    seed: str
    label: str
    functional: str
    value: float
    gap: float
    leakage: float


@dataclass(frozen=True)
class OptimalityReport:
    vacuum_value: float
    best_sampled_value: float
    best_input_descriptor: str
    gap: float
    samples: int
    seed: int
    functional: str
    rejected: int = 0
    rows: tuple[SampleRow, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class SweepReport:
    passes: int
    total: int
    worst_deficit: float
    worst_input: str
    seed: int
    rejected: int = 0
    rows: tuple[SampleRow, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class StrictGapRow:
    label: str
    kind: str  # "pure" | "mixed" | "coherent"
    value: float
    gap: float


@dataclass(frozen=True)
class StrictGapReport:
    vacuum_value: float
    min_gap: float
    coherent_gap: float
    condition_a: bool
    condition_b: bool
    rows: tuple[StrictGapRow, ...]


@dataclass(frozen=True)
class AdditivityReport:
    bound: float
    vacuum_value: float
    max_sample_value: float
    samples: int
    seed: int
    order: float
    rejected: int = 0
    rows: tuple[SampleRow, ...] = field(default=(), repr=False)


def _parallel_map(fn, items, threads: int):
    """Ordered map, optionally on a thread pool (BLAS releases the GIL).
    Per-item seeds are counter-derived, so results do not depend on the
    execution order or thread count."""
    if threads <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class _SpectrumSampler:
    """Shared machinery: realize the channel once, then map seeded samples
    and probes to output spectra under the leakage budget."""

    def __init__(self, ch: GaugeCovariantChannel, cutoff: int,
                 sample_support: int = 4, leakage_budget: float = LEAKAGE_BUDGET):
        self.space = fock.FockSpace(ch.modes, cutoff)
        self.realized = fock.realize_channel(ch, self.space)
        self.support = sample_support
        self.budget = leakage_budget

    def spectrum_of(self, state: fock.PureState | fock.FockOperator) -> tuple[np.ndarray, float]:
        if isinstance(state, fock.PureState):
            out = self.realized.apply_pure(state)
        else:
            out = self.realized.apply(state)
        lam = fock.spectrum(out)
        return lam, float(1.0 - lam.sum())

    def vacuum_spectrum(self) -> np.ndarray:
        lam, _ = self.spectrum_of(fock.vacuum_state(self.space))
        return lam

    def sampled_spectrum(self, base_seed: int, index: int,
                         max_retries: int = 8) -> tuple[str, np.ndarray, float, int]:
        for retry in range(max_retries):
            psi = _sample_state(base_seed, index, retry, self.space, self.support)
            lam, lk = self.spectrum_of(psi)
            if lk <= self.budget:
                tag = f"haar[{base_seed},{index}]" if retry == 0 else \
                    f"haar[{base_seed},{index},{retry}]"
                return tag, lam, lk, retry
        raise TruncationLeakage(
            f"sample ({base_seed}, {index}) exceeded leakage budget {self.budget:.1e} "
            f"after {max_retries} retries"
        )


def vacuum_optimality_test(ch: GaugeCovariantChannel, f: ConcaveFunctional,
                           n_samples: int, seed: int, cutoff: int = 40,
                           sample_support: int = 4,
                           include_coherent_probes: bool = True,
                           threads: int = 1) -> OptimalityReport:
    """Search for inputs beating the vacuum on Tr f of the channel output.

    Evaluates Haar samples (occupation-bounded) plus the deterministic probe
    set; the gap ``min sampled value - vacuum value`` should never be
    significantly negative.
    """
    reports = optimality_sweep(ch, (f,), n_samples, seed, cutoff=cutoff,
                               sample_support=sample_support,
                               include_coherent_probes=include_coherent_probes,
                               threads=threads)
    return reports[0]


def optimality_sweep(ch: GaugeCovariantChannel, fs, n_samples: int, seed: int,
                     cutoff: int = 40, sample_support: int = 4,
                     include_coherent_probes: bool = True,
                     threads: int = 1) -> list[OptimalityReport]:
    """Same as :func:`vacuum_optimality_test` for a family of functionals,
    computing each output spectrum once."""
    fs = tuple(fs)
    sampler = _SpectrumSampler(ch, cutoff, sample_support)
    vac = sampler.vacuum_spectrum()
    vacuum_values = [trace_functional(vac, f) for f in fs]
    rows: list[list[SampleRow]] = [[] for _ in fs]
    best = [(np.inf, "")] * len(fs)
    rejected = 0

    def record(tag: str, lam: np.ndarray, lk: float, seed_tag: str):
        for i, f in enumerate(fs):
            v = trace_functional(lam, f)
            rows[i].append(SampleRow(seed=seed_tag, label=tag, functional=f.label,
                                     value=v, gap=v - vacuum_values[i], leakage=lk))
            if v < best[i][0]:
                best[i] = (v, tag)

    if ch.modes == 1:
        for tag, probe in default_pure_probes(sampler.space, include_coherent_probes):
            lam, lk = sampler.spectrum_of(probe)
            record(tag, lam, lk, "probe")
    samples = _parallel_map(lambda idx: sampler.sampled_spectrum(seed, idx),
                            range(n_samples), threads)
    for tag, lam, lk, retries in samples:
        rejected += retries
        record(tag, lam, lk, str(seed))
    return [
        OptimalityReport(
            vacuum_value=vacuum_values[i],
            best_sampled_value=best[i][0],
            best_input_descriptor=best[i][1],
            gap=best[i][0] - vacuum_values[i],
            samples=n_samples,
            seed=seed,
            functional=fs[i].label,
            rejected=rejected,
            rows=tuple(rows[i]),
        )
        for i in range(len(fs))
    ]


def majorization_sweep(ch: GaugeCovariantChannel, n_samples: int, seed: int,
                       cutoff: int = 40, sample_support: int = 4,
                       tol: float = MAJORIZATION_TOL,
                       include_coherent_probes: bool = False,
                       threads: int = 1) -> SweepReport:
    """Check that the vacuum-output spectrum majorizes every sampled output.

    Leakage mass is left as a zero tail (never renormalized), which only
    lowers the sampled partial sums.
    """
    sampler = _SpectrumSampler(ch, cutoff, sample_support)
    vac = sampler.vacuum_spectrum()
    rows = []
    passes = 0
    rejected = 0
    worst = (-np.inf, "")
    results: list[tuple[str, np.ndarray, float, str]] = []
    if ch.modes == 1:
        for tag, probe in default_pure_probes(sampler.space, include_coherent_probes):
            lam, lk = sampler.spectrum_of(probe)
            results.append((tag, lam, lk, "probe"))
    samples = _parallel_map(lambda idx: sampler.sampled_spectrum(seed, idx),
                            range(n_samples), threads)
    for tag, lam, lk, retries in samples:
        rejected += retries
        results.append((tag, lam, lk, str(seed)))
    for tag, lam, lk, seed_tag in results:
        deficit = partial_sum_deficit(vac, lam)
        passes += int(deficit <= tol)
        if deficit > worst[0]:
            worst = (deficit, tag)
        rows.append(SampleRow(seed=seed_tag, label=tag, functional="partial-sums",
                              value=deficit, gap=deficit, leakage=lk))
    return SweepReport(passes=passes, total=len(results), worst_deficit=worst[0],
                       worst_input=worst[1], seed=seed, rejected=rejected,
                       rows=tuple(rows))


def optimize_input(ch: GaugeCovariantChannel, f: ConcaveFunctional,
                   init: fock.PureState, max_iters: int = 60,
                   step: float = 0.1, support: int | None = None,
                   leakage_budget: float = LEAKAGE_BUDGET) -> tuple[fock.PureState, float]:
    """Greedy coordinate descent on Tr f(channel output) over pure inputs.

    Perturbs real/imaginary amplitude components (on the leading ``support``
    levels) with renormalization and keeps strict improvements; the step
    halves when a full pass stalls.  Candidates whose output leaks past the
    budget are rejected, so truncation cannot masquerade as low entropy.
    A counterexample hunter, not a global optimizer.
    """
    space = init.space
    realized = fock.realize_channel(ch, space)
    if support is None:
        support = min(8, space.dim)

    def value_of(vec: np.ndarray) -> float:
        out = realized.apply(fock.FockOperator(space=space, matrix=np.outer(vec, vec.conj())))
        lam = fock.spectrum(out)
        if 1.0 - lam.sum() > leakage_budget:
            return np.inf
        return trace_functional(lam, f)

    best_vec = init.amplitudes.copy()
    best_val = value_of(best_vec)
    for _ in range(max_iters):
        improved = False
        for idx in range(support):
            for delta in (step, -step, 1j * step, -1j * step):
                cand = best_vec.copy()
                cand[idx] += delta
                cand /= np.linalg.norm(cand)
                val = value_of(cand)
                if val < best_val - 1e-12:
                    best_vec, best_val = cand, val
                    improved = True
        if not improved:
            step *= 0.5
            if step < 1e-4:
                break
    return fock.pure_state(space, best_vec), best_val


def coherent_fit(psi: fock.PureState) -> tuple[complex, float]:
    """Best coherent amplitude (= <a>) and the fidelity to that coherent state."""
    d = psi.space.cutoff
    a = fock.annihilation(d)
    zeta = complex(psi.amplitudes.conj() @ (a @ psi.amplitudes))
    target = fock.coherent_state(zeta, psi.space)
    fid = abs(np.vdot(target.amplitudes, psi.amplitudes)) ** 2
    return zeta, float(fid)


def strict_gap_probe(ch: GaugeCovariantChannel, f: ConcaveFunctional,
                     cutoff: int = 40, coherent_cutoff: int = 80,
                     coherent_amplitude: complex = 0.7) -> StrictGapReport:
    """Gaps of non-coherent probes over the vacuum value.

    Requires a strictly concave functional and a channel satisfying one of
    the two strict-minimizer conditions; the observed gaps are reported
    without an a-priori threshold.  A coherent probe is evaluated at a
    higher cutoff as the equality sanity check.
    """
    if not f.strictly_concave:
        raise ConditionNotMet(f"{f.label} is not strictly concave")
    strict = strictness_conditions(ch)
    if not (strict.condition_a or strict.condition_b):
        raise ConditionNotMet("channel satisfies neither strict-minimizer condition")
    sampler = _SpectrumSampler(ch, cutoff)
    vac = trace_functional(sampler.vacuum_spectrum(), f)
    rows = []
    d = sampler.space.cutoff
    pure = default_pure_probes(sampler.space, include_coherent=False)
    for tag, probe in pure:
        lam, _ = sampler.spectrum_of(probe)
        v = trace_functional(lam, f)
        rows.append(StrictGapRow(label=tag, kind="pure", value=v, gap=v - vac))
    coh = fock.coherent_state(coherent_amplitude, sampler.space)
    dephased = fock.FockOperator(space=sampler.space,
                                 matrix=np.diag(np.abs(coh.amplitudes) ** 2).astype(complex))
    mixed = [("thermal(0.3)", fock.thermal_state(0.3, sampler.space)),
             ("dephased-coherent(0.7)", dephased)]
    for tag, probe in mixed:
        lam, _ = sampler.spectrum_of(probe)
        v = trace_functional(lam, f)
        rows.append(StrictGapRow(label=tag, kind="mixed", value=v, gap=v - vac))
    big = _SpectrumSampler(ch, max(cutoff, coherent_cutoff))
    vac_big = trace_functional(big.vacuum_spectrum(), f)
    lam, _ = big.spectrum_of(fock.coherent_state(coherent_amplitude, big.space))
    coh_value = trace_functional(lam, f)
    rows.append(StrictGapRow(label=f"coherent({coherent_amplitude})", kind="coherent",
                             value=coh_value, gap=coh_value - vac_big))
    min_gap = min(r.gap for r in rows if r.kind != "coherent")
    return StrictGapReport(vacuum_value=vac, min_gap=min_gap,
                           coherent_gap=coh_value - vac_big,
                           condition_a=strict.condition_a,
                           condition_b=strict.condition_b, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Additivity of output purities across tensor products.
# ---------------------------------------------------------------------------

def _mode_kraus_product(realized: fock.FockChannel, mode: int,
                        support: int) -> list[np.ndarray]:
    """Composite one-mode Kraus list (amplifier after attenuator after phase),
    with attenuator labels trimmed to the sampled occupation support."""
    att, amp = realized.stages[mode]
    d = realized.space.cutoff
    phase = realized.pipelines[mode].phase
    rot = np.exp(1j * phase * np.arange(d))
    ops: list[np.ndarray] = [np.diag(rot)]
    if att is not None:
        ops = [A @ np.diag(rot) for A in att.ops[: support + 1]]
    if amp is not None:
        base = ops
        ops = [B @ A for B in amp.ops for A in base]
    return ops


def additivity_test(a: GaugeCovariantChannel, b: GaugeCovariantChannel, p: float,
                    n_samples: int, seed: int, cutoff: int = 30,
                    sample_support: int = 3,
                    leakage_budget: float = LEAKAGE_BUDGET,
                    threads: int = 1) -> AdditivityReport:
    """Fock check of nu_p(a (x) b) = nu_p(a) nu_p(b) on entangled inputs.

    Samples Haar two-mode pure states with bounded occupation, computes
    Tr ((a (x) b)[rho])^p through the Gram matrix of the Kraus images, and
    compares to the closed-form bound; vacuum (x) vacuum must attain it.
    """
    if a.modes != 1 or b.modes != 1:
        raise ConditionNotMet("additivity_test needs one-mode factors")
    bound = output_purity(a, p) * output_purity(b, p)
    space = fock.FockSpace(2, cutoff)
    ra = fock.realize_channel(a, fock.FockSpace(1, cutoff))
    rb = fock.realize_channel(b, fock.FockSpace(1, cutoff))
    ops_a = _mode_kraus_product(ra, 0, sample_support)
    ops_b = _mode_kraus_product(rb, 0, sample_support)
    stack_b = np.stack(ops_b)

    def purity_of(psi: fock.PureState) -> tuple[float, float]:
        mat = psi.amplitudes.reshape(cutoff, cutoff)
        vs = []
        for A in ops_a:
            t = A @ mat
            block = np.einsum("ab,mcb->mac", t, stack_b, optimize=True)
            vs.append(block.reshape(len(ops_b), -1))
        v = np.concatenate(vs, axis=0)
        gram = v @ v.conj().T
        trace = float(np.real(np.trace(gram)))
        if abs(p - 2.0) < 1e-12:
            val = float(np.sum(np.abs(gram) ** 2))
        else:
            lam = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
            val = float(np.sum(lam ** p))
        return val, 1.0 - trace

    vacuum_value, _ = purity_of(fock.vacuum_state(space))

    def sample_worker(idx: int) -> tuple[float, float, int]:
        for retry in range(8):
            psi = _sample_state(seed, idx, retry, space, sample_support)
            value, lk = purity_of(psi)
            if lk <= leakage_budget:
                return value, lk, retry
        raise TruncationLeakage(f"additivity sample ({seed}, {idx}) kept leaking")

    outcomes = _parallel_map(sample_worker, range(n_samples), threads)
    rows = []
    rejected = 0
    max_value = -np.inf
    for idx, (value, lk, retries) in enumerate(outcomes):
        rejected += retries
        rows.append(SampleRow(seed=str(seed), label=f"haar2[{seed},{idx}]",
                              functional=f"purity(p={p:g})",
                              value=value, gap=value - bound, leakage=lk))
        max_value = max(max_value, value)
    return AdditivityReport(bound=bound, vacuum_value=vacuum_value,
                            max_sample_value=max_value, samples=n_samples,
                            seed=seed, order=p, rejected=rejected, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Report serialization.
# ---------------------------------------------------------------------------

def to_jsonable(obj):
    """Recursively convert dataclass reports / numpy values for json.dump."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def report_to_json(report, path=None) -> str:
    text = json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def rows_to_csv(rows, path) -> None:
    """One row per sample: seed, input descriptor, functional, value, gap,
    leakage."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", "input", "functional", "value", "gap", "leakage"])
        for row in rows:
            writer.writerow([row.seed, row.label, row.functional,
                             repr(row.value), repr(row.gap), repr(row.leakage)])
