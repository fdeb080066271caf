"""Monte-Carlo harness for the estimator's bias, variance and tail behavior.

Each trial draws a completely fresh pipeline (new pool, new diagonals) with
seed ``base_seed + trial_index`` and hashes one fixed vector pair per target
angle, so empirical means/variances of the normalized angle estimate are taken
over the pipeline's own randomness. Reports serialize byte-identically for
identical configs.

Also hosts the closed-form concentration-bound evaluator and two structural
diagnostics (pool-coefficient rows and their pairwise overlaps).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidBoundInputs, ThetaOutOfRange
from .pipeline import (
    EXTENDED,
    HashPipeline,
    PipelineConfig,
    Quantizer,
    build_pipeline,
    estimate_angle,
)
from .structured import CIRCULANT, TOEPLITZ, PsiRegularMatrix, SubsetStructure
from .transforms import apply_diagonal, as_signs, as_vector, fwht_normalized


def make_pair_at_angle(theta: float, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors in R^n at exactly the requested angle.

    Built as r = cos(theta) p + sin(theta) q for a random unit p and unit
    q orthogonal to p; the recomputed angle is verified to 1e-10 rad.
    """
    if not 0.0 < theta < math.pi:
        raise ThetaOutOfRange(f"theta must be in (0, pi), got {theta}")
    if n < 2:
        raise ValueError(f"need n >= 2 to realize an angle, got n={n}")
    rng = np.random.default_rng(seed)
    p = rng.standard_normal(n)
    p /= np.linalg.norm(p)
    q = rng.standard_normal(n)
    q -= (q @ p) * p
    q /= np.linalg.norm(q)
    r = math.cos(theta) * p + math.sin(theta) * q
    # atan2 form is stable near 0 and pi, unlike plain arccos
    recomputed = math.atan2(np.linalg.norm(r - (r @ p) * p), float(r @ p))
    if abs(recomputed - theta) > 1e-10:
        raise ArithmeticError(f"constructed angle off by {abs(recomputed - theta):.2e} rad")
    return p, r


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; grids beyond what a given run uses are ignored."""

    variant: str
    family: str
    k: int
    n: int
    angles: tuple[float, ...]
    trials: int
    base_seed: int
    quantizer: str = "sign"
    epsilon_grid: tuple[float, ...] = (0.05, 0.1, 0.2)
    c_grid: tuple[float, ...] = (1.0, 2.0, 4.0)
    subsets: SubsetStructure | None = None
    out_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))
        if self.trials < 100:
            raise ValueError(f"trials must be >= 100, got {self.trials}")
        if not self.angles:
            raise ValueError("need at least one target angle")
        for a in self.angles:
            if not 0.0 < a < math.pi:
                raise ThetaOutOfRange(f"angle {a} not in (0, pi)")
        if not self.epsilon_grid or not self.c_grid:
            raise ValueError("epsilon and c grids must be nonempty")
        if any(e <= 0 for e in self.epsilon_grid) or any(c <= 0 for c in self.c_grid):
            raise ValueError("grid values must be positive")
        Quantizer.from_spec(self.quantizer)

    def to_dict(self) -> dict:
        doc = {
            "variant": self.variant,
            "family": self.family,
            "k": self.k,
            "n": self.n,
            "angles": list(self.angles),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "quantizer": self.quantizer,
            "epsilon_grid": list(self.epsilon_grid),
            "c_grid": list(self.c_grid),
        }
        if self.out_path is not None:
            doc["out"] = self.out_path
        return doc


@dataclass(frozen=True)
class TailEntry:
    """One empirical tail frequency P(|estimate - theta/pi| >= epsilon)."""

    label: str  # "eps=..." for direct thresholds, "c=..." for Chebyshev-scaled ones
    epsilon: float
    frequency: float
    bound_value: float | None = None


@dataclass(frozen=True)
class AngleStats:
    theta: float
    reference_mean: float  # theta / pi
    mean: float
    se_mean: float
    var: float
    se_var: float
    tails: tuple[TailEntry, ...] = ()


@dataclass(frozen=True)
class ConcentrationReport:
    kind: str  # "bias" | "concentration"
    variant: str
    family: str
    k: int
    n: int
    trials: int
    base_seed: int
    quantizer: str
    per_angle: tuple[AngleStats, ...]

    def stats_for(self, theta: float) -> AngleStats:
        for stats in self.per_angle:
            if stats.theta == theta:
                return stats
        raise KeyError(f"no angle {theta} in report")


def _pipeline_config(cfg: ExperimentConfig, seed: int) -> PipelineConfig:
    return PipelineConfig(
        variant=cfg.variant,
        family=cfg.family,
        k=cfg.k,
        n=cfg.n,
        seed=seed,
        quantizer=Quantizer.from_spec(cfg.quantizer),
        subsets=cfg.subsets,
    )


def _collect_estimates(cfg: ExperimentConfig) -> np.ndarray:
    """(angles x trials) matrix of normalized angle estimates."""
    pairs = [
        make_pair_at_angle(theta, cfg.n, [cfg.base_seed, idx])
        for idx, theta in enumerate(cfg.angles)
    ]
    out = np.empty((len(cfg.angles), cfg.trials))
    for trial in range(cfg.trials):
        pipe = build_pipeline(_pipeline_config(cfg, cfg.base_seed + trial))
        for idx, (p, r) in enumerate(pairs):
            out[idx, trial] = estimate_angle(pipe.hash(p), pipe.hash(r)).value
    return out


def _angle_stats(theta: float, estimates: np.ndarray, tails: tuple[TailEntry, ...]) -> AngleStats:
    trials = estimates.size
    mean = float(estimates.mean())
    var = float(estimates.var(ddof=1))
    centered = estimates - mean
    m4 = float((centered**4).mean())
    return AngleStats(
        theta=float(theta),
        reference_mean=float(theta / math.pi),
        mean=mean,
        se_mean=float(math.sqrt(var / trials)),
        var=var,
        se_var=float(math.sqrt(max(m4 - var * var, 0.0) / trials)),
        tails=tails,
    )


def run_bias_experiment(cfg: ExperimentConfig) -> ConcentrationReport:
    """Mean of the estimate per angle, with standard errors; no tail grid."""
    estimates = _collect_estimates(cfg)
    per_angle = tuple(
        _angle_stats(theta, estimates[idx], ()) for idx, theta in enumerate(cfg.angles)
    )
    return ConcentrationReport(
        kind="bias",
        variant=cfg.variant,
        family=cfg.family,
        k=cfg.k,
        n=cfg.n,
        trials=cfg.trials,
        base_seed=cfg.base_seed,
        quantizer=cfg.quantizer,
        per_angle=per_angle,
    )


def chebyshev_epsilon(c: float, k: int) -> float:
    """Deviation threshold c * (sqrt(log k) / k)^(1/3) for hash size k."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    return c * (math.sqrt(math.log(k)) / k) ** (1.0 / 3.0)


def run_concentration_experiment(cfg: ExperimentConfig) -> ConcentrationReport:
    """Tail frequencies at eps = k^(-1/3), the epsilon grid, and the c grid.

    Tail rows labeled ``c=...`` use the threshold ``chebyshev_epsilon(c, k)``;
    rows labeled ``eps=...`` use the given value directly.
    """
    estimates = _collect_estimates(cfg)
    per_angle = []
    for idx, theta in enumerate(cfg.angles):
        deviations = np.abs(estimates[idx] - theta / math.pi)
        tails = [TailEntry("eps=k^-1/3", cfg.k ** (-1.0 / 3.0), 0.0)]
        tails += [TailEntry(f"eps={eps!r}", eps, 0.0) for eps in cfg.epsilon_grid]
        tails += [TailEntry(f"c={c!r}", chebyshev_epsilon(c, cfg.k), 0.0) for c in cfg.c_grid]
        tails = tuple(
            replace(t, frequency=float(np.mean(deviations >= t.epsilon))) for t in tails
        )
        per_angle.append(_angle_stats(theta, estimates[idx], tails))
    return ConcentrationReport(
        kind="concentration",
        variant=cfg.variant,
        family=cfg.family,
        k=cfg.k,
        n=cfg.n,
        trials=cfg.trials,
        base_seed=cfg.base_seed,
        quantizer=cfg.quantizer,
        per_angle=tuple(per_angle),
    )


# ---------------------------------------------------------------------------
# report serialization

CSV_COLUMNS = (
    "variant,family,k,n,theta,trials,mean,se_mean,var,epsilon_or_c,tail_freq,bound_value"
)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def report_to_dict(report: ConcentrationReport) -> dict:
    return {
        "schema": 1,
        "kind": report.kind,
        "variant": report.variant,
        "family": report.family,
        "k": report.k,
        "n": report.n,
        "trials": report.trials,
        "base_seed": report.base_seed,
        "quantizer": report.quantizer,
        "results": [
            {
                "theta": s.theta,
                "reference_mean": s.reference_mean,
                "mean": s.mean,
                "se_mean": s.se_mean,
                "var": s.var,
                "se_var": s.se_var,
                "tails": [
                    {
                        "label": t.label,
                        "epsilon": t.epsilon,
                        "frequency": t.frequency,
                        "bound_value": t.bound_value,
                    }
                    for t in s.tails
                ],
            }
            for s in report.per_angle
        ],
    }


def report_to_json(report: ConcentrationReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def report_to_csv(report: ConcentrationReport) -> str:
    lines = [CSV_COLUMNS]
    prefix = f"{report.variant},{report.family},{report.k},{report.n}"
    for s in report.per_angle:
        head = f"{prefix},{_fmt(s.theta)},{report.trials},{_fmt(s.mean)},{_fmt(s.se_mean)},{_fmt(s.var)}"
        if not s.tails:
            lines.append(f"{head},,,")
        for t in s.tails:
            lines.append(f"{head},{t.label},{_fmt(t.frequency)},{_fmt(t.bound_value)}")
    return "\n".join(lines) + "\n"


def emit_report(report: ConcentrationReport, fmt: str, path) -> None:
    """Write the report; identical reports produce byte-identical files."""
    if fmt == "json":
        text = report_to_json(report)
    elif fmt == "csv":
        text = report_to_csv(report)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# acceptance-style checks evaluated against a report (drive CLI exit codes)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str


def evaluate_checks(report: ConcentrationReport, checks) -> tuple[CheckOutcome, ...]:
    """Run declarative checks from an experiment config against its report.

    Supported kinds: {"kind": "bias", "se_multiplier": m} requires
    |mean - theta/pi| <= m * se for every angle; {"kind": "tail", "c": c,
    "max": m} requires the tail frequency at that c to be <= m everywhere.
    """
    outcomes = []
    for check in checks:
        kind = check.get("kind")
        if kind == "bias":
            m = float(check["se_multiplier"])
            worst = max(
                (abs(s.mean - s.reference_mean) / s.se_mean if s.se_mean > 0 else math.inf)
                for s in report.per_angle
            )
            outcomes.append(
                CheckOutcome(
                    name=f"bias<= {m}*se",
                    passed=bool(worst <= m),
                    detail=f"worst |mean - theta/pi| = {worst:.2f} se",
                )
            )
        elif kind == "tail":
            c = float(check["c"])
            cap = float(check["max"])
            label = f"c={c!r}"
            freqs = [
                t.frequency for s in report.per_angle for t in s.tails if t.label == label
            ]
            if not freqs:
                raise ValueError(f"report has no tail rows labeled {label}")
            worst = max(freqs)
            outcomes.append(
                CheckOutcome(
                    name=f"tail@{label}<={cap}",
                    passed=bool(worst <= cap),
                    detail=f"worst frequency {worst!r}",
                )
            )
        else:
            raise ValueError(f"unknown check kind {kind!r}")
    return tuple(outcomes)


# ---------------------------------------------------------------------------
# closed-form concentration bound


@dataclass(frozen=True)
class BoundInputs:
    """Free parameters of the extended-pipeline concentration bound.

    ``f_of_n`` is the coordinate-flatness budget evaluated at the data
    dimension; ``f_of_t`` the same function evaluated at the pool size (only
    needed for the default exponent form, see ``evaluate_theorem1_bound``).
    """

    a: float
    epsilon: float
    f_of_n: float
    t: int
    dataset_size: int  # N, enters through the pairwise union bound
    k: int
    n: int
    psi: float
    chi: float
    f_of_t: float | None = None

    def delta(self) -> float:
        """Near-orthogonality allowance a*chi + psi*f(n)^2/n."""
        return self.a * self.chi + self.psi * self.f_of_n**2 / self.n

    def mu(self, theta: float) -> float:
        """Per-coordinate perturbation probability 8k*delta/theta."""
        if not 0.0 < theta < math.pi:
            raise InvalidBoundInputs(f"theta must be in (0, pi), got {theta}")
        return 8.0 * self.k * self.delta() / theta

    @classmethod
    def with_f(cls, f, *, a, epsilon, t, dataset_size, k, n, psi, chi) -> "BoundInputs":
        """Fill both f values from a callable flatness budget."""
        return cls(
            a=a,
            epsilon=epsilon,
            f_of_n=float(f(n)),
            t=t,
            dataset_size=dataset_size,
            k=k,
            n=n,
            psi=psi,
            chi=chi,
            f_of_t=float(f(t)),
        )


@dataclass(frozen=True)
class BoundEvaluation:
    """The bound's value and its pieces; ``vacuous`` marks values <= 0 or an
    out-of-domain mu."""

    value: float
    vacuous: bool
    delta: float
    mu: float
    lam: float
    pair_failure_term: float  # 4 C(N,2) exp(-f(n)^2 / 2)
    row_failure_term: float  # 4 chi C(k,2) exp(-2 a^2 t / f^4)


def _log_sum_exp(logs) -> float:
    m = max(logs)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(x - m) for x in logs))


def evaluate_theorem1_bound(
    inputs: BoundInputs, theta: float, exponent_form: str = "t"
) -> BoundEvaluation:
    """Evaluate the success-probability lower bound

        (1 - 4 C(N,2) e^{-f(n)^2/2} - 4 chi C(k,2) e^{-2 a^2 t / f^4})
        * (1 - Lambda)

    with Lambda = (1/pi) sum_{j=ceil(eps k/2)}^{k} j^{-1/2} (k e / j)^j
    mu^j (1-mu)^{k-j} + 2 e^{-eps^2 k / 2} and mu = 8k delta / theta.

    The polynomial sum is evaluated in log space; an empty summation range
    (eps k/2 > k) leaves only the exponential term. ``exponent_form`` picks
    whether the row-failure exponent uses the pool size t with f(t) (default)
    or the dimension n with f(n).
    """
    b = inputs
    if min(b.a, b.epsilon, b.f_of_n) <= 0:
        raise InvalidBoundInputs("a, epsilon and f(n) must be positive")
    if b.t < 1 or b.k < 1 or b.n < 1 or b.dataset_size < 1:
        raise InvalidBoundInputs("t, k, n and the dataset size must be >= 1")
    if b.psi < 0 or b.chi < 0:
        raise InvalidBoundInputs("psi and chi must be >= 0")
    if exponent_form == "t":
        if b.f_of_t is None:
            raise InvalidBoundInputs("exponent form 't' needs f_of_t (use BoundInputs.with_f)")
        row_exp = math.exp(-2.0 * b.a**2 * b.t / b.f_of_t**4)
    elif exponent_form == "n":
        row_exp = math.exp(-2.0 * b.a**2 * b.n / b.f_of_n**4)
    else:
        raise ValueError(f"exponent_form must be 't' or 'n', got {exponent_form!r}")

    pair_term = 4.0 * math.comb(b.dataset_size, 2) * math.exp(-b.f_of_n**2 / 2.0)
    row_term = 4.0 * b.chi * math.comb(b.k, 2) * row_exp
    delta = b.delta()
    mu = b.mu(theta)

    azuma = 2.0 * math.exp(-b.epsilon**2 * b.k / 2.0)
    if mu >= 1.0:
        return BoundEvaluation(
            value=-math.inf,
            vacuous=True,
            delta=delta,
            mu=mu,
            lam=math.inf,
            pair_failure_term=pair_term,
            row_failure_term=row_term,
        )
    start = max(1, math.ceil(b.epsilon * b.k / 2.0))
    if start > b.k or mu == 0.0:
        lam = azuma
    else:
        log_k, log_mu, log_1m = math.log(b.k), math.log(mu), math.log1p(-mu)
        logs = [
            -0.5 * math.log(j) + j * (1.0 + log_k - math.log(j)) + j * log_mu + (b.k - j) * log_1m
            for j in range(start, b.k + 1)
        ]
        lse = _log_sum_exp(logs)
        lam = (math.exp(lse) if lse < 700.0 else math.inf) / math.pi + azuma

    factor_success = 1.0 - pair_term - row_term
    factor_lam = 1.0 - lam
    value = min(factor_success * factor_lam, 1.0)
    vacuous = factor_success <= 0.0 or factor_lam <= 0.0 or value <= 0.0
    return BoundEvaluation(
        value=value,
        vacuous=vacuous,
        delta=delta,
        mu=mu,
        lam=lam,
        pair_failure_term=pair_term,
        row_failure_term=row_term,
    )


# ---------------------------------------------------------------------------
# structural diagnostics


def pool_coefficient_rows(matrix: PsiRegularMatrix, d_signs, direction) -> np.ndarray:
    """Coefficients of each hashed coordinate as a linear form in the pool.

    Row i of the result is c_i with (P diag(d) x)_i = sum_l pool_l * c_i[l],
    i.e. c_i[l] = sum over columns j with l in S[i][j] of d_j x_j.
    """
    d = as_signs(d_signs)
    x = as_vector(direction)
    if d.size != matrix.n or x.size != matrix.n:
        raise ValueError(f"signs and direction must have length {matrix.n}")
    dx = d * x
    k, n, t = matrix.k, matrix.n, matrix.t
    out = np.zeros((k, t))
    if matrix.family == TOEPLITZ:
        rdx = dx[::-1]
        for i in range(k):
            out[i, i : i + n] = rdx
    elif matrix.family == CIRCULANT:
        for i in range(k):
            out[i] = np.roll(dx, -i)
    else:
        for i, row in enumerate(matrix.structure.subsets):
            for j, s in enumerate(row):
                for l in s:
                    out[i, l - 1] += dx[j]
    return out


def max_row_pair_overlap(matrix: PsiRegularMatrix, d_signs, direction) -> float:
    """Largest |dot product| between distinct pool-coefficient rows.

    Small values mean the hashed coordinates behave like projections onto
    nearly orthogonal directions for the given input direction.
    """
    rows = pool_coefficient_rows(matrix, d_signs, direction)
    gram = rows @ rows.T
    np.fill_diagonal(gram, 0.0)
    return float(np.abs(gram).max()) if matrix.k > 1 else 0.0


def hyperplane_basis_after_front_end(pipe: HashPipeline, p, r) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of span(p, r) pushed through the pipeline's front end.

    For the extended variant this applies the sign diagonal and the Hadamard
    rotation (the coordinate-flattening stage); the short variant returns the
    basis unchanged. Useful for studying ``max_row_pair_overlap``.
    """
    u = np.asarray(p, dtype=np.float64)
    u = u / np.linalg.norm(u)
    v = np.asarray(r, dtype=np.float64)
    v = v - (v @ u) * u
    v = v / np.linalg.norm(v)
    if pipe.variant != EXTENDED:
        return u, v
    out = []
    for w in (u, v):
        padded = np.zeros(pipe.n_padded)
        padded[: w.size] = w
        out.append(fwht_normalized(apply_diagonal(pipe.r_signs, padded)))
    return out[0], out[1]
