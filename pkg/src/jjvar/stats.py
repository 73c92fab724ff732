"""Beta-binomial statistics for hydrogen counts across oxide samples.

The number of H atoms found in a fixed reference area of oxide varies from
sample to sample with more spread than a plain binomial allows.  A
beta-binomial,

    P(n) = C(M, n) * B(n + alpha, M - n + beta) / B(alpha, beta),

captures that overdispersion.  This module provides the distribution
(PMF/moments/sampling), maximum-likelihood fitting with either a fixed trial
count M or a likelihood scan over M, and count-file ingestion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import betaln, gammaln, polygamma, psi

__all__ = [
    "MD_REFERENCE_AREA",
    "BetaBinomial",
    "CountSample",
    "DegenerateDataError",
    "FitConvergenceError",
    "FitResult",
    "fit",
    "log_beta",
    "read_counts",
]

# Lateral cross-section of the oxide-growth simulation cell (A^2); the area
# the count samples refer to.
MD_REFERENCE_AREA = 34.17 * 34.17


class DegenerateDataError(ValueError):
    """The counts carry no spread, so the overdispersion is unidentifiable."""


class FitConvergenceError(RuntimeError):
    """A consumer required convergence and the optimizer reported none."""


def log_beta(x: float, y: float) -> float:
    """Return ln B(x, y).

    Evaluated through log-gamma, accurate to ~1e-13 relative for arguments
    in [1e-3, 1e4].  Raises ValueError for non-positive arguments.
    """
    if not (x > 0 and y > 0):
        raise ValueError(f"log_beta requires positive arguments, got ({x}, {y})")
    return float(betaln(x, y))


@dataclass(frozen=True)
class BetaBinomial:
    """Beta-binomial distribution over n in {0, ..., trials}."""

    alpha: float
    beta: float
    trials: int

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")
        if self.trials < 0 or self.trials != int(self.trials):
            raise ValueError(f"trials must be a non-negative integer, got {self.trials}")

    def log_pmf(self, n):
        """log P(n); `n` may be a scalar or an integer array within [0, trials]."""
        n = np.asarray(n)
        if np.any(n < 0) or np.any(n > self.trials):
            raise ValueError(f"count outside support [0, {self.trials}]")
        m = self.trials
        out = (
            gammaln(m + 1.0)
            - gammaln(n + 1.0)
            - gammaln(m - n + 1.0)
            + betaln(n + self.alpha, m - n + self.beta)
            - betaln(self.alpha, self.beta)
        )
        return float(out) if out.ndim == 0 else out

    def pmf(self, n):
        """P(n), computed in log space and exponentiated."""
        return np.exp(self.log_pmf(n))

    def pmf_vector(self) -> np.ndarray:
        """PMF over the entire support 0..trials."""
        return self.pmf(np.arange(self.trials + 1))

    def mean(self) -> float:
        return self.trials * self.alpha / (self.alpha + self.beta)

    def variance(self) -> float:
        s = self.alpha + self.beta
        return self.trials * (self.trials + s) * self.alpha * self.beta / (s * s * (s + 1.0))

    def std(self) -> float:
        return math.sqrt(self.variance())

    def sample(self, seed: int, k: int) -> np.ndarray:
        """Draw `k` counts deterministically for `seed` (beta, then binomial)."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        rng = np.random.default_rng(seed)
        p = rng.beta(self.alpha, self.beta, size=k)
        return rng.binomial(self.trials, p)


@dataclass(frozen=True)
class CountSample:
    """Observed hydrogen counts, one per sample, for a reference area (A^2)."""

    counts: tuple[int, ...]
    area: float = MD_REFERENCE_AREA

    def __post_init__(self) -> None:
        if len(self.counts) == 0:
            raise ValueError("counts must be non-empty")
        if any(c < 0 or c != int(c) for c in self.counts):
            raise ValueError("counts must be non-negative integers")
        if not self.area > 0:
            raise ValueError(f"reference area must be positive, got {self.area}")


def read_counts(path: str | Path, area: float = MD_REFERENCE_AREA) -> CountSample:
    """Read counts from a one-integer-per-line file or a CSV with an `n_h` column."""
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not any(line.strip() for line in lines):
        raise ValueError(f"{path}: no counts found")
    header = next(line for line in lines if line.strip())
    if "," in header or header.strip().lower() == "n_h":
        import csv
        import io

        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or "n_h" not in reader.fieldnames:
            raise ValueError(f"{path}: CSV input requires an 'n_h' column")
        counts = []
        for i, row in enumerate(reader, start=2):
            try:
                counts.append(int(row["n_h"]))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: line {i}: bad count {row.get('n_h')!r}") from exc
    else:
        counts = []
        for i, line in enumerate(lines, start=1):
            token = line.strip()
            if not token or token.startswith("#"):
                continue
            try:
                counts.append(int(token))
            except ValueError as exc:
                raise ValueError(f"{path}: line {i}: bad count {token!r}") from exc
    if not counts:
        raise ValueError(f"{path}: no counts found")
    return CountSample(counts=tuple(counts), area=area)


@dataclass(frozen=True)
class FitResult:
    """Maximum-likelihood fit outcome, with its method-of-moments starting point."""

    dist: BetaBinomial
    log_likelihood: float
    converged: bool
    iterations: int
    initial: BetaBinomial
    initial_log_likelihood: float
    scan: tuple[tuple[int, float], ...] = ()

    def report(self) -> dict:
        """Emission-ready summary (documented JSON fields)."""
        return {
            "alpha": self.dist.alpha,
            "beta": self.dist.beta,
            "M": self.dist.trials,
            "log_likelihood": self.log_likelihood,
            "mean": self.dist.mean(),
            "std": self.dist.std(),
        }


def _log_likelihood(counts: np.ndarray, m: int, alpha: float, beta: float) -> float:
    const = np.sum(gammaln(m + 1.0) - gammaln(counts + 1.0) - gammaln(m - counts + 1.0))
    return float(
        const
        + np.sum(betaln(counts + alpha, m - counts + beta))
        - counts.size * betaln(alpha, beta)
    )


def _gradient(counts: np.ndarray, m: int, alpha: float, beta: float) -> np.ndarray:
    n = counts.size
    s = alpha + beta
    ga = np.sum(psi(counts + alpha)) - n * psi(m + s) - n * psi(alpha) + n * psi(s)
    gb = np.sum(psi(m - counts + beta)) - n * psi(m + s) - n * psi(beta) + n * psi(s)
    return np.array([ga, gb])


def _hessian(counts: np.ndarray, m: int, alpha: float, beta: float) -> np.ndarray:
    n = counts.size
    s = alpha + beta
    t_ms = polygamma(1, m + s)
    t_s = polygamma(1, s)
    haa = np.sum(polygamma(1, counts + alpha)) - n * t_ms - n * polygamma(1, alpha) + n * t_s
    hbb = np.sum(polygamma(1, m - counts + beta)) - n * t_ms - n * polygamma(1, beta) + n * t_s
    hab = n * (t_s - t_ms)
    return np.array([[haa, hab], [hab, hbb]])


def _moment_estimate(counts: np.ndarray, m: int) -> tuple[float, float]:
    mbar = counts.mean()
    var = counts.var()
    eps = 1e-9
    p = min(max(mbar / m, eps), 1.0 - eps)
    if m > 1 and var > 0:
        rho = (var / (m * p * (1.0 - p)) - 1.0) / (m - 1.0)
    else:
        rho = 0.0
    rho = min(max(rho, 1e-6), 1.0 - 1e-6)
    s = 1.0 / rho - 1.0
    return max(p * s, 1e-3), max((1.0 - p) * s, 1e-3)


def _bisect_coordinate(f, x0: float, lo: float = -30.0, hi: float = 30.0) -> float:
    """Root of f along one log-parameter coordinate; returns x0 if no bracket found."""
    f0 = f(x0)
    if not math.isfinite(f0):
        return x0
    if f0 == 0.0:
        return x0
    step = 0.5
    a, b = x0, x0
    for _ in range(80):
        if f0 > 0:
            b = min(b + step, hi)
            fb = f(b)
            if not math.isfinite(fb):
                return x0
            if fb <= 0:
                a = b - step
                break
            if b >= hi:
                return b
        else:
            a = max(a - step, lo)
            fa = f(a)
            if not math.isfinite(fa):
                return x0
            if fa >= 0:
                b = a + step
                break
            if a <= lo:
                return a
        step *= 2.0
    else:
        return x0
    for _ in range(80):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if not math.isfinite(fm):
            return x0
        if fm > 0:
            a = mid
        else:
            b = mid
        if b - a < 1e-13:
            break
    return 0.5 * (a + b)


def _mle_fixed_m(
    counts: np.ndarray, m: int, tol: float, max_iter: int
) -> tuple[BetaBinomial, float, bool, int, BetaBinomial, float]:
    a, b = _moment_estimate(counts, m)
    initial = BetaBinomial(a, b, m)
    ll0 = _log_likelihood(counts, m, a, b)

    # Damped Newton on (ln alpha, ln beta); positivity comes for free.
    u, v = math.log(a), math.log(b)
    best = (ll0, u, v)
    converged = False
    iterations = 0
    # Near the optimum the likelihood changes fall below float resolution
    # while the gradient is still shrinking; accept likelihood-neutral steps
    # so Newton can finish quadratically.
    ll_slack = 1e-10 * max(1.0, abs(ll0))
    for iterations in range(1, max_iter + 1):
        a, b = math.exp(u), math.exp(v)
        g_nat = _gradient(counts, m, a, b)
        g = np.array([a * g_nat[0], b * g_nat[1]])
        if np.max(np.abs(g)) < tol:
            converged = True
            break
        h_nat = _hessian(counts, m, a, b)
        h = np.array(
            [
                [a * a * h_nat[0, 0] + a * g_nat[0], a * b * h_nat[0, 1]],
                [a * b * h_nat[0, 1], b * b * h_nat[1, 1] + b * g_nat[1]],
            ]
        )
        try:
            step = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            step = np.array([np.nan, np.nan])
        ll_here = _log_likelihood(counts, m, a, b)
        moved = False
        if np.all(np.isfinite(step)):
            lam = 1.0
            for _ in range(40):
                u_new = min(max(u + lam * step[0], -30.0), 30.0)
                v_new = min(max(v + lam * step[1], -30.0), 30.0)
                ll_new = _log_likelihood(counts, m, math.exp(u_new), math.exp(v_new))
                if math.isfinite(ll_new) and ll_new >= ll_here - ll_slack and (u_new, v_new) != (u, v):
                    u, v = u_new, v_new
                    moved = True
                    break
                lam *= 0.5
        if not moved:
            # Non-finite or unproductive Newton step: fall back to bisecting
            # each log-coordinate on the sign of its partial derivative.
            u = _bisect_coordinate(
                lambda uu: math.exp(uu) * _gradient(counts, m, math.exp(uu), math.exp(v))[0], u
            )
            v = _bisect_coordinate(
                lambda vv: math.exp(vv) * _gradient(counts, m, math.exp(u), math.exp(vv))[1], v
            )
            ll_new = _log_likelihood(counts, m, math.exp(u), math.exp(v))
            if not math.isfinite(ll_new) or ll_new <= ll_here + 1e-12:
                break
        ll_cur = _log_likelihood(counts, m, math.exp(u), math.exp(v))
        if ll_cur >= best[0]:
            best = (ll_cur, u, v)

    ll_cur = _log_likelihood(counts, m, math.exp(u), math.exp(v))
    if ll_cur >= best[0]:
        best = (ll_cur, u, v)
    # Never report a likelihood below the initializer's.
    if best[0] < ll0:
        best = (ll0, math.log(initial.alpha), math.log(initial.beta))
    if not converged:
        a, b = math.exp(best[1]), math.exp(best[2])
        g_nat = _gradient(counts, m, a, b)
        converged = float(max(abs(a * g_nat[0]), abs(b * g_nat[1]))) < tol
    dist = BetaBinomial(math.exp(best[1]), math.exp(best[2]), m)
    return dist, best[0], converged, iterations, initial, ll0


def fit(
    sample: CountSample | Sequence[int],
    trials: int | None = None,
    scan_range: tuple[int, int] | None = None,
    *,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> FitResult:
    """Maximum-likelihood beta-binomial fit.

    With `trials` given, M is fixed; otherwise every M in `scan_range`
    (default: [max(counts), max(counts) + 60]) is fitted and the best
    likelihood wins.  Raises DegenerateDataError when all counts are equal
    and ValueError when a count exceeds a fixed M.
    """
    counts = np.asarray(sample.counts if isinstance(sample, CountSample) else sample, dtype=float)
    if counts.size < 2 or np.unique(counts).size < 2:
        raise DegenerateDataError("need at least two distinct count values to fit")

    cmax = int(counts.max())
    if trials is not None:
        if cmax > trials:
            raise ValueError(f"count {cmax} exceeds fixed trial number {trials}")
        dist, ll, conv, it, init, ll0 = _mle_fixed_m(counts, int(trials), tol, max_iter)
        return FitResult(dist, ll, conv, it, init, ll0)

    lo, hi = scan_range if scan_range is not None else (cmax, cmax + 60)
    lo = max(int(lo), cmax, 1)
    hi = int(hi)
    if hi < lo:
        raise ValueError(f"empty scan range [{lo}, {hi}]")
    best = None
    table = []
    for m in range(lo, hi + 1):
        dist, ll, conv, it, init, ll0 = _mle_fixed_m(counts, m, tol, max_iter)
        table.append((m, ll))
        if best is None or ll > best[1]:
            best = (dist, ll, conv, it, init, ll0)
    dist, ll, conv, it, init, ll0 = best
    return FitResult(dist, ll, conv, it, init, ll0, scan=tuple(table))
