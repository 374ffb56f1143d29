"""Membership-inference game against quantized aggregates of load profiles.

An adversary names two households. The curator secretly picks one of them,
adds ``n - 1`` other households, and publishes the quantized mean profile. The
adversary then guesses which of the two was included. The advantage is
``2 |P(correct) - 1/2|``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import PreconditionError
from .mechanisms import Constant, Identity, LinearQuantizer, Mechanism, quantizer_levels

log = logging.getLogger(__name__)

POLICIES = ("correlation", "mse", "peaks")
PEAK_MEDIAN_RATIO = 1.2
Z95 = 1.959963984540054


class PanelFormatError(ValueError):
    """A profile CSV file could not be parsed."""


@dataclass(frozen=True)
class ProfilePanel:
    """Non-negative consumption profiles, one row per individual."""

    profiles: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        profiles = np.asarray(self.profiles, dtype=float)
        if profiles.ndim != 2:
            raise PreconditionError("profiles must form a matrix (individuals x time)")
        if len(self.ids) != profiles.shape[0]:
            raise PreconditionError("one id per profile is required")
        if not np.all(np.isfinite(profiles)) or np.any(profiles < 0):
            raise PreconditionError("profiles must be finite and non-negative")
        profiles.setflags(write=False)
        object.__setattr__(self, "profiles", profiles)
        object.__setattr__(self, "ids", tuple(self.ids))

    @property
    def count(self) -> int:
        return self.profiles.shape[0]

    @property
    def horizon(self) -> int:
        return self.profiles.shape[1]

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", *self.ids])
        for t in range(self.horizon):
            w.writerow([t, *(repr(float(v)) for v in self.profiles[:, t])])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)


def synthesize_panel(count: int, horizon: int, seed: int) -> ProfilePanel:
    """Synthetic daily load profiles.

    Each profile is a base load plus a morning and an evening activity bump at
    household-specific times, with bounded uniform noise. Bump heights are
    log-normal, which gives the panel the heavy upper tail of real meter data.
    """
    if count < 2 or horizon < 2:
        raise PreconditionError("a panel needs at least 2 individuals and 2 time steps")
    rng = np.random.default_rng(seed)
    t = np.arange(horizon)[None, :]
    base = rng.uniform(0.1, 0.5, (count, 1))
    centre_am = rng.uniform(0.25, 0.40, (count, 1)) * horizon
    centre_pm = rng.uniform(0.65, 0.85, (count, 1)) * horizon
    width = rng.uniform(0.03, 0.08, (count, 2)) * horizon
    height = rng.lognormal(mean=-0.5, sigma=0.8, size=(count, 2))
    noise = rng.uniform(-0.1, 0.1, (count, horizon))
    profiles = (
        base
        + height[:, :1] * np.exp(-0.5 * ((t - centre_am) / width[:, :1]) ** 2)
        + height[:, 1:] * np.exp(-0.5 * ((t - centre_pm) / width[:, 1:]) ** 2)
        + noise
    )
    ids = tuple(f"h{k:03d}" for k in range(count))
    return ProfilePanel(np.clip(profiles, 0.0, None), ids)


def ingest_csv(path) -> ProfilePanel:
    """Read a panel from ``time,id1,id2,...`` CSV, one row per time step.

    Row and column numbers in errors are 1-based; rows count data lines after
    the header, columns include the time column.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise PanelFormatError(f"{path}: file is empty")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2 or header[0].lower() != "time" or any(not h for h in header[1:]):
        raise PanelFormatError(f"{path}: header must be 'time,id1,id2,...', got {rows[0]!r}")
    body = rows[1:]
    if not body:
        raise PanelFormatError(f"{path}: no data rows")
    values = np.empty((len(body), len(header) - 1))
    for r, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise PanelFormatError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
        for c, cell in enumerate(row[1:], start=2):
            try:
                v = float(cell)
            except ValueError:
                raise PanelFormatError(f"{path}: non-numeric cell {cell!r} at row {r}, col {c}") from None
            if not math.isfinite(v) or v < 0:
                raise PanelFormatError(f"{path}: cell {cell!r} at row {r}, col {c} is not a non-negative number")
            values[r - 1, c - 2] = v
    return ProfilePanel(values.T, tuple(header[1:]))


@dataclass(frozen=True)
class Decision:
    guess: int
    tie: bool = False
    fallback: bool = False


def _mse_decide(c0, c1, y) -> Decision:
    d0, d1 = np.sum((c0 - y) ** 2), np.sum((c1 - y) ** 2)
    if d0 == d1:
        return Decision(0, tie=True)
    return Decision(0 if d0 < d1 else 1)


def _corr_decide(c0, c1, y) -> Decision:
    if np.ptp(y) == 0 or np.ptp(c0) == 0 or np.ptp(c1) == 0:
        d = _mse_decide(c0, c1, y)
        return Decision(d.guess, d.tie, fallback=True)
    r0, r1 = np.corrcoef(c0, y)[0, 1], np.corrcoef(c1, y)[0, 1]
    if r0 == r1:
        return Decision(0, tie=True)
    return Decision(0 if r0 > r1 else 1)


def relative_peaks(series: np.ndarray) -> np.ndarray:
    """Strict local maxima at least ``PEAK_MEDIAN_RATIO`` times the series median."""
    s = np.asarray(series, dtype=float)
    if s.size < 3:
        return np.array([], dtype=int)
    inner = (s[1:-1] > s[:-2]) & (s[1:-1] > s[2:]) & (s[1:-1] >= PEAK_MEDIAN_RATIO * np.median(s))
    return np.nonzero(inner)[0] + 1


def _shared_peaks(candidate_peaks, published_peaks) -> int:
    if not len(candidate_peaks) or not len(published_peaks):
        return 0
    gaps = np.abs(candidate_peaks[:, None] - published_peaks[None, :])
    return int(np.sum(gaps.min(axis=1) <= 1))


def _peaks_decide(c0, c1, y) -> Decision:
    py = relative_peaks(y)
    s0, s1 = _shared_peaks(relative_peaks(c0), py), _shared_peaks(relative_peaks(c1), py)
    if s0 == s1:
        if not len(py):
            log.debug("published series has no relative peaks; guessing 0")
        return Decision(0, tie=True)
    return Decision(0 if s0 > s1 else 1)


_DECIDERS = {"correlation": _corr_decide, "mse": _mse_decide, "peaks": _peaks_decide}


def policy_decide(policy: str, candidate0, candidate1, published) -> Decision:
    """Guess which candidate series entered the published aggregate.

    Ties go to candidate 0. The correlation policy falls back to squared
    error when a series has zero variance.
    """
    try:
        decide = _DECIDERS[policy]
    except KeyError:
        raise PreconditionError(f"unknown policy {policy!r}; choose from {POLICIES}") from None
    c0, c1, y = (np.asarray(a, dtype=float) for a in (candidate0, candidate1, published))
    if not c0.shape == c1.shape == y.shape:
        raise PreconditionError("candidate and published series must share the horizon")
    return decide(c0, c1, y)


@dataclass(frozen=True)
class GameConfig:
    n: int
    epsilon: float
    trials: int
    seed: int
    policy: str = "correlation"
    horizon: int | None = None
    mechanism: Mechanism | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("group size must be at least 1")
        if self.trials < 1:
            raise PreconditionError("at least one trial is required")
        if self.horizon is not None and self.horizon < 2:
            raise PreconditionError("horizon must be at least 2")
        if self.policy not in POLICIES:
            raise PreconditionError(f"unknown policy {self.policy!r}; choose from {POLICIES}")


@dataclass(frozen=True)
class GameResult:
    policy: str
    n: int
    epsilon: float
    wins: int
    trials: int
    ties: int = 0
    fallbacks: int = 0

    @property
    def success_rate(self) -> float:
        return self.wins / self.trials

    @property
    def adv(self) -> float:
        return 2 * abs(self.success_rate - 0.5)

    @property
    def ci_halfwidth(self) -> float:
        p = self.success_rate
        return 2 * Z95 * math.sqrt(p * (1 - p) / self.trials)

    CSV_HEADER = "policy,n,epsilon,trials,adv,ci_halfwidth"

    def csv_row(self) -> str:
        return f"{self.policy},{self.n},{format_epsilon(self.epsilon)},{self.trials},{self.adv:.6f},{self.ci_halfwidth:.6f}"


def format_epsilon(epsilon) -> str:
    if math.isinf(epsilon):
        return "inf"
    return repr(float(epsilon))


def game_mechanism(panel: ProfilePanel, n: int, epsilon: float) -> Mechanism:
    """Mechanism for the mean of ``n`` profiles at budget ``epsilon``.

    Entries are bounded by the panel maximum, so the mean has sensitivity
    ``bound / n`` over ``[0, bound]``. Infinite budget publishes the mean as is,
    zero budget publishes a constant.
    """
    if math.isinf(epsilon):
        return Identity()
    if epsilon == 0:
        return Constant(0.0)
    bound = Fraction(float(panel.profiles.max()))
    q = quantizer_levels(epsilon, 0, bound, bound / n)
    return LinearQuantizer(q, 0, bound)


def _publish(mech: Mechanism, mean: np.ndarray) -> np.ndarray:
    if isinstance(mech, LinearQuantizer):
        # float rounding in the mean can overshoot the bound by an ulp
        return mech.quantize_array(np.clip(mean, float(mech.x_min), float(mech.x_max)))
    if isinstance(mech, Identity):
        return mean
    return np.array([float(mech(v)) for v in mean])


def play_game(panel: ProfilePanel, cfg: GameConfig) -> GameResult:
    """Run ``cfg.trials`` independent rounds of the game.

    Every round draws from its own child of ``SeedSequence(cfg.seed)``, so the
    outcome does not depend on how rounds are scheduled.
    """
    if panel.count < cfg.n + 1:
        raise PreconditionError(f"panel has {panel.count} individuals; the game needs at least {cfg.n + 1}")
    horizon = cfg.horizon or panel.horizon
    if horizon > panel.horizon:
        raise PreconditionError(f"panel has {panel.horizon} time steps, fewer than the horizon {horizon}")
    x = panel.profiles[:, :horizon]
    mech = cfg.mechanism or game_mechanism(panel, cfg.n, cfg.epsilon)
    wins = ties = fallbacks = 0
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.trials):
        rng = np.random.default_rng(child)
        i0, i1 = rng.choice(panel.count, size=2, replace=False)
        j = int(rng.integers(2))
        pool = np.setdiff1d(np.arange(panel.count), [i0, i1])
        others = rng.choice(pool, size=cfg.n - 1, replace=False)
        members = np.concatenate([[(i0, i1)[j]], others])
        published = _publish(mech, x[members].mean(axis=0))
        d = policy_decide(cfg.policy, x[i0], x[i1], published)
        wins += d.guess == j
        ties += d.tie
        fallbacks += d.fallback
    return GameResult(cfg.policy, cfg.n, cfg.epsilon, wins, cfg.trials, ties, fallbacks)
