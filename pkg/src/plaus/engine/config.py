"""Monte Carlo configuration and plausibility results."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ArgumentError

MIN_M = 100
# failed replicates tolerated per call, as a fraction of M
MAX_FAILED_FRACTION = 1e-3


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo budget and reproducibility settings.

    Attributes
    ----------
    M : int
        Simulated datasets per plausibility evaluation.
    seed : int
        Base seed; every substream is derived from it.
    workers : int
        Threads used to evaluate chunks of replicates.
    crn : bool
        Common random numbers: reuse the same substreams at every
        parameter value instead of indexing them by grid position.
    """

    M: int = 50_000
    seed: int = 0
    workers: int = 1
    crn: bool = True

    def __post_init__(self):
        if int(self.M) != self.M or self.M < MIN_M:
            raise ArgumentError(f"M must be an integer >= {MIN_M}, got {self.M}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ArgumentError("workers must be a positive integer")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "workers", int(self.workers))
        object.__setattr__(self, "crn", bool(self.crn))

    def replace(self, **changes) -> "McConfig":
        return McConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)


MONTE_CARLO = "monte-carlo"
EXACT = "exact-enumeration"
CLOSED = "closed-form"


@dataclass(frozen=True)
class PlausResult:
    """A plausibility estimate.

    ``failed`` counts replicates whose statistic could not be computed even
    after a retry; they are counted as indicator hits.
    """

    estimate: float
    mc_stderr: float
    method: str
    M_used: int
    failed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)
