"""Privileged experts, the near-goal corruption wrapper, and demo recording."""

from .demos import (
    DemoFormatError,
    Demonstrations,
    EpisodeDemo,
    load_demos,
    record_demonstrations,
    save_demos,
)
from .policies import (
    CorruptNearGoal,
    Lighthouse1DExpert,
    Lighthouse2DExpert,
    PoisonedDoorsExpert,
    ShortestPathExpert,
    make_expert,
)

__all__ = [
    "DemoFormatError", "Demonstrations", "EpisodeDemo", "load_demos",
    "record_demonstrations", "save_demos",
    "CorruptNearGoal", "Lighthouse1DExpert", "Lighthouse2DExpert",
    "PoisonedDoorsExpert", "ShortestPathExpert", "make_expert",
]
