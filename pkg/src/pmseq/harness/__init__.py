"""Instance generators and the property-verification suite."""

from .generate import PlantSpec, generate
from .suite import ENTRIES, SUITES, SuiteReport, replay, run_suite

__all__ = ["ENTRIES", "PlantSpec", "SUITES", "SuiteReport", "generate", "replay", "run_suite"]
