from .config import APPENDIX_CONFIG, Scenario, appendix_scenario, load_scenario, parse_scenario
from .rng import SplitMix64
from .runner import RunRecord, generate, initial_coverand, run, sphere_oracle

__all__ = [
    "APPENDIX_CONFIG",
    "RunRecord",
    "Scenario",
    "SplitMix64",
    "appendix_scenario",
    "generate",
    "initial_coverand",
    "load_scenario",
    "parse_scenario",
    "run",
    "sphere_oracle",
]
