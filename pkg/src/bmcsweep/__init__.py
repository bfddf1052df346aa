"""Function-by-function bounded model checking sweeps over C projects."""

from bmcsweep.analysis import Outcome, Violation, ViolationCategory, classify, map_cwe
from bmcsweep.config import FunctionMode, PropertyClass, RunConfig, load_include_paths, parse_cli
from bmcsweep.cparse import FunctionRecord, build_call_map, extract_functions, neutralize_noncode
from bmcsweep.discovery import SourceFile, list_sources
from bmcsweep.driver import Orchestrator, plan, run
from bmcsweep.prioritize import grade, order, prune_called

__version__ = "0.1.0"

__all__ = [
    "FunctionMode",
    "FunctionRecord",
    "Orchestrator",
    "Outcome",
    "PropertyClass",
    "RunConfig",
    "SourceFile",
    "Violation",
    "ViolationCategory",
    "build_call_map",
    "classify",
    "extract_functions",
    "grade",
    "list_sources",
    "load_include_paths",
    "map_cwe",
    "neutralize_noncode",
    "order",
    "parse_cli",
    "plan",
    "prune_called",
    "run",
]
