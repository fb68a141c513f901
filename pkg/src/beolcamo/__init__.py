"""BEOL interconnect camouflaging and oracle-guided SAT attack toolkit."""
from importlib import metadata as _md

try:
    __version__ = _md.version("artifact")
except _md.PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .attack import (AttackConfig, AttackResult, AttackStatus, EquivalenceResult, dip_loop,
                     equivalence_check)
from .bench import parse_bench, read_bench, save_bench, write_bench
from .camouflage import (CamouflagedNetlist, Scheme, SelectionSet, apply_camouflage,
                         function_count, select_gates)
from .lock import Key, LockedCircuit, lock, lock_prior_art, resolve
from .netlist import GateKind, Netlist, stats
from .sim import simulate

__all__ = [
    "AttackConfig", "AttackResult", "AttackStatus", "CamouflagedNetlist", "EquivalenceResult",
    "GateKind", "Key", "LockedCircuit", "Netlist", "Scheme", "SelectionSet", "__version__",
    "apply_camouflage", "dip_loop", "equivalence_check", "function_count", "lock",
    "lock_prior_art", "parse_bench", "read_bench", "resolve", "save_bench", "select_gates",
    "simulate", "stats", "write_bench",
]
