"""Quantum-token correctness for every registry memory.

Each memory stores both polarization modes of a prepared token; the
composite correctness is compared with the 7/8 security threshold.
"""

from qmemtwin.experiments import SECURITY_THRESHOLD, TokenConfig, token_correctness_values
from qmemtwin.memory import load_registry

rows = [(name, token_correctness_values(TokenConfig(name))["c"]) for name in load_registry()]
rows.append(("no memory", token_correctness_values(TokenConfig(None))["c"]))
for name, c in sorted(rows, key=lambda r: -r[1]):
    mark = "secure" if c > SECURITY_THRESHOLD else "below threshold"
    print(f"{name:24s} c = {c:.4f}  {mark}")
