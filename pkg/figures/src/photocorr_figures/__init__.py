"""Figure rendering for photocorr harness outputs.

Consumes only the harness file contract: sweep / error-scan / emission CSVs
with their JSON manifests, and per-sample CSV dumps. Reference lines (Dicke
and independent-emitter values, method-crossover position) are recomputed
from the run metadata, never hard-coded.
"""

__version__ = "0.1.0"

from .spec import FigureSpec
from .render import RenderInfo, render
