"""Figure rendering for miptkz simulation outputs.

Consumes only the documented file formats — ensemble aggregate CSVs with
their ``.meta.json`` sidecars, collapse CSVs with their ``.report.json``,
and fit reports — and renders multi-panel SVG/PNG figures described by a
FigureSpec JSON.  This package contains no numerics beyond axis
transforms: rescaling and fitting happen upstream, and guide lines are
drawn from fit-report parameters, never re-fit here.
"""

from .readers import InputError, read_aggregate, read_collapse, read_fit_report
from .spec import FigureSpec, SpecError, load_spec
from .render import render

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "InputError",
    "SpecError",
    "load_spec",
    "read_aggregate",
    "read_collapse",
    "read_fit_report",
    "render",
    "__version__",
]
