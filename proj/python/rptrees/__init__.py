"""Tree ensembles with random output projections, sparse-aware split search,
and L1 forest compression."""

try:
    from ._rptrees import *  # noqa: F401,F403  (installed package layout)
    from . import _rptrees as _backend
except ImportError:  # in-tree builds put the extension on PYTHONPATH directly
    from _rptrees import *  # noqa: F401,F403
    import _rptrees as _backend

__version__ = "0.1.0"
__all__ = [name for name in dir(_backend) if not name.startswith("_")]
