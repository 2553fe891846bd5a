"""Free Stein discrepancy, irregularity and dimension.

Every computation returns the JSON report of the command-line tool
(``"schema": "free-stein/1"``) decoded into a dictionary.
"""

import json as _json

from . import _core
from ._core import DegreeCapError, Model, ParseError, SpecError, StructuralError, load_model

SCHEMA = _core.SCHEMA

__all__ = [
    "SCHEMA",
    "Model",
    "SpecError",
    "ParseError",
    "DegreeCapError",
    "StructuralError",
    "load_model",
    "model_from_spec",
    "parse_poly",
    "discrepancy",
    "irregularity",
    "bounded",
    "sigma_exact",
    "alpha",
    "one_var",
    "fd_sigma",
    "finite_group_sigma",
    "radulescu",
    "graph",
    "eps_kernel",
    "log_energy",
    "staircase",
]


def _decoded(fn):
    def wrapper(*args, **kwargs):
        return _json.loads(fn(*args, **kwargs))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def model_from_spec(spec):
    """Builds a model from a spec given as a dict or a JSON string."""
    return _core.model_from_json(spec if isinstance(spec, str) else _json.dumps(spec))


def _spec_text(spec):
    return spec if isinstance(spec, str) else _json.dumps(spec)


parse_poly = _decoded(_core.parse_poly)
discrepancy = _decoded(_core.discrepancy)
irregularity = _decoded(_core.irregularity)
bounded = _decoded(_core.bounded)
sigma_exact = _decoded(_core.sigma_exact)
one_var = _decoded(_core.one_var)
finite_group_sigma = _decoded(_core.finite_group_sigma)
eps_kernel = _decoded(_core.eps_kernel)
log_energy = _decoded(_core.log_energy)
staircase = _decoded(_core.staircase)


def alpha(sweep, zero_tolerance=1e-8):
    """Decay exponent of R -> bounded irregularity from (R, value) pairs."""
    return _json.loads(_core.alpha([(float(r), float(v)) for r, v in sweep], zero_tolerance))


def fd_sigma(blocks):
    """Dimension of a direct sum of matrix algebras; blocks are (k, weight) with rational weights."""
    return _json.loads(_core.fd_sigma([(int(k), str(w)) for k, w in blocks]))


def radulescu(spec):
    """Projection-pair example; spec is {"pairs": [{"tau_e": .., "tau_f": .., "equal": ..}, ...]}."""
    return _json.loads(_core.radulescu(_spec_text(spec)))


def graph(spec):
    """Free graph algebra; spec is {"vertices": [...], "edges": [[v, w] or [v, w, n], ...]} (1-based)."""
    return _json.loads(_core.graph(_spec_text(spec)))
