"""Numerical verification of twistor-type complex manifolds and balanced metrics.

The package builds ``X = M × Q`` from a hypercomplex model ``M`` and a
complex manifold ``Q`` with a holomorphic map ``h: Q → P¹``, equips it with
the twisted almost complex structure, and checks integrability, the basic
type identities, and the balanced-metric constructions numerically.
"""

from . import balanced, covers, exterior, fields, hypercomplex, qmodels, scenario, twistor  # noqa: F401
from .balanced import *  # noqa: F401,F403
from .covers import *  # noqa: F401,F403
from .errors import (  # noqa: F401
    ChartError,
    ContractError,
    CriticalPointError,
    DifferentiationError,
    GeometryError,
    NotHermitianError,
    PositivityError,
    SingularMatrixError,
    StructureError,
)
from .exterior import *  # noqa: F401,F403
from .fields import *  # noqa: F401,F403
from .hypercomplex import *  # noqa: F401,F403
from .qmodels import *  # noqa: F401,F403
from .twistor import *  # noqa: F401,F403

__version__ = "0.1.0"
