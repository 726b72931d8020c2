from typing import Dict

from typing_extensions import TypeAlias

from .algebra import *
from .report import *
from .sequences import *

Monomial: TypeAlias = Dict[str, int]
