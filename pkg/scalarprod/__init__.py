__name__ = "scalarprod"
__version__ = "0.1.0a"
__license__ = "MIT"
__author__ = "Snipy7374"
__copyright__ = "Copyright 2023-present Snipy7374"

from .actions import *
from .adjunction import *
from .arith import *
from .budget import *
from .engine import *
from .errors import *
from .groebner import *
from .hammond import *
from .kronecker import *
from .oracle import *
from .orders import *
from .parsing import *
from .problems import *
from .report import *
from .sequences import *
from .symfun import *
from .utils import *
from .weyl import *
