# -*- coding: utf-8 -*-

__version__ = "0.1.0"


from . import adaboost
from . import checkpoint
from . import config
from . import datasets
from . import graph
from . import harness
from . import models
from . import numerics
from . import objectives
from . import optim
from . import trainer
