"""Exact probabilistic inference over sum-product expressions."""

from . import outcomes, transforms, events, distributions, spe, inference
from .spe import (Leaf, Sum, Product, SpeGraph, make_leaf, make_sum, make_product,
                  prob, logprob, density, logdensity, sample, simulate, validate,
                  node_count, tree_size, scope, configure, options)
from .inference import (condition, condition0, visit_count_probe,
                        ZeroProbabilityError, ZeroDensityError)

__version__ = "0.1.0"
