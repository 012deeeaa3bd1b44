"""czlab: a numerical laboratory for higher-order Calderon commutators.

Subpackages cover the sampled-function substrate (grid), exact dyadic
geometry (dyadic), Calderon-Zygmund splits (czdecomp), rearrangements and
Lorentz norms (rearrange), the maximal-operator suite (maximal),
principal-value commutator evaluation (commutator), the exceptional-set
pipeline (exceptional), and the experiment harness (harness).
"""

__version__ = "0.1.0"
