"""acslab: a desk-scale network tomography laboratory.

Simulates congested links on fixed topologies, probes end-to-end paths
with rate-capped exponential-interval flows, labels paths with their
additive congestion status (how many congested links a path crosses), and
shows that label-constrained diagnosis algorithms localize congested links
and infer loss rates better than Boolean-status baselines.
"""

__version__ = "0.1.0"

from .acs import AcsLabel  # noqa: F401
from .errors import AcslabError  # noqa: F401
from .probing import ProbeConfig  # noqa: F401
from .simnet import GroundTruth, ScenarioConfig  # noqa: F401
from .tomography import Diagnosis, Priors  # noqa: F401
from .topology import Topology, load_topology  # noqa: F401
