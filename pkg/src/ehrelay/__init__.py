"""Energy-harvesting two-relay network with opportunistic forwarding.

``radio`` holds geometry and fading links, ``protocol`` the per-slot
forwarding table, ``energy`` the relay buffers, ``analysis`` the closed-form
steady state and ``sim`` the slot-level Monte-Carlo engine.
"""

from .errors import NegativeEntry, Unstable
from .radio import LinkSet, NetworkConfig, NodeLayout, derive_links

__all__ = ["LinkSet", "NegativeEntry", "NetworkConfig", "NodeLayout", "Unstable", "derive_links"]
__version__ = "0.1.0"
