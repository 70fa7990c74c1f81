"""teamcog: teammate modeling for cooperative MARL.

Agents build perception / belief / action portraits of their teammates from
local observations only, filter them by accuracy and relevance, and fuse the
surviving belief portraits into a recurrent Q-network trained with monotonic
value decomposition.
"""

__version__ = "0.1.0"
