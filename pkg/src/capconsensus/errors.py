"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the CLI emits in
its JSON error payload.
"""

from __future__ import annotations


class CapConsensusError(ValueError):
    code = "error"


class InvalidInput(CapConsensusError):
    code = "invalid-input"


class NotConnected(CapConsensusError):
    code = "not-connected"


class InvalidProfile(CapConsensusError):
    code = "invalid-profile"


class InfeasibleProfile(CapConsensusError):
    code = "infeasible-profile"


class SelfInverseCapacityViolation(CapConsensusError):
    code = "self-inverse-capacity-violation"


class TooLarge(CapConsensusError):
    code = "too-large"


class Infeasible(CapConsensusError):
    """No capacity-respecting assignment with all subgraphs connected exists."""

    code = "infeasible"


class Blocked(CapConsensusError):
    code = "blocked"


class InvalidState(CapConsensusError):
    code = "invalid-state"


class InvalidConfig(CapConsensusError):
    code = "invalid-config"
