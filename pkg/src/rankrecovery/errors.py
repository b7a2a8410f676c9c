"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class RecoveryError(Exception):
    """Base class for all package errors."""


class UnknownNode(RecoveryError, KeyError):
    """A NodeId that is not part of the cluster (or rank table / ledger)."""

    def __init__(self, node: int) -> None:
        super().__init__(node)
        self.node = node

    def __str__(self) -> str:
        return f"unknown node P{self.node}"


class AlreadyFailed(RecoveryError):
    """mark_failed was called on a node that is already Failed."""

    def __init__(self, node: int) -> None:
        super().__init__(f"node P{node} is already failed")
        self.node = node


class NoAliveNodes(RecoveryError):
    pass


class EmptyTable(RecoveryError):
    pass


class InvalidSize(RecoveryError, ValueError):
    pass


class NotConverged(RecoveryError):
    """Spread still above epsilon after max_passes.

    Only raised by ``redistribute(..., strict=True)``; the default mode
    reports the condition in ``RedistributionReport.converged`` instead.
    The partial result is kept on the exception.
    """

    def __init__(self, state, report) -> None:
        super().__init__(
            f"spread {report.final_spread} after {report.passes} passes"
        )
        self.state = state
        self.report = report


class InstanceTooLarge(RecoveryError, ValueError):
    pass


class ParseError(RecoveryError):
    pass


class ValidationError(RecoveryError):
    """Scenario config failed validation. ``errors`` lists every problem found."""

    def __init__(self, errors: list[str]) -> None:
        super().__init__("; ".join(errors))
        self.errors = list(errors)


class CorruptLog(RecoveryError):
    pass


class ConfigMismatch(CorruptLog):
    """Replay was asked to use a config whose hash differs from the log header."""


class UnsupportedFormat(RecoveryError, ValueError):
    pass
