"""Exception types shared across the package."""


class EdgeArmError(Exception):
    """Base class for all orchestrator errors."""


class MalformedDescriptor(EdgeArmError):
    """A descriptor file is not valid YAML or violates its schema."""


class NegativeRequirement(MalformedDescriptor):
    """A requirement value is negative (or non-positive where positivity is required)."""


class DanglingLinkTarget(MalformedDescriptor):
    """A link requirement names a service that is not part of the application."""


class ConfigInvalid(EdgeArmError):
    """The global configuration file is malformed or violates an invariant."""


class InvalidShape(EdgeArmError):
    """A testbed shape request is inconsistent (e.g. fewer nodes than regions)."""


class NodeUnknown(EdgeArmError):
    """An operation referenced a node that is not part of the world."""


class TooFewNodes(EdgeArmError):
    """Overlay restructuring was asked for more groups than alive nodes."""


class SegmentMissing(EdgeArmError):
    """A QoS estimate requires a segment measurement that does not exist."""


class Unplaceable(EdgeArmError):
    """No total placement satisfying all requirements exists under the snapshot."""


class BackendFailure(EdgeArmError):
    """The actuation backend rejected an action."""

    def __init__(self, action: str, cause: str):
        super().__init__(f"{action}: {cause}")
        self.action = action
        self.cause = cause


class UnknownApp(EdgeArmError):
    """A command targeted an application that is not managed."""


class MissingDescriptor(EdgeArmError):
    """The application path does not contain a docker-compose.yml."""


class FileUnreadable(EdgeArmError):
    """A watched file could not be read this tick (app is skipped, not crashed)."""


class WatcherAlreadyRunning(EdgeArmError):
    """The watcher daemon is already running."""


class WatcherNotRunning(EdgeArmError):
    """The watcher daemon is not running."""
