# Exception hierarchy shared by every evsense layer
from typing import Iterable, Optional


class EvsenseError(Exception):
    """Base class for all evsense errors"""


class InvalidParameterError(EvsenseError, ValueError):
    """A parameter lies outside its valid domain"""


class InsufficientInputError(EvsenseError, ValueError):
    """Not enough input to run the operation (e.g. fewer than two frames)"""


class RejectedInputError(EvsenseError, ValueError):
    """Input values the operation cannot accept (non-finite, out of bounds)"""


class UnknownConfigError(EvsenseError, KeyError):
    """Configuration id not present in the registry"""

    def __init__(self, config_id: str, valid_ids: Iterable[str]):
        self.config_id = config_id
        self.valid_ids = list(valid_ids)
        super().__init__(f"Unknown sensor configuration '{config_id}'. Valid ids: {', '.join(self.valid_ids)}")

    def __str__(self) -> str:
        return self.args[0]


class UnknownPartitionError(EvsenseError, KeyError):
    """Partition name not one of train/test1..test4"""

    def __init__(self, name: str, valid_names: Iterable[str]):
        self.name = name
        self.valid_names = list(valid_names)
        super().__init__(f"Unknown partition '{name}'. Valid partitions: {', '.join(self.valid_names)}")

    def __str__(self) -> str:
        return self.args[0]


class IncompleteInputError(EvsenseError, ValueError):
    """Aggregation input misses entries the partition requires"""

    def __init__(self, missing: Iterable[str]):
        self.missing = sorted(missing)
        super().__init__(f"Missing metrics for configurations: {', '.join(self.missing)}")


# --- binary containers ---

class EventIOError(EvsenseError):
    """Base class for container read/write failures"""


class BadMagicError(EventIOError):
    pass


class UnsupportedVersionError(EventIOError):
    pass


class TruncatedError(EventIOError):
    """Input ended before the declared payload was complete"""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class OrderError(EventIOError):
    """Records violate the canonical ordering"""


class BoundsError(EventIOError):
    """Record coordinates fall outside the declared geometry"""


class SerializationError(EventIOError):
    """Data cannot be written in the requested container"""


# --- manifest / documents ---

class ManifestError(EvsenseError):
    pass


class MalformedManifestError(ManifestError, ValueError):
    pass


class DuplicateSequenceError(ManifestError):
    def __init__(self, sequence_id: str):
        self.sequence_id = sequence_id
        super().__init__(f"Duplicate sequence id '{sequence_id}' in manifest")


class MissingPathError(ManifestError):
    def __init__(self, sequence_id: str, path: str, role: Optional[str] = None):
        self.sequence_id = sequence_id
        self.path = path
        label = f"{role} path" if role else "path"
        super().__init__(f"Sequence '{sequence_id}': {label} '{path}' does not exist")


class MalformedDocumentError(EvsenseError, ValueError):
    """A labels, predictions or config document cannot be parsed"""


class InvalidHeaderError(EventIOError):
    """Header fields describe a geometry or window no container can hold"""
