"""Fault hierarchy shared by every module.

Each fault carries a fixed numeric code so errors crossing the wire are
machine-checkable rather than free text.  The code table:

    400  unparseable request
    401  bad password
    403  forbidden file path
    404  no such service
    405  no such method
    422  bad arguments
    500  service error
"""


class Fault(Exception):
    """Base class for every error that can cross the wire."""

    code = 500

    def __init__(self, message=""):
        super().__init__(message)
        self.message = message


# -- 400: anything the parsers reject -------------------------------------

class Unparseable(Fault):
    code = 400


class MalformedXml(Unparseable):
    pass


class UnknownType(Unparseable):
    pass


class BadLiteral(Unparseable):
    pass


class BadPath(Unparseable):
    pass


class BadArgLiteral(Unparseable):
    def __init__(self, index, message=""):
        super().__init__(message or f"bad argument literal at index {index}")
        self.index = index


class ArgGap(Unparseable):
    pass


# -- authorization / resolution -------------------------------------------

class BadPassword(Fault):
    code = 401


class ForbiddenPath(Fault):
    code = 403


class NoSuchService(Fault):
    code = 404


class NotFound(Fault):
    code = 404


class NoSuchMethod(Fault):
    code = 405


class BadArguments(Fault):
    code = 422


class ServiceError(Fault):
    code = 500


# -- registry / framework errors (surface as 500 unless caught locally) ---

class DuplicateId(ServiceError):
    pass


class DuplicateMethodName(ServiceError):
    pass


class NotAutoService(ServiceError):
    pass


class DuplicateLink(ServiceError):
    pass


class WrongKind(ServiceError):
    pass


class NoSuchContract(ServiceError):
    pass


class AlreadyDecided(ServiceError):
    pass


class BadUrl(ServiceError):
    pass


class DuplicatePeer(ServiceError):
    pass


class PeerUnreachable(ServiceError):
    pass


class BadStage(ServiceError):
    pass


class FetchFailed(ServiceError):
    pass


class MalformedContent(ServiceError):
    pass


class NoSuchId(ServiceError):
    pass


class EmptyContainer(ServiceError):
    pass


class SyntaxError_(Unparseable):
    """Query language syntax error; position attached."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at {position})")
        self.position = position


class TypeMismatch(ServiceError):
    pass


class LengthMismatch(ServiceError):
    pass


class EmptyDataset(ServiceError):
    pass


class BadConfig(ServiceError):
    pass


class ScriptError(ServiceError):
    pass


class SchemaError(ServiceError):
    pass


class IoError(ServiceError):
    pass


class BadManifest(ServiceError):
    pass


class DuplicateKind(ServiceError):
    pass


class UnknownKind(ServiceError):
    pass
