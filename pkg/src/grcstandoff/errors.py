"""Exception hierarchy shared by the pipeline stages."""


class StandoffError(Exception):
    """Base class for every error raised by this package."""


class MissingBody(StandoffError):
    pass


class OutOfRange(StandoffError):
    pass


class NoCtsDeclaration(StandoffError):
    pass


class UnsupportedTemplate(StandoffError):
    """The CTS replacement pattern uses XPath we cannot walk structurally."""


class DanglingReference(StandoffError):
    pass


class DuplicateLayerName(StandoffError):
    pass


class CycleIntroduced(StandoffError):
    pass


class MalformedRow(StandoffError):
    pass


class BadMorphTag(StandoffError):
    pass


class BadHead(StandoffError):
    pass


class SentenceCountMismatch(StandoffError):
    pass


class TokenCountMismatch(StandoffError):
    def __init__(self, sentence, expected, found):
        super().__init__(
            f"sentence {sentence}: graph has {expected} tokens, external file has {found}"
        )
        self.sentence = sentence


class FormMismatch(StandoffError):
    def __init__(self, token_id, ours, theirs):
        super().__init__(f"{token_id}: token form {ours!r} != external form {theirs!r}")
        self.token_id = token_id


class InvalidGraph(StandoffError):
    """Raised when an operation needs a graph that passes validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        more = len(self.violations) - 3
        super().__init__(head + (f" (+{more} more)" if more > 0 else ""))


class UnvalidatedGraph(InvalidGraph):
    pass


class IoFailure(StandoffError):
    pass


class SourceMapMissing(StandoffError):
    pass


class MissingFile(StandoffError):
    pass


class MalformedPointer(StandoffError):
    pass


class ConfigError(StandoffError):
    pass
