"""Extractor error types. Validation problems exit 1, runtime failures 2."""


class ExtractorError(Exception):
    pass


class ValidationError(ExtractorError):
    pass


class UndecodableImage(ExtractorError):
    """A file that PIL cannot decode; callers skip it with a log line."""

    def __init__(self, path, cause):
        self.path = str(path)
        super().__init__(f"cannot decode image {path}: {cause}")


class MissingWeights(ExtractorError):
    """Pretrained weights unavailable; extraction aborts."""

    def __init__(self, architecture, cause):
        super().__init__(
            f"pretrained weights for {architecture} unavailable ({cause}); "
            "pass --weights PATH to use a local weights file or "
            "--weights random for an untrained smoke run")
