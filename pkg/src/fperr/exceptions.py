"""Exception types raised across the toolkit."""


class FPErrError(Exception):
    pass


class DomainError(FPErrError, ValueError):
    """An atomic operation received a finite argument outside its real domain.

    ``partial_trace`` holds the records executed before the failing op
    (empty when tracing was not requested).
    """

    def __init__(self, message, site=None, op=None, operands=(), partial_trace=()):
        super().__init__(message)
        self.site = site
        self.op = op
        self.operands = tuple(operands)
        self.partial_trace = tuple(partial_trace)


class OracleDomainError(FPErrError, ValueError):
    pass


class InvalidRecord(FPErrError, ValueError):
    pass


class SiteNotExecuted(FPErrError, LookupError):
    pass


class UnknownFunction(FPErrError, KeyError):
    pass
