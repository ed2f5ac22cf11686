"""Exception hierarchy shared by all modules."""


class GenConnError(ValueError):
    pass


class KindMismatch(GenConnError):
    pass


class NotFinite(GenConnError):
    pass


class InvalidLabel(GenConnError):
    pass


class NotComposable(GenConnError):
    pass


class EndpointMismatch(GenConnError):
    pass


class NotSimple(GenConnError):
    pass


class NotIndependent(GenConnError):
    pass


class NotComparable(GenConnError):
    pass


class PathOutsideSubgroupoid(GenConnError):
    pass


class UnknownAtom(GenConnError):
    pass


class MissingTop(GenConnError):
    pass


class TooLargeForExact(GenConnError):
    pass


class NotClosed(GenConnError):
    pass


class AlphabetMismatch(GenConnError):
    pass


class NotDecomposable(GenConnError):
    pass


class MissingLevel(GenConnError):
    pass
