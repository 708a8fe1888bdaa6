"""Exception hierarchy shared by every module."""


class PostoneError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class AntisymmetryViolation(PostoneError):
    def __init__(self, p, q):
        super().__init__(f"relation is not antisymmetric: {p} < {q} < {p}")
        self.pair = (p, q)


class SizeLimit(PostoneError):
    pass


class InvalidCongruence(PostoneError):
    pass


class NotAMorphism(PostoneError):
    pass


class NotSurjective(PostoneError):
    pass


class InvalidExtendedPoSystem(PostoneError):
    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


class Infeasible(PostoneError):
    """Raised by refine when the refinement condition fails; ``elements`` names the culprits."""

    def __init__(self, diagnostics, elements=()):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)
        self.elements = tuple(elements)


class IncompatibleAmbient(PostoneError):
    pass


class UndecidedContainment(PostoneError):
    def __init__(self, pair, bound):
        super().__init__(f"containment {pair[0]} ⊆ {pair[1]} undecided at bound {bound}")
        self.pair = pair
        self.bound = bound


class DSLError(PostoneError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class CorpusMismatch(PostoneError):
    def __init__(self, name, diff):
        super().__init__(f"corpus {name!r} mismatch: {diff}")
        self.diff = diff
