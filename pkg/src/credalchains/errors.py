"""Exception hierarchy shared across the package."""


class StructuralError(ValueError):
    """Malformed inputs: wrong lengths, bad indices, incompatible frames."""


class DomainError(ValueError):
    """Inputs that are well-formed but violate a mathematical precondition."""


class InfeasibleError(DomainError):
    """A constraint system that admits no solution."""


class TotalConflictError(DomainError):
    """Dempster combination of two mass functions with conflict k = 1."""


class ModelFormatError(ValueError):
    """Unparseable or structurally invalid model/mass file."""
