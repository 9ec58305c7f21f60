"""Exception types shared across the package."""


class S2BodyError(Exception):
    """Base class for all library errors."""


class NotAntiSymmetric(S2BodyError):
    """Matrix handed to vee() is not anti-symmetric within tolerance."""


class NotSymmetric(S2BodyError):
    """Matrix handed to the eigensolver is not symmetric within tolerance."""


class ModulusOutOfRange(S2BodyError):
    """Elliptic modulus k^2 outside the supported range."""


class SingularPair(S2BodyError):
    """Two bodies are close enough (or antipodal enough) that the potential
    diverges. Carries the offending pair indices."""

    def __init__(self, i, j, message=None):
        self.i = i
        self.j = j
        super().__init__(message or f"singular pair ({i}, {j})")


class ZeroInertiaAxis(S2BodyError):
    """Euler flow requested but one principal moment is zero."""


class NotAsymmetric(S2BodyError):
    """Operation requires strictly ordered distinct principal moments."""


class BoundaryCase(S2BodyError):
    """|C|^2 sits on a boundary of the admissible band (2K*I_x or 2K*I_z)."""


class DegenerateInertia(S2BodyError):
    """Coefficient vectors need I_x != I_z (and strict asymmetric ordering)."""


class DegenerateFit(S2BodyError):
    """Rotation fit is underdetermined (single body on the rotation axis)."""


class NoRootInRange(S2BodyError):
    """Equilibrium search found no sign change in the given omega interval."""


class ConfigInvalid(S2BodyError):
    """Run configuration failed validation."""
