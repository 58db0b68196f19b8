"""Global physics parameters for the double-well tunnelling system."""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicsConfig:
    """Constants of the model: hbar, particle mass and the double-well shape.

    The closed-form eigenstates of the Caticha double well are exact
    eigenfunctions of ``-(hbar^2/2m) d^2/dx^2 + V`` only when
    ``hbar**2 / (2*mass) == 1``; the defaults satisfy this.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant.
    mass : float
        Particle mass.
    alpha : float
        Dimensionless asymmetry of the double well (0 gives an even well).
    delta_e : float
        Energy gap between ground and first excited state.
    e0 : float
        Ground-state energy offset.  Enters the potential only additively,
        so it never affects forces or flow; default 0.
    """

    hbar: float = 1.0
    mass: float = 0.5
    alpha: float = 0.5
    delta_e: float = 0.5
    e0: float = 0.0

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.delta_e <= 0:
            raise ValueError(f"delta_e must be positive, got {self.delta_e}")

    @property
    def period(self) -> float:
        """Tunnelling period T = 2*pi*hbar/delta_e of the balanced superposition."""
        import math

        return 2.0 * math.pi * self.hbar / self.delta_e
