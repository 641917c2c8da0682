"""Numerical tolerances shared by every module."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    tau_null: float = 1e-9      # causal-character cutoff, relative to |v|^2
    tau_det: float = 1e-12      # singular-matrix cutoff, relative to ||M||^3
    tau_disc: float = 1e-10     # complex-pair cutoff for the cubic discriminant (relative)
    tau_dist: float = 1e-6      # relative gap below which principal curvatures coincide
    tau_grad: float = 1e-8      # |grad H| below this counts as constant mean curvature
    tau_bic: float = 1e-6       # biconservative residual acceptance (scaled per point)
    delta_guard: float = 1e-4   # margin kept away from singular profile loci

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value!r}")

    def updated(self, **kw) -> "Tolerances":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULT = Tolerances()
