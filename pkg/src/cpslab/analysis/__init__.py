from .collisions import collision_indicator_count, mass_transport_audit, track_collisions
from .density import DensityAccumulator, DensityTrace, density_estimate
from .fits import RateFit, fit_power_law
from .matching import running_sums, water_fill_matching
from .survival import cca_survival_criterion

__all__ = [
    "DensityAccumulator", "DensityTrace", "RateFit", "cca_survival_criterion", "collision_indicator_count",
    "density_estimate", "fit_power_law", "mass_transport_audit", "running_sums", "track_collisions",
    "water_fill_matching",
]
