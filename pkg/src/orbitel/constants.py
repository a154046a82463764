"""Physical constants shared across the simulator (km, s, K units)."""

EARTH_RADIUS_KM = 6371.0
EARTH_MU_KM3_S2 = 398600.4418
EARTH_ROTATION_RAD_S = 7.2921159e-5
SPEED_OF_LIGHT_KM_S = 299792.458
# Rounded value used throughout the link-budget chain.
BOLTZMANN_J_K = 1.38e-23

DEFAULT_ELEVATION_MASK_DEG = 25.0
