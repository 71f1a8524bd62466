import math

# Silicon-nitride-like ring, quartic dispersion; zero crossings of d_int near mu = +-60
CONF_QUARTIC = {
    "fsr_hz": 1.0e12,
    "finesse": 3000.0,
    "d2_hz": 0.5e9,
    "d4_hz": -1.645e6,
    "kerr_coeff": 1.0,
    "cavity_length_m": 2 * math.pi * 23e-6,
    "pump_mode_index": 63,
    "mode_count": 200,
}

# Same ring with the fourth-order term switched off
CONF_QUADRATIC = dict(CONF_QUARTIC, d4_hz=0.0)

ALL = {
    "quartic": CONF_QUARTIC,
    "quadratic": CONF_QUADRATIC,
}

DEFAULT_CONF = {
    "dt": 1e-3,
    "steady_tol": 1e-10,
    "max_time": 400.0,
    "transient_time": 50.0,
    "blowup_norm": 1e6,
    "noise_amplitude": 1e-6,
    "seed": 0,
    "overcoupling_ratio": 1 / 1.01,
    "omega_min": 0.0,
    "omega_max": 15.0,
    "omega_points": 301,
    "envelope_omega_max": 20.0,
    "envelope_omega_points": 401,
    "theta_points": 512,
    "pump_model": "full",
}

# (delta_eff, nu) points of the reproduced regimes
FIGURE_POINTS = {
    "below_threshold": (0.0, 0.95),
    "stable_soliton": (12.0, 1.05),
    "broad_soliton": (1.2, 1.05),
    "oscillatory_soliton": (12.0, 1.50),
}


def conf_for_name(name: str) -> dict:
    return ALL.get(name, None)
