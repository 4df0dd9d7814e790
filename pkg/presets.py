"""
parameter sets behind the three published figure data sets; every run is a config overlay
plus a sweep, evaluated by sweeps.run_sweep
"""

# outage vs number of users, and outage vs eavesdropper antennas
OUTAGE_CHANNEL = {
    "power_ratio": 2.0,
    "beta_m": 2.0,
    "lambda_m": 0.5,
    "beta_e": 5.0,
    "lambda_e": 4.0,
}

# ergodic secrecy capacity vs number of users
ESC_CHANNEL = {
    "power_ratio": 4.0,
    "beta_m": 2.0,
    "lambda_m": 4.0,
    "beta_e": 3.0,
    "lambda_e": 3.0,
}

USERS_RANGE = list(range(2, 101))
ANTENNAS_RANGE = list(range(2, 65))
FIXED_USERS = 20


def _figure_2() -> [dict]:
    runs = []
    for k in [1, 2]:
        for rs in [1.0, 4.0]:
            runs.append(
                {
                    "name": f"sop_vs_n_k{k}_rs{rs:g}",
                    "config": {**OUTAGE_CHANNEL, "metric": "sop", "rank": k, "eve_antennas": 2, "rate": rs},
                    "sweep": {
                        "variable": "n_users",
                        "values": [n for n in USERS_RANGE if n >= k],
                        "lockstep": False,
                        "methods": ["exact", "asymptotic_n", "monte_carlo"],
                    },
                }
            )
    return runs


def _figure_3() -> [dict]:
    runs = []
    for k in [1, 2]:
        runs.append(
            {
                "name": f"sop_vs_l_n{FIXED_USERS}_k{k}",
                "config": {**OUTAGE_CHANNEL, "metric": "sop", "rank": k, "n_users": FIXED_USERS, "rate": 0.5},
                "sweep": {
                    "variable": "eve_antennas",
                    "values": ANTENNAS_RANGE,
                    "lockstep": False,
                    "methods": ["exact", "asymptotic_n", "asymptotic_nl", "monte_carlo"],
                },
            }
        )
        runs.append(
            {
                "name": f"sop_vs_l_lockstep_k{k}",
                "config": {**OUTAGE_CHANNEL, "metric": "sop", "rank": k, "rate": 0.5},
                "sweep": {
                    "variable": "eve_antennas",
                    "values": ANTENNAS_RANGE,
                    "lockstep": True,
                    "methods": ["exact", "asymptotic_n", "asymptotic_nl", "limit", "monte_carlo"],
                },
            }
        )
    return runs


def _figure_4() -> [dict]:
    return [
        {
            "name": f"esc_vs_n_k{k}",
            "config": {**ESC_CHANNEL, "metric": "esc", "rank": k, "eve_antennas": 1, "rate": 0.0},
            "sweep": {
                "variable": "n_users",
                "values": [n for n in USERS_RANGE if n >= k],
                "lockstep": False,
                "methods": ["asymptotic_n", "quadrature", "monte_carlo"],
            },
        }
        for k in [1, 2, 3]
    ]


FIGURES = {"2": _figure_2, "3": _figure_3, "4": _figure_4}


def figure_runs(figure: str) -> [dict]:
    if figure not in FIGURES:
        raise KeyError(f"unknown figure {figure}, expected one of {', '.join(FIGURES)}")
    return FIGURES[figure]()


def run_config(base: dict, run: dict) -> dict:
    config = {**base, **run["config"]}
    config["sweep"] = {**base.get("sweep", {}), **run["sweep"]}
    return config
