"""Synthetic commute mode-choice scenario.

Deterministic utilities come from a multinomial logit with travel-time
interactions.  The default coefficients are the published estimates for a
French metropolitan area; covariates, distances, speeds and the non-car
emission factors are synthetic, so generated populations only resemble the
real one in shape.

Utilities are expressed in money by multiplying the logit scale by ``mu``.
The social indicator is the round-trip CO2 saved (kg) relative to the
individual's realized default mode.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import InvalidConfigError
from .io import load_instance, save_instance
from .model import Alternative, Individual, Instance, strip_pareto_dominated
from .stochastic import StochasticInstance

__all__ = [
    "ModeSpec", "ScenarioConfig", "TravelTimeInteractions", "config_from_dict", "config_to_dict",
    "default_modes", "generate", "load_config", "load_instance", "modal_shares", "save_instance",
]

OCCUPATIONS = ("employee", "farmer", "artisan", "executive", "intermediate", "blue_collar")


@dataclass
class ModeSpec:
    name: str
    co2_per_km: float
    speed_kmh: float
    access_time_h: float = 0.0
    constant: float = 0.0
    age: float = 0.0
    woman: float = 0.0
    car_per_indiv: float = 0.0
    has_car: float = 0.0
    occupation: dict[str, float] = field(default_factory=dict)
    travel_time: float = 0.0


@dataclass
class TravelTimeInteractions:
    age: float = -0.0026
    woman: float = -0.1134
    occupation: dict[str, float] = field(default_factory=lambda: {
        "farmer": 1.1027, "artisan": -0.0763, "executive": -0.3671,
        "intermediate": -0.1986, "blue_collar": 0.2623,
    })


def default_modes() -> list[ModeSpec]:
    return [
        ModeSpec("car", 0.193, 30.0, 0.05, car_per_indiv=1.2138, has_car=1.5604,
                 travel_time=-1.6281),
        ModeSpec("public_transit", 0.05, 18.0, 0.2, 2.7709, -0.0150, 0.5349,
                 occupation={"farmer": -3.9054, "artisan": -1.7023, "executive": 0.1522,
                             "intermediate": -0.2283, "blue_collar": -0.7579},
                 travel_time=-1.1746),
        ModeSpec("walking", 0.0, 4.5, 0.0, 2.8659, -0.0026, 0.4361,
                 occupation={"farmer": -1.0434, "artisan": -1.2153, "executive": 0.2031,
                             "intermediate": -0.1447, "blue_collar": -0.9691},
                 travel_time=-2.1032),
        ModeSpec("cycling", 0.0, 14.0, 0.0, 1.1340, -0.0139, -0.3882,
                 occupation={"farmer": -2.3653, "artisan": -0.7848, "executive": 1.1710,
                             "intermediate": 0.4259, "blue_collar": -0.4808},
                 travel_time=-2.8474),
        ModeSpec("motorcycle", 0.165, 32.0, 0.05, -0.7284, -0.0019, -1.6909,
                 occupation={"farmer": -0.8798, "artisan": -0.2261, "executive": 0.2986,
                             "intermediate": -0.0060, "blue_collar": -0.0259},
                 travel_time=-3.2075),
    ]


@dataclass
class ScenarioConfig:
    n_individuals: int = 10_000
    modes: list[ModeSpec] = field(default_factory=default_modes)
    interactions: TravelTimeInteractions = field(default_factory=TravelTimeInteractions)
    woman_share: float = 0.4933
    occupation_shares: dict[str, float] = field(default_factory=lambda: {
        "employee": 0.2493, "farmer": 0.0030, "artisan": 0.0547,
        "executive": 0.2312, "intermediate": 0.2462, "blue_collar": 0.2156,
    })
    cars_per_worker: dict[str, float] = field(default_factory=lambda: {
        "0": 0.16, "0.5": 0.16, "1": 0.60, "2": 0.08,
    })
    age_mean: float = 40.0
    age_sd: float = 11.0
    age_range: tuple[float, float] = (18.0, 67.0)
    distance_median_km: float = 6.0
    distance_sigma: float = 0.9
    mu: float = 4.88
    transit_availability_rate: float = 0.8913
    transit_mode: str = "public_transit"
    seed: int = 0

    def validate(self) -> None:
        if not isinstance(self.n_individuals, int) or self.n_individuals < 0:
            raise InvalidConfigError("n_individuals must be a non-negative integer")
        if not self.modes:
            raise InvalidConfigError("at least one mode is required")
        names = [m.name for m in self.modes]
        if len(set(names)) != len(names):
            raise InvalidConfigError(f"duplicate mode names in {names}")
        for m in self.modes:
            if not m.co2_per_km >= 0:
                raise InvalidConfigError(f"mode {m.name}: co2_per_km must be >= 0")
            if not m.speed_kmh > 0:
                raise InvalidConfigError(f"mode {m.name}: speed_kmh must be > 0")
            if not m.access_time_h >= 0:
                raise InvalidConfigError(f"mode {m.name}: access_time_h must be >= 0")
            unknown = set(m.occupation) - set(OCCUPATIONS)
            if unknown:
                raise InvalidConfigError(f"mode {m.name}: unknown occupations {sorted(unknown)}")
        if not self.mu > 0:
            raise InvalidConfigError("mu must be positive")
        if not 0.0 <= self.woman_share <= 1.0:
            raise InvalidConfigError("woman_share must lie in [0, 1]")
        if not 0.0 <= self.transit_availability_rate <= 1.0:
            raise InvalidConfigError("transit_availability_rate must lie in [0, 1]")
        for name, shares in (("occupation_shares", self.occupation_shares),
                             ("cars_per_worker", self.cars_per_worker)):
            vals = list(shares.values())
            if not vals or any(not v >= 0 for v in vals) or abs(sum(vals) - 1.0) > 1e-6:
                raise InvalidConfigError(f"{name} must be non-negative and sum to 1")
        unknown = set(self.occupation_shares) - set(OCCUPATIONS)
        if unknown:
            raise InvalidConfigError(f"unknown occupations {sorted(unknown)}")
        try:
            [float(k) for k in self.cars_per_worker]
        except ValueError:
            raise InvalidConfigError("cars_per_worker keys must be numbers") from None
        lo, hi = self.age_range
        if not lo <= hi or not self.age_sd >= 0:
            raise InvalidConfigError("bad age distribution")
        if not self.distance_median_km > 0 or not self.distance_sigma >= 0:
            raise InvalidConfigError("bad distance distribution")


def config_to_dict(config: ScenarioConfig) -> dict:
    d = asdict(config)
    d["age_range"] = list(config.age_range)
    return d


def config_from_dict(data) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise InvalidConfigError("config must be a JSON object")
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(data) - known
    if unknown:
        raise InvalidConfigError(f"unknown config keys {sorted(unknown)}")
    kwargs = dict(data)
    try:
        if "modes" in kwargs:
            kwargs["modes"] = [ModeSpec(**m) for m in kwargs["modes"]]
        if "interactions" in kwargs:
            kwargs["interactions"] = TravelTimeInteractions(**kwargs["interactions"])
        if "age_range" in kwargs:
            kwargs["age_range"] = tuple(kwargs["age_range"])
        config = ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise InvalidConfigError(str(exc)) from None
    config.validate()
    return config


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(data)


def _draw_covariates(config: ScenarioConfig, rng: np.random.Generator, n: int):
    occ_names = list(config.occupation_shares)
    occ = rng.choice(len(occ_names), size=n, p=np.array(list(config.occupation_shares.values())))
    woman = rng.random(n) < config.woman_share
    lo, hi = config.age_range
    age = np.clip(rng.normal(config.age_mean, config.age_sd, n), lo, hi)
    car_levels = np.array([float(k) for k in config.cars_per_worker])
    cars = car_levels[rng.choice(len(car_levels), size=n,
                                 p=np.array(list(config.cars_per_worker.values())))]
    dist = config.distance_median_km * np.exp(config.distance_sigma * rng.standard_normal(n))
    transit_ok = rng.random(n) < config.transit_availability_rate
    return occ_names, occ, woman, age, cars, dist, transit_ok


def deterministic_utilities(config: ScenarioConfig, occ_names, occ, woman, age, cars, dist):
    """Logit utilities (in logit units) for every individual and mode, shape (n, m)."""
    inter = config.interactions
    occ_tt = np.array([inter.occupation.get(o, 0.0) for o in occ_names])[occ]
    tt_shift = inter.age * age + inter.woman * woman + occ_tt
    cols = []
    for m in config.modes:
        tt = 2.0 * (dist / m.speed_kmh + m.access_time_h)
        occ_c = np.array([m.occupation.get(o, 0.0) for o in occ_names])[occ]
        v = (m.constant + m.age * age + m.woman * woman + occ_c
             + m.car_per_indiv * cars + m.has_car * (cars > 0)
             + (m.travel_time + tt_shift) * tt)
        cols.append(v)
    return np.column_stack(cols) if cols else np.zeros((len(dist), 0))


def generate(config: ScenarioConfig) -> tuple[Instance, StochasticInstance]:
    """Draw a population and return the perfect- and imperfect-information instances.

    The perfect-information instance carries realized utilities ``mu * (v + eps)``
    with Pareto-dominated alternatives removed.  The stochastic one carries
    ``mu * v`` on the full choice sets plus the hidden Gumbel terms (scale ``mu``).
    Alternative ids are mode positions in ``config.modes``.
    """
    config.validate()
    n = config.n_individuals
    rng = np.random.default_rng(config.seed)
    occ_names, occ, woman, age, cars, dist, transit_ok = _draw_covariates(config, rng, n)
    v = config.mu * deterministic_utilities(config, occ_names, occ, woman, age, cars, dist)
    eps = rng.gumbel(0.0, config.mu, size=v.shape)

    m = len(config.modes)
    available = np.ones((n, m), dtype=bool)
    names = [md.name for md in config.modes]
    if config.transit_mode in names:
        available[:, names.index(config.transit_mode)] = transit_ok

    u = np.where(available, v + eps, -np.inf)
    co2 = 2.0 * dist[:, None] * np.array([md.co2_per_km for md in config.modes])[None, :]
    # default: max utility, then lower CO2, then lowest id
    tied = u == u.max(axis=1, keepdims=True)
    default = np.argmin(np.where(tied, co2, np.inf), axis=1)
    social = co2[np.arange(n), default][:, None] - co2

    u_l, v_l, s_l, e_l, av_l = u.tolist(), v.tolist(), social.tolist(), eps.tolist(), available.tolist()
    perfect, planner, latent = [], [], {}
    for i in range(n):
        alts_u, alts_v, draws = [], [], []
        for j in range(m):
            if av_l[i][j]:
                alts_u.append(Alternative(j, u_l[i][j], s_l[i][j]))
                alts_v.append(Alternative(j, v_l[i][j], s_l[i][j]))
                draws.append(e_l[i][j])
        perfect.append(strip_pareto_dominated(Individual(i, tuple(alts_u))))
        planner.append(Individual(i, tuple(alts_v)))
        latent[i] = tuple(draws)
    units = {"money_unit": "EUR", "welfare_unit": "kgCO2"}
    return (Instance(tuple(perfect), **units),
            StochasticInstance(Instance(tuple(planner), **units), config.mu, latent))


def modal_shares(instance: Instance, config: ScenarioConfig) -> dict[str, float]:
    """Share of individuals whose default is each mode."""
    from .model import default_alternative

    counts = [0] * len(config.modes)
    for ind in instance.individuals:
        counts[default_alternative(ind)] += 1
    total = max(len(instance.individuals), 1)
    return {md.name: c / total for md, c in zip(config.modes, counts)}

