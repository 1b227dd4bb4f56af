"""Configuration records and the ``key = value unit`` text format.

Everything is stored in SI. Human units only appear when parsing or printing.
"""
import hashlib
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .constants import CONSTANTS
from .errors import ConfigError, ValidationError

CONVENTIONS = ("as-written", "table-matched")

_UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "μm": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6},
    "field": {"T": 1.0, "mT": 1e-3, "uT": 1e-6, "G": 1e-4},
    "gradient": {"T/m": 1.0},
    "frequency": {"uHz": 1e-6, "mHz": 1e-3, "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "angular": {"rad/s": 1.0},
    "mass": {"kg": 1.0, "g": 1e-3},
    "density": {"kg/m3": 1.0, "kg/m^3": 1.0, "g/cm3": 1e3},
    "number_density": {"m^-3": 1.0, "1/m3": 1.0, "/m3": 1.0, "cm^-3": 1e6},
    "angle": {"rad": 1.0, "deg": math.pi / 180},
    "energy": {"J": 1.0, "eV": CONSTANTS.eV, "meV": 1e-3 * CONSTANTS.eV},
    "none": {"": 1.0},
}
_SI_UNIT = {"length": "m", "time": "s", "temperature": "K", "field": "T", "gradient": "T/m",
            "frequency": "Hz", "angular": "rad/s", "mass": "kg", "density": "kg/m3",
            "number_density": "m^-3", "angle": "rad", "energy": "J", "none": ""}

# key -> (dimension, default in SI)
SCHEMA = {
    # microsphere
    "radius": ("length", 3.2e-6),
    "density": ("density", 1.1e3),
    "mass": ("mass", 1.5e-13),
    "susceptibility": ("none", -9.1e-6),
    # spin source
    "L1": ("length", 59.703e-6),
    "L2": ("length", 48.674e-6),
    "R_s1": ("length", 460.00e-6),
    "R_s2": ("length", 440.93e-6),
    "d": ("length", 1.46e-6),
    "rho_e0": ("number_density", 2.3e27),
    "tilt_max": ("angle", 4 * math.pi / 180),
    "apply_tilt": ("bool", False),
    "sigma_L1": ("length", 0.003e-6),
    "sigma_L2": ("length", 0.003e-6),
    "sigma_R_s1": ("length", 0.003e-6),
    "sigma_R_s2": ("length", 0.003e-6),
    "sigma_d": ("length", 0.001e-6),
    "sigma_R": ("length", 0.1e-6),
    # trap
    "B_ext": ("field", 1.85),
    "B_pm": ("field", 0.15),
    "dB0z_dz": ("gradient", 750.0),
    "omega_z": ("angular", 148.9),
    "gamma": ("angular", 2 * math.pi * 1e-6),
    "eta_c": ("none", 0.059),
    "trap_depth": ("energy", 3.4e-23),
    # environment
    "temperature": ("temperature", 20e-3),
    "efficiency": ("none", 1e-3),
    "measurement_time": ("time", 1.0),
    # modulation and analysis
    "T1": ("time", 1.0),
    "B1": ("field", 1e-3),
    "lambda": ("length", 2e-6),
    "convention": ("str", "as-written"),
}
_ALIASES = {"gap": "d", "eta": "efficiency", "R": "radius", "chi_m": "susceptibility"}
SIGMA_KEYS = ("L1", "L2", "R_s1", "R_s2", "d", "R")


@dataclass(frozen=True)
class MicrosphereSpec:
    radius: float
    density: float
    mass: float
    nucleon_density: float
    susceptibility: float = -9.1e-6

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError("radius", "must be positive")
        if not self.density > 0:
            raise ValidationError("density", "must be positive")
        geo = 4 / 3 * math.pi * self.radius**3 * self.density
        if not abs(self.mass / geo - 1) <= 0.01:
            raise ValidationError("mass", f"{self.mass:.4g} kg differs from (4/3)piR^3 rho = {geo:.4g} kg by >1%")
        rho_m = self.density / CONSTANTS.nucleon_mass
        if not abs(self.nucleon_density / rho_m - 1) <= 0.01:
            raise ValidationError("nucleon_density", "inconsistent with density")
        if not self.susceptibility < 0:
            raise ValidationError("susceptibility", "must be negative (diamagnet)")

    @property
    def volume(self):
        return 4 / 3 * math.pi * self.radius**3


def derive_microsphere(R, rho, chi_m=-9.1e-6, mass=None):
    """Build a MicrosphereSpec from radius and density.

    Mass defaults to the geometric value; nucleon density is rho / m_u.
    """
    if not R > 0:
        raise ValidationError("radius", "must be positive")
    if not rho > 0:
        raise ValidationError("density", "must be positive")
    m_geo = 4 / 3 * math.pi * R**3 * rho
    return MicrosphereSpec(R, rho, m_geo if mass is None else mass, rho / CONSTANTS.nucleon_mass, chi_m)


@dataclass(frozen=True)
class SpinSourceGeometry:
    """Large cylinder (R_s1, L1) with a coaxial cylinder (R_s2, L2) removed from its top."""

    L1: float
    L2: float
    R_s1: float
    R_s2: float
    d: float
    rho_e0: float = 2.3e27
    tilt_max: float = 4 * math.pi / 180
    apply_tilt: bool = False
    sigma: dict = field(default_factory=dict)

    def __post_init__(self):
        # L2 = 0 or R_s2 = 0 is allowed: it describes a plain cylinder
        if not (self.R_s1 > self.R_s2 >= 0):
            raise ValidationError("R_s2", "need R_s1 > R_s2 >= 0")
        if not (self.L1 > self.L2 >= 0):
            raise ValidationError("L2", "need L1 > L2 >= 0")
        if not self.d > 0:
            raise ValidationError("d", "must be positive")
        if not self.rho_e0 > 0:
            raise ValidationError("rho_e0", "must be positive")
        if not 0 <= self.tilt_max < math.pi / 2:
            raise ValidationError("tilt_max", "must lie in [0, pi/2)")
        for k, v in self.sigma.items():
            if k not in SIGMA_KEYS:
                raise ValidationError("sigma_" + str(k), "unknown parameter")
            if not v >= 0:
                raise ValidationError("sigma_" + k, "must be >= 0")

    @property
    def effective_rho_e0(self):
        """Spin density, projected by cos(tilt_max) when apply_tilt is set."""
        return self.rho_e0 * (math.cos(self.tilt_max) if self.apply_tilt else 1.0)

    def params(self):
        return {"L1": self.L1, "L2": self.L2, "R_s1": self.R_s1, "R_s2": self.R_s2}

    def with_params(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class TrapConfig:
    B_ext: float = 1.85
    B_pm: float = 0.15
    dB0z_dz: float = 750.0
    omega_z: float = 148.9
    gamma: float = 2 * math.pi * 1e-6
    eta_c: float = 0.059
    depth_target: float = 3.4e-23
    curvature: float | None = None  # d2B0z/dz2, filled in by trap calibration

    def __post_init__(self):
        if not self.omega_z > 0:
            raise ValidationError("omega_z", "must be positive")
        if not self.gamma > 0:
            raise ValidationError("gamma", "must be positive")
        if not 0 < self.eta_c <= 1:
            raise ValidationError("eta_c", "must lie in (0, 1]")
        if not self.dB0z_dz != 0:
            raise ValidationError("dB0z_dz", "must be nonzero")

    @property
    def B0(self):
        return self.B_pm + self.B_ext

    @property
    def field_ratio(self):
        """B0z / (dB0z/dz) at the sphere, m."""
        return self.B0 / self.dB0z_dz


@dataclass(frozen=True)
class EnvironmentConfig:
    temperature: float = 20e-3
    efficiency: float = 1e-3
    measurement_time: float = 1.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValidationError("temperature", "must be positive")
        if not 0 < self.efficiency <= 1:
            raise ValidationError("efficiency", "must lie in (0, 1]")
        if not self.measurement_time > 0:
            raise ValidationError("measurement_time", "must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    sphere: MicrosphereSpec
    source: SpinSourceGeometry
    trap: TrapConfig
    env: EnvironmentConfig
    T1: float = 1.0
    B1: float = 1e-3
    lam: float = 2e-6
    convention: str = "as-written"

    def __post_init__(self):
        if not self.T1 > 0:
            raise ValidationError("T1", "must be positive")
        if not self.B1 > 0:
            raise ValidationError("B1", "must be positive")
        if not self.lam > 0:
            raise ValidationError("lambda", "must be positive")
        if self.convention not in CONVENTIONS:
            raise ValidationError("convention", f"must be one of {CONVENTIONS}")

    # flat view ----------------------------------------------------------
    def as_flat(self):
        s, g, t, e = self.sphere, self.source, self.trap, self.env
        out = {
            "radius": s.radius, "density": s.density, "mass": s.mass, "susceptibility": s.susceptibility,
            "L1": g.L1, "L2": g.L2, "R_s1": g.R_s1, "R_s2": g.R_s2, "d": g.d, "rho_e0": g.rho_e0,
            "tilt_max": g.tilt_max, "apply_tilt": g.apply_tilt,
        }
        for k in SIGMA_KEYS:
            out["sigma_" + k] = g.sigma.get(k, 0.0)
        out.update({
            "B_ext": t.B_ext, "B_pm": t.B_pm, "dB0z_dz": t.dB0z_dz, "omega_z": t.omega_z,
            "gamma": t.gamma, "eta_c": t.eta_c, "trap_depth": t.depth_target,
            "temperature": e.temperature, "efficiency": e.efficiency,
            "measurement_time": e.measurement_time,
            "T1": self.T1, "B1": self.B1, "lambda": self.lam, "convention": self.convention,
        })
        return out

    @classmethod
    def from_flat(cls, values):
        v = {k: d for k, (_, d) in SCHEMA.items()}
        v.update(values)
        rho_m = v["density"] / CONSTANTS.nucleon_mass
        sphere = MicrosphereSpec(v["radius"], v["density"], v["mass"], rho_m, v["susceptibility"])
        source = SpinSourceGeometry(
            v["L1"], v["L2"], v["R_s1"], v["R_s2"], v["d"], v["rho_e0"], v["tilt_max"],
            bool(v["apply_tilt"]), {k: v["sigma_" + k] for k in SIGMA_KEYS})
        trap = TrapConfig(v["B_ext"], v["B_pm"], v["dB0z_dz"], v["omega_z"], v["gamma"],
                          v["eta_c"], v["trap_depth"])
        env = EnvironmentConfig(v["temperature"], v["efficiency"], v["measurement_time"])
        return cls(sphere, source, trap, env, v["T1"], v["B1"], v["lambda"], v["convention"])

    def replace(self, **overrides):
        """Copy with flat-key overrides (SI values)."""
        for k in overrides:
            if k not in SCHEMA:
                raise ConfigError(k, "unknown key")
        flat = self.as_flat()
        flat.update(overrides)
        return _build(flat)

    def to_text(self):
        """Canonical text form; parses back to an identical config."""
        lines = []
        for k, val in self.as_flat().items():
            dim = SCHEMA[k][0]
            if dim == "str":
                lines.append(f"{k} = {val}")
            elif dim == "bool":
                lines.append(f"{k} = {'true' if val else 'false'}")
            else:
                unit = _SI_UNIT[dim]
                lines.append(f"{k} = {float(val)!r} {unit}".rstrip())
        return "\n".join(lines) + "\n"

    @property
    def config_hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _build(flat):
    try:
        return ExperimentConfig.from_flat(flat)
    except ValidationError as exc:
        key = {"nucleon_density": "density"}.get(exc.key, exc.key)
        raise ConfigError(key, str(exc).split(": ", 1)[-1]) from None


def default_config():
    return _build({})


def _parse_value(key, raw, lineno):
    dim = SCHEMA[key][0]
    parts = raw.split(None, 1)
    if not parts:
        raise ConfigError(key, f"line {lineno}: missing value")
    if dim == "str":
        return raw.strip()
    if dim == "bool":
        low = raw.strip().lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(key, f"line {lineno}: expected a boolean, got {raw.strip()!r}")
    try:
        num = float(parts[0])
    except ValueError:
        raise ConfigError(key, f"line {lineno}: not a number: {parts[0]!r}") from None
    unit = parts[1].strip() if len(parts) > 1 else _SI_UNIT[dim]
    table = _UNITS[dim]
    if unit not in table:
        raise ConfigError(key, f"line {lineno}: unknown unit {unit!r} (allowed: {', '.join(u for u in table if u)})")
    return num * table[unit]


def parse_config_text(document):
    """Parse ``key = value unit`` lines into a dict of SI overrides."""
    out = {}
    for lineno, line in enumerate(document.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line.split()[0], f"line {lineno}: expected 'key = value unit'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key == "gamma_over_2pi":
            parts = raw.split(None, 1)
            unit = parts[1].strip() if len(parts) > 1 else "Hz"
            if unit not in _UNITS["frequency"]:
                raise ConfigError(key, f"line {lineno}: unknown unit {unit!r}")
            try:
                out["gamma"] = 2 * math.pi * float(parts[0]) * _UNITS["frequency"][unit]
            except (ValueError, IndexError):
                raise ConfigError(key, f"line {lineno}: not a number") from None
            continue
        key = _ALIASES.get(key, key)
        if key not in SCHEMA:
            raise ConfigError(key, f"line {lineno}: unknown key")
        out[key] = _parse_value(key, raw, lineno)
    return out


def load_config(document=""):
    """Parse config text into an ExperimentConfig.

    Parameters
    ----------
    document : str
        Lines of ``key = value unit``; ``#`` starts a comment. Missing keys
        take the defaults in ``SCHEMA``.

    Raises
    ------
    ConfigError
        For unknown keys or units, unparsable values or invariant violations.
        ``exc.key`` names the offending key.
    """
    return _build(parse_config_text(document))


def load_config_file(path):
    with open(path) as fh:
        return load_config(fh.read())

