"""Plain-text run configuration (INI-style sections of key = value pairs).

Sections::

    [grid]    n, delta_xi
    [time]    t_min, t_max, per_decade        (or: knots = 0, 0.1, ...)
    [solver]  epsilon | epsilon_fraction, tol, max_iter, dealias, quad_order, use_paper_eta
    [data]    kind = zero | random | homogeneous | landau | file, plus kind-specific keys
    [v-data]  second data set for stability runs (same keys as [data]);
              add_to = data makes it a perturbation of [data]
    [force]   kind = zero | dirac | fixed, plus kind-specific keys
    [g]       second force for stability runs (same keys as [force])

``epsilon_fraction`` gives epsilon as a fraction of 1/(4 eta).
"""

import configparser
import hashlib
import os
from dataclasses import dataclass

import numpy as np

from .container import read_field
from .duhamel import BilinearConfig, eta_constant
from .errors import ParameterError
from .fields import homogeneous_field, random_solenoidal
from .grid import FrequencyGrid, SpectralVectorField, check_knots, geometric_knots
from .landau import LandauParams, landau_sample_spectral
from .norms import pm_values
from .solver import ForceSpec, SolverConfig
from .symbols import project


class ConfigError(ParameterError):
    """Missing, unreadable or malformed configuration."""


@dataclass(frozen=True)
class RunConfig:
    grid: FrequencyGrid
    knots: np.ndarray
    solver: SolverConfig
    parser: configparser.ConfigParser
    digest: str
    base_dir: str = "."

    def echo(self):
        return {s: dict(self.parser[s]) for s in self.parser.sections()}

    def has(self, section):
        return self.parser.has_section(section)

    def data(self, section="data", _seen=()) -> SpectralVectorField:
        """Build a data section; ``add_to = <section>`` adds the named section's field."""
        sec = self._section(section, required=True)
        f = build_data(sec, self.grid, self.base_dir)
        base = sec.get("add_to")
        if base:
            if base in _seen or base == section:
                raise ConfigError(f"circular add_to chain at [{section}]")
            f = self.data(base, _seen + (section,)) + f
        return f

    def force(self, section="force") -> ForceSpec:
        return build_force(self._section(section, required=False), self.grid)

    def _section(self, name, required):
        if not self.parser.has_section(name):
            if required:
                raise ConfigError(f"config has no [{name}] section")
            return {}
        return self.parser[name]


def _get(section, key, conv, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing key '{key}'")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except ValueError as err:
        raise ConfigError(f"bad value for '{key}': {raw!r}") from err


def _bool(raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _vector(raw):
    vals = [float(v) for v in raw.replace(",", " ").split()]
    if len(vals) != 3:
        raise ValueError(raw)
    return tuple(vals)


def _floats(raw):
    return [float(v) for v in raw.replace(",", " ").split()]


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err.strerror}") from err
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as err:
        raise ConfigError(f"config file {path} is not UTF-8 text") from err
    return parse_config(text, hashlib.sha256(raw).hexdigest(), os.path.dirname(os.path.abspath(path)))


def parse_config(text, digest=None, base_dir=".") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"malformed config: {err}") from err
    if digest is None:
        digest = hashlib.sha256(text.encode()).hexdigest()
    for name in ("grid", "solver"):
        if not parser.has_section(name):
            raise ConfigError(f"config has no [{name}] section")
    g = parser["grid"]
    grid = FrequencyGrid(_get(g, "n", int), _get(g, "delta_xi", float))

    t = parser["time"] if parser.has_section("time") else {}
    if "knots" in t:
        knots = check_knots(_get(t, "knots", _floats))
    else:
        knots = geometric_knots(_get(t, "t_min", float, 1e-3), _get(t, "t_max", float, 10.0), _get(t, "per_decade", int, 6))

    s = parser["solver"]
    bil = BilinearConfig(dealias=_get(s, "dealias", _bool, True), quad_order=_get(s, "quad_order", int, 2))
    use_paper = _get(s, "use_paper_eta", _bool, False)
    const = eta_constant()
    eta = const.eta_paper if use_paper else const.eta_effective
    if "epsilon" in s:
        epsilon = _get(s, "epsilon", float)
    else:
        epsilon = _get(s, "epsilon_fraction", float, 0.5) / (4 * eta)
    solver = SolverConfig(
        epsilon=epsilon,
        max_iter=_get(s, "max_iter", int, 200),
        tol=_get(s, "tol", float, 1e-10),
        bilinear=bil,
        use_paper_eta=use_paper,
    )
    return RunConfig(grid, knots, solver, parser, digest, base_dir)


def _high_pass(section, grid):
    k_min = _get(section, "min_mode", int, 0)
    return grid.xi_abs >= k_min * grid.delta_xi if k_min > 0 else None


def build_data(section, grid, base_dir=".") -> SpectralVectorField:
    kind = section.get("kind", "zero").strip()
    if kind == "zero":
        return SpectralVectorField.zeros(grid)
    if kind == "random":
        return random_solenoidal(grid, _get(section, "pm2", float), _get(section, "seed", int, 0), _high_pass(section, grid))
    if kind == "homogeneous":
        return homogeneous_field(grid, _get(section, "direction", _vector, (1.0, 0.0, 0.0)), _get(section, "pm2", float))
    if kind == "landau":
        f = landau_sample_spectral(LandauParams(_get(section, "c", float)), grid)
        scale = _get(section, "scale", float, 1.0)
        return SpectralVectorField(grid, scale * project(f.coeffs, grid), approximate=True)
    if kind == "file":
        path = os.path.join(base_dir, _get(section, "path", str))
        try:
            f = read_field(path)
        except OSError as err:
            raise ConfigError(f"cannot read field file {path}: {err.strerror}") from err
        if f.grid != grid:
            raise ConfigError("field file grid does not match [grid]")
        return f
    raise ConfigError(f"unknown data kind {kind!r}")


def build_force(section, grid) -> ForceSpec:
    kind = section.get("kind", "zero").strip() if section else "zero"
    if kind == "zero":
        return ForceSpec.zero()
    if kind == "dirac":
        return ForceSpec.dirac(_get(section, "amplitude", _vector))
    if kind == "fixed":
        f = random_solenoidal(grid, 1.0, _get(section, "seed", int, 0))
        pm0 = float(pm_values(f.coeffs, grid, 0))
        return ForceSpec.fixed(f * (_get(section, "pm0", float) / pm0))
    raise ConfigError(f"unknown force kind {kind!r}")
