# Copyright (c) 2026 The schrodinger-tbc authors.
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom
# the Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies
# or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE
# AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE
import configparser
import logging
import os
from collections import OrderedDict, namedtuple

from schrodinger_tbc.errors import ConfigurationError, OutputError
from schrodinger_tbc.mesh import build_grid
from schrodinger_tbc.physics import (PacketParams, PhysicsParams, PoschlTeller, RectangularBarrier, ZeroPotential,
                                     check_asymptotic_columns, mesh_potential, reference_profile)
from schrodinger_tbc.stepper import GEOMETRIES
from schrodinger_tbc.utils import parse_int_list, parse_number

logger = logging.getLogger(__name__)

PRESET_DIR = os.path.join(os.path.dirname(os.path.realpath(__file__)), "presets")
PRESETS = OrderedDict((
    ("example-a", "example_a.ini"),
    ("example-b", "example_b.ini"),
    ("example-a-desk", "study_example_a_desk.ini"),
    ("example-b-desk", "study_example_b_desk.ini"),
    ("example-a-x", "study_example_a_x.ini"),
    ("example-a-y", "study_example_a_y.ini"),
    ("example-a-t", "study_example_a_t.ini"),
    ("example-b-x", "study_example_b_x.ini"),
    ("example-b-y", "study_example_b_y.ini"),
    ("example-b-t", "study_example_b_t.ini"),
))
NORMS = ("interior", "boundary")

RunConfig = namedtuple("RunConfig", ("grid", "physics", "packet", "potential", "reference", "lipschitz",
                                     "holder_exponent", "geometry", "snapshots", "output", "threads", "transform",
                                     "norm", "debug", "potential_tolerance", "residual_tolerance"))
StudyConfig = namedtuple("StudyConfig", ("base", "directions", "levels", "reference", "cache"))


def _to_bool(text):
    value = text.strip().lower()
    if value in ("1", "yes", "true", "on"):
        return True
    if value in ("0", "no", "false", "off"):
        return False
    raise ValueError("not a boolean: {!r}".format(text))


def _to_int(text):
    return int(text.strip())


def _to_str(text):
    return text.strip()


REQUIRED = object()

GRID_KEYS = OrderedDict((("X", (parse_number, REQUIRED)), ("Y", (parse_number, REQUIRED)),
                         ("T", (parse_number, REQUIRED)), ("J", (_to_int, REQUIRED)), ("K", (_to_int, REQUIRED)),
                         ("M", (_to_int, REQUIRED))))
PHYSICS_KEYS = OrderedDict((("hbar", (parse_number, 1.0)), ("c_hbar", (parse_number, 1.0)),
                            ("v_inf", (parse_number, 0.0))))
PACKET_KEYS = OrderedDict((("k", (parse_number, REQUIRED)), ("alpha", (parse_number, REQUIRED)),
                           ("x0", (parse_number, REQUIRED)), ("y0", (parse_number, REQUIRED))))
POTENTIAL_KEYS = {
    "zero": OrderedDict(),
    "poschl-teller": OrderedDict((("alpha0", (parse_number, REQUIRED)), ("c1", (parse_number, REQUIRED)),
                                  ("x_star", (parse_number, REQUIRED)))),
    "rectangular": OrderedDict((("a", (parse_number, REQUIRED)), ("b", (parse_number, REQUIRED)),
                                ("c", (parse_number, REQUIRED)), ("d", (parse_number, REQUIRED)),
                                ("Q", (parse_number, REQUIRED)), ("averaged", (_to_bool, False)))),
}
POTENTIAL_CLASSES = {"poschl-teller": PoschlTeller, "rectangular": RectangularBarrier}
REFERENCE_KINDS = ("constant", "zero", "poschl-teller")
UNIQUENESS_KEYS = OrderedDict((("lipschitz", (parse_number, None)), ("holder_exponent", (parse_number, None))))
RUN_KEYS = OrderedDict((("geometry", (_to_str, "semi-infinite")), ("snapshots", (parse_int_list, ())),
                        ("output", (_to_str, None)), ("threads", (_to_int, None)), ("transform", (_to_str, "fft")),
                        ("norm", (_to_str, "interior")), ("debug", (_to_bool, False)),
                        ("potential_tolerance", (parse_number, 1e-6)),
                        ("residual_tolerance", (parse_number, 1e-12))))
STUDY_KEYS = OrderedDict((("base", (_to_str, REQUIRED)), ("directions", (_to_str, REQUIRED)),
                          ("levels", (_to_int, REQUIRED)), ("cache", (_to_str, None))))
REFERENCE_GRID_KEYS = OrderedDict((("J", (_to_int, REQUIRED)), ("K", (_to_int, REQUIRED)),
                                   ("M", (_to_int, REQUIRED))))


def _parser(text):
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       interpolation=None, empty_lines_in_values=False)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigurationError("Malformed configuration: {}".format(e))
    return parser


def _read_section(parser, section, schema, missing, allowed_extra=()):
    values = OrderedDict()
    items = parser[section] if parser.has_section(section) else {}
    for key in items:
        if key not in schema and key not in allowed_extra:
            raise ConfigurationError("Unknown key '{}' in section [{}]".format(key, section), key=key)
    for key, (convert, default) in schema.items():
        if key in items:
            try:
                values[key] = convert(items[key])
            except (ValueError, ZeroDivisionError) as e:
                raise ConfigurationError("Key '{}' in [{}] has an invalid value {!r}: {}".format(
                    key, section, items[key], e), key=key)
        elif default is REQUIRED:
            missing.append("{}.{}".format(section, key))
        else:
            values[key] = default
    return values


def _potential(parser, section, missing, kinds):
    if not parser.has_section(section):
        return None, {}
    kind = parser[section].get("kind", "").strip()
    if kind not in kinds:
        raise ConfigurationError("Key 'kind' in [{}] must be one of {}, got {!r}".format(
            section, ", ".join(kinds), kind), key="kind")
    schema = POTENTIAL_KEYS.get(kind, OrderedDict())
    uniqueness = {}
    if section == "reference-potential":
        uniqueness = _read_section(parser, section, UNIQUENESS_KEYS, missing, ("kind",) + tuple(schema))
    known = len(missing)
    values = _read_section(parser, section, schema, missing, ("kind",) + tuple(uniqueness))
    if len(missing) > known or kind == "constant":
        return None, uniqueness
    if kind == "zero":
        return ZeroPotential(), uniqueness
    return POTENTIAL_CLASSES[kind](**values), uniqueness


def parse_config(text):
    """Parse and validate a run configuration.

    :param str text: INI text with [grid], [physics], [packet], [potential], [reference-potential], [run]
    :return RunConfig:
    :raises ConfigurationError: naming the offending key
    """
    parser = _parser(text)
    known = ("grid", "physics", "packet", "potential", "reference-potential", "run")
    for section in parser.sections():
        if section not in known:
            raise ConfigurationError("Unknown section [{}]".format(section), key=section)

    missing = []
    grid = _read_section(parser, "grid", GRID_KEYS, missing)
    physics = _read_section(parser, "physics", PHYSICS_KEYS, missing)
    packet = _read_section(parser, "packet", PACKET_KEYS, missing)
    potential, _ = _potential(parser, "potential", missing, tuple(POTENTIAL_KEYS))
    reference, uniqueness = _potential(parser, "reference-potential", missing, REFERENCE_KINDS)
    run = _read_section(parser, "run", RUN_KEYS, missing)
    if missing:
        raise ConfigurationError("Missing required keys: {}".format(", ".join(missing)),
                                 key=missing[0].split(".", 1)[1])

    config = RunConfig(
        grid=build_grid(transform=run["transform"], **grid),
        physics=PhysicsParams(**physics),
        packet=PacketParams(**packet),
        potential=potential if potential is not None else ZeroPotential(),
        reference=reference,
        lipschitz=uniqueness.get("lipschitz"),
        holder_exponent=uniqueness.get("holder_exponent"),
        geometry=run["geometry"],
        snapshots=tuple(run["snapshots"]),
        output=run["output"],
        threads=run["threads"],
        transform=run["transform"],
        norm=run["norm"],
        debug=run["debug"],
        potential_tolerance=run["potential_tolerance"],
        residual_tolerance=run["residual_tolerance"],
    )
    validate_config(config)
    return config


def validate_config(config):
    """Cross-key invariants of a run configuration.

    :raises ConfigurationError
    """
    grid = config.grid
    if config.geometry not in GEOMETRIES:
        raise ConfigurationError("Unknown geometry '{}', expected one of {}".format(
            config.geometry, ", ".join(GEOMETRIES)), key="geometry")
    if config.norm not in NORMS:
        raise ConfigurationError("Unknown norm '{}', expected one of {}".format(config.norm, ", ".join(NORMS)),
                                 key="norm")
    for level in config.snapshots:
        if not 0 <= level <= grid.M:
            raise ConfigurationError("Snapshot level {} outside 0..{}".format(level, grid.M), key="snapshots")
    if config.threads is not None and config.threads < 1:
        raise ConfigurationError("threads must be positive, got {}".format(config.threads), key="threads")
    if not (0 <= config.packet.x0 <= grid.X and 0 <= config.packet.y0 <= grid.Y):
        raise ConfigurationError("Packet centre lies outside the domain", key="x0")
    config.potential.validate(grid)

    columns = []
    if config.geometry != "closed-box":
        columns += [grid.J - 1, grid.J]
    if config.geometry == "infinite-strip":
        columns += [0, 1]
    if columns:
        values = mesh_potential(config.potential, grid)
        check_asymptotic_columns(values, grid, config.physics.v_inf, columns, config.potential_tolerance)
        profile = reference_profile(config.reference, grid, config.physics)
        check_asymptotic_columns(profile, grid, config.physics.v_inf, columns, config.potential_tolerance, "V~")
    return config


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _potential_lines(section, spec, extra=()):
    lines = ["[{}]".format(section)]
    if spec is None:
        lines.append("kind = constant")
    else:
        lines.append("kind = {}".format(spec.kind))
        lines += ["{} = {}".format(key, _format(value)) for key, value in zip(spec._fields, spec)]
    lines += ["{} = {}".format(key, _format(value)) for key, value in extra if value is not None]
    return lines


def emit_config(config):
    """Text that parse_config reads back into an equal RunConfig."""
    grid = config.grid
    lines = ["[grid]"]
    lines += ["{} = {}".format(key, _format(value)) for key, value in zip(grid._fields, grid)]
    lines += ["", "[physics]"]
    lines += ["{} = {}".format(key, _format(value)) for key, value in zip(config.physics._fields, config.physics)]
    lines += ["", "[packet]"]
    lines += ["{} = {}".format(key, _format(value)) for key, value in zip(config.packet._fields, config.packet)]
    lines += [""] + _potential_lines("potential", config.potential)
    if config.reference is not None or config.lipschitz is not None or config.holder_exponent is not None:
        lines += [""] + _potential_lines("reference-potential", config.reference,
                                         (("lipschitz", config.lipschitz),
                                          ("holder_exponent", config.holder_exponent)))
    lines += ["", "[run]"]
    for key in RUN_KEYS:
        value = getattr(config, key)
        if value is None:
            continue
        if key == "snapshots":
            value = ", ".join(str(level) for level in value)
        lines.append("{} = {}".format(key, _format(value)))
    return "\n".join(lines) + "\n"


def resolve_path(name_or_path):
    """Path of a preset name such as ``example-a`` or the given path unchanged."""
    if name_or_path in PRESETS:
        return os.path.join(PRESET_DIR, PRESETS[name_or_path])
    return name_or_path


def read_text(name_or_path):
    path = resolve_path(name_or_path)
    try:
        with open(path) as file:
            return file.read()
    except (IOError, OSError) as e:
        raise OutputError("Unable to read configuration {}: {}".format(path, e), path=path)


def load_config(name_or_path, **overrides):
    """Read, apply overrides (ignoring None) and validate a run configuration."""
    config = parse_config(read_text(name_or_path))
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if "transform" in overrides:
        grid = config.grid
        overrides["grid"] = build_grid(grid.X, grid.Y, grid.T, grid.J, grid.K, grid.M, overrides["transform"])
    if overrides:
        config = validate_config(config._replace(**overrides))
    logger.debug("Configuration %s loaded", name_or_path)
    return config


def parse_study(text, base_dir="."):
    """Parse a study configuration.

    ``base`` names a preset or a run configuration path relative to ``base_dir``; ``cache`` is taken
    relative to the working directory.

    :return StudyConfig:
    :raises ConfigurationError
    """
    parser = _parser(text)
    for section in parser.sections():
        if section not in ("study", "reference"):
            raise ConfigurationError("Unknown section [{}]".format(section), key=section)
    missing = []
    study = _read_section(parser, "study", STUDY_KEYS, missing)
    reference = _read_section(parser, "reference", REFERENCE_GRID_KEYS, missing)
    if missing:
        raise ConfigurationError("Missing required keys: {}".format(", ".join(missing)),
                                 key=missing[0].split(".", 1)[1])
    base_name = study["base"]
    if base_name not in PRESETS:
        base_name = os.path.join(base_dir, base_name)
    base = load_config(base_name)
    directions = tuple(item.strip() for item in study["directions"].split(",") if item.strip())
    for direction in directions:
        if direction not in ("x", "y", "t"):
            raise ConfigurationError("Unknown direction '{}'".format(direction), key="directions")
    if study["levels"] < 1:
        raise ConfigurationError("levels must be at least 1", key="levels")
    grid = base.grid
    reference_grid = build_grid(grid.X, grid.Y, grid.T, reference["J"], reference["K"], reference["M"],
                                base.transform)
    return StudyConfig(base, directions, study["levels"], reference_grid, study["cache"])


def load_study(name_or_path):
    path = resolve_path(name_or_path)
    return parse_study(read_text(path), os.path.dirname(os.path.abspath(path)))


__all__ = ["RunConfig", "StudyConfig", "parse_config", "emit_config", "load_config", "parse_study",
           "load_study", "validate_config", "resolve_path"]
