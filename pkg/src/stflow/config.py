"""Line-oriented solver configuration files.

Format: one `section.key = value` assignment per line; `#` starts a
comment.  Values are parsed as int, float, bool, or string.  Known
sections map onto SolverConfig (newton.*, krylov.*, assembly.*).
"""

from .assembly import SolverConfig
from .errors import ParseError

__all__ = ["parse_config_text", "load_config", "apply_config"]


def _parse_value(text):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config_text(text, path="<string>"):
    """Parse config text into {(section, key): value}."""
    out = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'section.key = value'", line=ln, path=path)
        lhs, rhs = (part.strip() for part in line.split("=", 1))
        if "." not in lhs:
            raise ParseError(f"key {lhs!r} lacks a section prefix", line=ln, path=path)
        section, key = lhs.split(".", 1)
        if not section or not key or not rhs:
            raise ParseError("empty section, key, or value", line=ln, path=path)
        out[(section, key)] = _parse_value(rhs)
    return out


_SCHEMA = {
    ("newton", "max_iter"): int,
    ("newton", "abs_tol"): float,
    ("newton", "rel_tol"): float,
    ("krylov", "restart"): int,
    ("krylov", "max_iter"): int,
    ("krylov", "tol"): float,
    ("krylov", "preconditioner"): str,
    ("krylov", "method"): str,
    ("assembly", "quadrature_degree"): int,
    ("assembly", "threads"): int,
}


def apply_config(cfg: SolverConfig, entries, path="<string>"):
    """Apply parsed entries onto a SolverConfig, validating keys and types."""
    for (section, key), value in entries.items():
        if (section, key) not in _SCHEMA:
            raise ParseError(f"unknown option {section}.{key}", path=path)
        want = _SCHEMA[(section, key)]
        if want in (int, float) and isinstance(value, bool):
            raise ParseError(f"{section}.{key} expects {want.__name__}", path=path)
        if want is float and isinstance(value, int):
            value = float(value)
        if not isinstance(value, want):
            raise ParseError(f"{section}.{key} expects {want.__name__}, "
                             f"got {value!r}", path=path)
        if section == "assembly":
            setattr(cfg, key, value)
        else:
            setattr(getattr(cfg, section), key, value)
    cfg.__post_init__()
    return cfg


def load_config(path, cfg: SolverConfig = None):
    """Read a config file into a (new or given) SolverConfig."""
    cfg = cfg or SolverConfig()
    with open(path) as fh:
        entries = parse_config_text(fh.read(), path=str(path))
    return apply_config(cfg, entries, path=str(path))
