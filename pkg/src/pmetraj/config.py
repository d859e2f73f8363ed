"""Flat sectioned key-value configuration files.

Hand-rolled instead of configparser so every diagnostic can point at the
exact file line.  Syntax:

    # comment
    [section]
    key = value

Numbers may be written as fractions ("1/200") to keep refinement studies
exact in intent.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError


@dataclass(frozen=True)
class ConfigValue:
    raw: str
    line: int


class Config:
    def __init__(self, path: Path):
        self.path = Path(path)
        self.sections: dict[str, dict[str, ConfigValue]] = {}
        self._section_lines: dict[str, int] = {}

    # -- parsing ------------------------------------------------------------

    @classmethod
    def load(cls, path) -> "Config":
        cfg = cls(path)
        try:
            text = cfg.path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        section = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith(";"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if not section:
                    raise ConfigurationError(f"{cfg.path}:{lineno}: empty section name")
                cfg.sections.setdefault(section, {})
                cfg._section_lines.setdefault(section, lineno)
                continue
            if "=" not in line:
                raise ConfigurationError(
                    f"{cfg.path}:{lineno}: expected 'key = value', got {line!r}"
                )
            if section is None:
                raise ConfigurationError(
                    f"{cfg.path}:{lineno}: key outside any [section]"
                )
            key, _, value = line.partition("=")
            key = key.strip()
            if not key:
                raise ConfigurationError(f"{cfg.path}:{lineno}: empty key")
            if key in cfg.sections[section]:
                raise ConfigurationError(
                    f"{cfg.path}:{lineno}: duplicate key {section}.{key}"
                )
            cfg.sections[section][key] = ConfigValue(value.strip(), lineno)
        return cfg

    # -- accessors ----------------------------------------------------------

    def _fail(self, cv: ConfigValue | None, section: str, key: str, message: str):
        where = f"{self.path}:{cv.line}: " if cv is not None else f"{self.path}: "
        raise ConfigurationError(f"{where}{section}.{key}: {message}")

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def raw(self, section: str, key: str, default=None):
        cv = self.sections.get(section, {}).get(key)
        if cv is None:
            if default is not None:
                return default
            self._fail(None, section, key, "missing required key")
        return cv

    def get_str(self, section: str, key: str, default: str | None = None) -> str:
        cv = self.raw(section, key, default)
        return cv if isinstance(cv, str) else cv.raw

    def get_number(self, section: str, key: str, default: float | None = None) -> float:
        cv = self.sections.get(section, {}).get(key)
        if cv is None:
            if default is not None:
                return default
            self._fail(None, section, key, "missing required key")
        try:
            return parse_number(cv.raw)
        except ValueError:
            self._fail(cv, section, key, f"not a number: {cv.raw!r}")

    def get_int(self, section: str, key: str, default: int | None = None) -> int:
        cv = self.sections.get(section, {}).get(key)
        if cv is None:
            if default is not None:
                return default
            self._fail(None, section, key, "missing required key")
        try:
            value = int(cv.raw)
        except ValueError:
            self._fail(cv, section, key, f"not an integer: {cv.raw!r}")
        return value

    def get_number_list(self, section: str, key: str) -> list[float]:
        cv = self.sections.get(section, {}).get(key)
        if cv is None:
            self._fail(None, section, key, "missing required key")
        try:
            return [parse_number(tok) for tok in cv.raw.split(",") if tok.strip()]
        except ValueError:
            self._fail(cv, section, key, f"not a comma-separated number list: {cv.raw!r}")

    def require_positive(self, value: float, section: str, key: str) -> float:
        if not value > 0.0:
            cv = self.sections.get(section, {}).get(key)
            self._fail(cv, section, key, f"must be positive, got {value!r}")
        return value

    def reject_unknown(self, known: dict[str, set[str]]) -> None:
        """Error on sections/keys outside the given schema (catches typos)."""
        for section, keys in self.sections.items():
            if section not in known:
                line = self._section_lines.get(section, 0)
                raise ConfigurationError(
                    f"{self.path}:{line}: unknown section [{section}]"
                )
            for key, cv in keys.items():
                if key not in known[section]:
                    raise ConfigurationError(
                        f"{self.path}:{cv.line}: unknown key {section}.{key}"
                    )


def parse_number(token: str) -> float:
    """Float literal or exact fraction 'a/b'."""
    token = token.strip()
    if "/" in token:
        num, _, den = token.partition("/")
        return float(num) / float(den)
    return float(token)
