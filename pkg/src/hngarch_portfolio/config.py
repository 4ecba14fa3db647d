"""Flat ``key = value`` run configuration shared by the command-line front end."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from .errors import ValidationError
from .model import CHRISTOFFERSEN, GarchParams, long_run_variance, validate
from .recursion import Preferences
from .simulate import SimConfig

__all__ = ["RunConfig", "KEYS", "DEFAULTS", "parse_text", "load_file", "from_csv_header", "format_value"]


def _number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _integer(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _optional(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def inner(text: str):
        return None if text.strip().lower() in ("", "none", "auto") else parse(text)

    return inner


def _number_list(text: str) -> tuple[float, ...]:
    return tuple(_number(part) for part in text.split(",") if part.strip())


def _word(text: str) -> str:
    return text.strip().lower()


KEYS: dict[str, Callable[[str], Any]] = {
    "omega": _number,
    "beta": _number,
    "alpha": _number,
    "theta": _number,
    "lam": _number,
    "r": _number,
    "gamma": _number,
    "T": _integer,
    "w0": _number,
    "n_paths": _integer,
    "seed": _integer,
    "h0": _optional(_number),
    "x0": _number,
    "chunk_size": _integer,
    "n_workers": _integer,
    "cash_sample_paths": _integer,
    "schedule": _word,
    "sweep": _word,
    "sweep_values": _optional(_number_list),
    "n_points": _integer,
    "h_next": _optional(_number),
    "t_eval": _integer,
    "horizon_days": _optional(_number),
    "deltas": _optional(_number_list),
    "delta_ref": _number,
    "u_grid": _optional(_number_list),
}

ALIASES = {"lambda": "lam"}

DEFAULTS: dict[str, Any] = {
    **CHRISTOFFERSEN.as_dict(),
    "gamma": -5.0,
    "T": 252,
    "w0": 0.0,
    "n_paths": 10_000,
    "seed": 0,
    "h0": None,
    "x0": 0.0,
    "chunk_size": 2_000,
    "n_workers": 1,
    "cash_sample_paths": 10_000,
    "schedule": "optimal",
    "sweep": "gamma",
    "sweep_values": None,
    "n_points": 20,
    "h_next": None,
    "t_eval": 0,
    "horizon_days": None,
    "deltas": None,
    "delta_ref": 2.0**-10,
    "u_grid": None,
}


def format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value + 0.0, ".17g")
    if isinstance(value, (tuple, list)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def parse_text(text: str, *, source: str = "<config>") -> dict[str, Any]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values.update(coerce({key: value}, source=f"{source}:{lineno}"))
    return values


def coerce(raw: dict[str, str], *, source: str = "<flags>") -> dict[str, Any]:
    out = {}
    for key, value in raw.items():
        key = ALIASES.get(key, key)
        if key not in KEYS:
            raise ValidationError(f"{source}: unknown key {key!r}")
        try:
            out[key] = KEYS[key](value)
        except ValueError as exc:
            raise ValidationError(f"{source}: bad value for {key}: {exc}") from None
    return out


def load_file(path) -> dict[str, Any]:
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), source=str(path))


def from_csv_header(path) -> dict[str, Any]:
    """Recover the run configuration from the ``# key = value`` metadata of a CSV."""
    lines = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if not raw.startswith("#"):
            break
        body = raw[1:].strip()
        key = body.split("=", 1)[0].strip()
        if "=" in body and ALIASES.get(key, key) in KEYS:
            lines.append(body)
    return parse_text("\n".join(lines), source=str(path))


@dataclass
class RunConfig:
    """Resolved settings for one command; defaults < config file < flags."""

    values: dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS))
    out_dir: Path = Path(".")

    @classmethod
    def build(
        cls,
        file_values: Optional[dict[str, Any]] = None,
        flag_values: Optional[dict[str, Any]] = None,
        out_dir=".",
    ) -> "RunConfig":
        values = dict(DEFAULTS)
        values.update(file_values or {})
        values.update(flag_values or {})
        cfg = cls(values=values, out_dir=Path(out_dir))
        cfg.params()
        cfg.prefs()
        return cfg

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def params(self) -> GarchParams:
        v = self.values
        return validate(GarchParams(
            omega=v["omega"], beta=v["beta"], alpha=v["alpha"],
            theta=v["theta"], lam=v["lam"], r=v["r"],
        ))

    def prefs(self, T: Optional[int] = None) -> Preferences:
        return Preferences(gamma=self["gamma"], T=self["T"] if T is None else T, w0=self["w0"])

    def h0(self) -> float:
        h0 = self["h0"]
        return long_run_variance(self.params()) if h0 is None else h0

    def sim_config(self) -> SimConfig:
        return SimConfig(
            n_paths=self["n_paths"], T=self["T"], seed=self["seed"], h0=self.h0(),
            x0=self["x0"], v0=math.exp(self["w0"]),
        )

    def resolved(self) -> dict[str, Any]:
        """Every key with ``none`` placeholders kept, in schema order."""
        return {k: self.values.get(k) for k in KEYS}

    def horizon_days(self) -> float:
        hd = self["horizon_days"]
        return float(self["T"]) if hd is None else hd

    def annual_vol(self) -> float:
        return math.sqrt(252.0 * long_run_variance(self.params()))
