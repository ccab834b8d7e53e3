"""Experiment configuration: a flat, typed key-value document with sections.

The grammar is INI-style (configparser dialect): `[section]` headers and
`key = value` lines, `#`/`;` comments.  Unknown sections or keys are
rejected, every default that gets filled is materialized in the resolved
mapping (and hence in the run manifest).  See README for the full grammar
and per-mode requirements.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .grids import DomainSpec
from .kernel import ProgenyKernel
from .model import ModelParams

__all__ = ["ExperimentConfig", "parse_config", "MODES"]

MODES = ("ode", "pde", "slow-manifold", "stability", "paradox-ode", "paradox-pde", "fenichel")
INIT_KINDS = ("constant", "on-manifold", "perturbed")

# section -> key -> parser
_SCHEMA = {
    "experiment": ("mode", "out", "seed"),
    "model": ("sigma", "d", "delta", "alpha", "alphas", "alpha_1", "alpha_2", "deltas"),
    "domain": ("lengths", "resolution"),
    "init": ("kind", "u", "v", "p_bar", "amplitude", "wavenumber"),
    "numerics": ("rtol", "atol", "horizon", "snapshots", "safety", "settle_time",
                 "theta_samples", "j_max", "curve_points"),
}


def _fail(key: str, constraint: str):
    raise ConfigError(f"{key}: {constraint}")


def _as_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        _fail(key, f"expected a number, got {raw!r}")


def _as_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        _fail(key, f"expected an integer, got {raw!r}")


def _as_list(key: str, raw: str, conv):
    items = [tok for tok in raw.replace(",", " ").split() if tok]
    if not items:
        _fail(key, "list must be non-empty")
    return tuple(conv(key, tok) for tok in items)


@dataclass
class ExperimentConfig:
    mode: str
    out: Optional[str]
    seed: int
    # model
    sigma: float
    d: float
    delta: float
    alpha: Optional[float]
    alphas: Optional[tuple[float, ...]]
    alpha_1: Optional[float]
    alpha_2: Optional[float]
    deltas: Optional[tuple[float, ...]]
    # domain
    domain: DomainSpec
    # init
    init_kind: Optional[str]
    init_u: Optional[float]
    init_v: Optional[float]
    init_p_bar: Optional[float]
    amplitude: float
    wavenumber: int
    # numerics
    rtol: float
    atol: float
    horizon: float
    snapshots: int
    safety: float
    settle_time: float
    theta_samples: int
    j_max: int
    curve_points: int

    def params(self, alpha: Optional[float] = None, delta: Optional[float] = None) -> ModelParams:
        a = alpha if alpha is not None else self.alpha
        if a is None:
            raise ConfigError("model.alpha: required for this mode")
        return ModelParams(d=self.d, alpha=a,
                           delta=delta if delta is not None else self.delta,
                           kernel=ProgenyKernel(self.sigma), domain=self.domain)

    def resolved(self) -> dict:
        """Every effective value, defaults included, for the run manifest."""
        return {
            "experiment": {"mode": self.mode, "out": self.out, "seed": self.seed},
            "model": {
                "sigma": self.sigma, "d": self.d, "delta": self.delta,
                "alpha": self.alpha, "alphas": self.alphas,
                "alpha_1": self.alpha_1, "alpha_2": self.alpha_2, "deltas": self.deltas,
            },
            "domain": {"lengths": self.domain.lengths, "resolution": self.domain.resolution},
            "init": {
                "kind": self.init_kind, "u": self.init_u, "v": self.init_v,
                "p_bar": self.init_p_bar, "amplitude": self.amplitude,
                "wavenumber": self.wavenumber,
            },
            "numerics": {
                "rtol": self.rtol, "atol": self.atol, "horizon": self.horizon,
                "snapshots": self.snapshots, "safety": self.safety,
                "settle_time": self.settle_time, "theta_samples": self.theta_samples,
                "j_max": self.j_max, "curve_points": self.curve_points,
            },
        }


def _validate_mode_requirements(cfg: ExperimentConfig) -> None:
    mode = cfg.mode
    needs_alpha = mode in ("ode", "pde", "stability", "fenichel")
    if needs_alpha and cfg.alpha is None:
        _fail("model.alpha", f"required for mode {mode!r}")
    if mode == "slow-manifold":
        if cfg.alphas is None and cfg.alpha is None:
            _fail("model.alphas", "slow-manifold mode needs alphas (or a single alpha)")
        for a in cfg.alphas or (cfg.alpha,):
            if not 0.0 < a <= 1.0:
                _fail("model.alphas", f"each sweep alpha must lie in (0, 1], got {a}")
    if mode in ("paradox-ode", "paradox-pde"):
        if cfg.alpha_1 is None or cfg.alpha_2 is None:
            _fail("model.alpha_1/alpha_2", f"required for mode {mode!r}")
        if not cfg.alpha_1 > cfg.alpha_2 > 0.0:
            _fail("model.alpha_1", f"paradox comparison needs alpha_1 > alpha_2 > 0, "
                                   f"got {cfg.alpha_1} and {cfg.alpha_2}")
        if cfg.init_kind is None:
            _fail("init.kind", "paradox modes need an initial state")
    if mode == "fenichel":
        if cfg.deltas is None:
            _fail("model.deltas", "fenichel mode needs a decreasing list of deltas")
        pairs = zip(cfg.deltas, cfg.deltas[1:])
        if any(x < 0.0 for x in cfg.deltas) or any(b >= a for a, b in pairs):
            _fail("model.deltas", "must be nonnegative and strictly decreasing")
        if cfg.settle_time >= cfg.horizon:
            _fail("numerics.settle_time", "must be below numerics.horizon")
    if mode in ("ode", "pde", "fenichel") and cfg.init_kind is None:
        _fail("init.kind", f"mode {mode!r} integrates and needs an initial state")

    if cfg.init_kind == "constant":
        if cfg.init_u is None or cfg.init_v is None:
            _fail("init.u/init.v", "constant init needs u and v")
        if cfg.init_u < 0.0 or cfg.init_v < 0.0:
            _fail("init.u", "initial densities must be >= 0")
    elif cfg.init_kind in ("on-manifold", "perturbed"):
        if cfg.init_p_bar is None:
            _fail("init.p_bar", f"{cfg.init_kind} init needs the target mass p_bar")
    if cfg.mode == "ode" and cfg.init_kind == "perturbed":
        _fail("init.kind", "perturbed init is spatial; use a pde mode")


def parse_config(text: str, mode: Optional[str] = None) -> ExperimentConfig:
    """Parse and fully validate a configuration document.

    `mode` (e.g. from a CLI subcommand) must agree with [experiment] mode
    when both are present.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            _fail(section, f"unknown section; expected one of {sorted(_SCHEMA)}")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                _fail(f"{section}.{key}", f"unknown key; expected one of {sorted(_SCHEMA[section])}")

    def get(section, key, fallback=None):
        return parser.get(section, key, fallback=fallback) if parser.has_section(section) else fallback

    file_mode = get("experiment", "mode")
    if file_mode is not None and file_mode not in MODES:
        _fail("experiment.mode", f"must be one of {MODES}, got {file_mode!r}")
    if mode is not None and file_mode is not None and mode != file_mode:
        _fail("experiment.mode", f"config says {file_mode!r} but the command asked for {mode!r}")
    effective_mode = mode or file_mode
    if effective_mode is None:
        _fail("experiment.mode", "no mode given (set it in [experiment] or via the subcommand)")

    def opt_float(section, key, positive=False):
        raw = get(section, key)
        if raw is None:
            return None
        val = _as_float(f"{section}.{key}", raw)
        if positive and not val > 0.0:
            _fail(f"{section}.{key}", f"must be > 0, got {val}")
        return val

    sigma = opt_float("model", "sigma")
    sigma = 1.0 if sigma is None else sigma
    if sigma < 1.0:
        _fail("model.sigma", f"must be >= 1, got {sigma}")
    d = opt_float("model", "d", positive=True)
    d = 1.0 if d is None else d
    delta = opt_float("model", "delta")
    delta = 0.1 if delta is None else delta
    if not 0.0 <= delta <= 1.0:
        _fail("model.delta", f"must lie in [0, 1], got {delta}")
    alpha = opt_float("model", "alpha", positive=True)
    alpha_1 = opt_float("model", "alpha_1", positive=True)
    alpha_2 = opt_float("model", "alpha_2", positive=True)
    raw = get("model", "alphas")
    alphas = _as_list("model.alphas", raw, _as_float) if raw is not None else None
    raw = get("model", "deltas")
    deltas = _as_list("model.deltas", raw, _as_float) if raw is not None else None

    raw = get("domain", "lengths", "1.0")
    lengths = _as_list("domain.lengths", raw, _as_float)
    raw = get("domain", "resolution", "101")
    resolution = _as_list("domain.resolution", raw, _as_int)
    try:
        domain = DomainSpec(lengths, resolution)
    except ValueError as exc:
        raise ConfigError(f"domain: {exc}") from exc

    init_kind = get("init", "kind")
    if init_kind is not None and init_kind not in INIT_KINDS:
        _fail("init.kind", f"must be one of {INIT_KINDS}, got {init_kind!r}")
    amplitude = opt_float("init", "amplitude")
    amplitude = 1e-3 if amplitude is None else amplitude
    if amplitude < 0.0:
        _fail("init.amplitude", f"must be >= 0, got {amplitude}")
    raw = get("init", "wavenumber")
    wavenumber = _as_int("init.wavenumber", raw) if raw is not None else 1
    if wavenumber < 1:
        _fail("init.wavenumber", f"must be >= 1, got {wavenumber}")

    def num(key, default, conv=_as_float, check=None, constraint=""):
        raw = get("numerics", key)
        if raw is None:
            return default
        val = conv(f"numerics.{key}", raw)
        if check is not None and not check(val):
            _fail(f"numerics.{key}", f"{constraint}, got {val}")
        return val

    cfg = ExperimentConfig(
        mode=effective_mode,
        out=get("experiment", "out"),
        seed=_as_int("experiment.seed", get("experiment", "seed", "0")),
        sigma=sigma, d=d, delta=delta, alpha=alpha, alphas=alphas,
        alpha_1=alpha_1, alpha_2=alpha_2, deltas=deltas,
        domain=domain,
        init_kind=init_kind,
        init_u=opt_float("init", "u"),
        init_v=opt_float("init", "v"),
        init_p_bar=opt_float("init", "p_bar"),
        amplitude=amplitude,
        wavenumber=wavenumber,
        rtol=num("rtol", 1e-8, check=lambda x: x > 0, constraint="must be > 0"),
        atol=num("atol", 1e-10, check=lambda x: x > 0, constraint="must be > 0"),
        horizon=num("horizon", 100.0, check=lambda x: x > 0, constraint="must be > 0"),
        snapshots=num("snapshots", 401, conv=_as_int, check=lambda x: x >= 2,
                      constraint="must be >= 2"),
        safety=num("safety", 0.9, check=lambda x: 0 < x <= 1, constraint="must lie in (0, 1]"),
        settle_time=num("settle_time", 20.0, check=lambda x: x >= 0, constraint="must be >= 0"),
        theta_samples=num("theta_samples", 64, conv=_as_int, check=lambda x: x >= 2,
                          constraint="must be >= 2"),
        j_max=num("j_max", 10, conv=_as_int, check=lambda x: x >= 1, constraint="must be >= 1"),
        curve_points=num("curve_points", 101, conv=_as_int, check=lambda x: x >= 2,
                         constraint="must be >= 2"),
    )
    _validate_mode_requirements(cfg)
    return cfg
