"""Monte Carlo experiment runner: configs, trial loops, metrics, CSV/JSON output.

A config pins the frame geometry, the scheme, the regularization, the
channel statistics, and an SNR grid.  Each trial draws messages, channels,
and noise from a counter-split substream of the experiment seed, so results
are bit-identical for any worker count: trial i of grid point g always sees
the generator spawned at (seed, 1, g, i), and accumulation runs in trial
order.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace, asdict
from functools import lru_cache

import numpy as np

from .channel import sample_channel
from .codebooks import SourceCodebook, TagCodebook, gen_gold, gen_tag_codebook
from .errors import ConfigInvalidError, IndexOutOfRangeError
from .framesim import SnrConfig, SystemParams, noise_variance, synthesize_frame
from .pilot_aided import (
    PilotLayout,
    alternating_pilot,
    decode_iterative,
    decode_noniterative,
    exhaustive_search,
)
from .pilot_free import decode_disjoint, decode_joint, decode_perfect_csi
from .solvers import RegularizationConfig

__all__ = [
    "ChannelConfig",
    "ExperimentConfig",
    "MetricsRow",
    "CSV_COLUMNS",
    "PILOT_FREE_SCHEMES",
    "PILOT_AIDED_SCHEMES",
    "SCHEMES",
    "SWEEP_AXES",
    "bits_from_index",
    "index_from_bits",
    "run_trials",
    "sweep",
    "rows_to_csv",
    "rows_to_json",
    "frame_to_csv",
    "frame_from_csv",
    "load_config",
    "config_from_dict",
    "config_to_dict",
]

log = logging.getLogger(__name__)

PILOT_FREE_SCHEMES = frozenset({
    "pilot_free_joint",
    "pilot_free_disjoint",
    "pilot_free_disjoint_sr_only",
    "perfect_csi",
})
PILOT_AIDED_SCHEMES = frozenset({
    "pilot_aided_noniter",
    "pilot_aided_iter_discrete",
    "pilot_aided_iter_relaxed",
    "pilot_aided_exhaustive",
})
SCHEMES = PILOT_FREE_SCHEMES | PILOT_AIDED_SCHEMES

SWEEP_AXES = ("snr_sr", "snr_str", "rho", "rate_source", "rate_tag")

CSV_COLUMNS = ("scheme", "axis_name", "axis_value", "snr_str_db", "snr_sr_db",
               "ber_source", "ber_tag", "nrmse_str", "nrmse_sr", "mean_iters",
               "trials", "seed")

CONFIG_VERSION = 1


@dataclass
class ChannelConfig:
    """Tap statistics shared by both links."""

    n_taps: int = 3
    kappa_db: float = -10.0
    sparse: bool = False


@dataclass
class ExperimentConfig:
    params: SystemParams = field(default_factory=SystemParams)
    scheme: str = "pilot_free_joint"
    snr_grid: list[SnrConfig] = field(default_factory=lambda: [SnrConfig(15.0, 20.0)])
    rho_db: float = -5.0
    reg: RegularizationConfig = field(default_factory=RegularizationConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    n_source_words: int | None = 16
    n_tag_words: int | None = 16
    n_pilot: int | None = None
    l_pilot: int | None = None
    trials: int = 1000
    seed: int = 0
    axis_values: list[float] | None = None
    max_iters: int = 50
    rel_tol: float = 1e-8
    enum_budget: int = 2 ** 16
    search_budget: int = 2 ** 20


@dataclass
class MetricsRow:
    """Aggregated metrics for one grid point."""

    scheme: str
    snr_str_db: float
    snr_sr_db: float
    ber_source: float
    ber_tag: float
    nrmse_str: float
    nrmse_sr: float
    mean_iters: float
    trials: int
    seed: int
    axis_name: str = "snr_sr"
    axis_value: float = float("nan")


def bits_from_index(index: int, width: int) -> np.ndarray:
    """Natural binary representation, most-significant bit first."""
    if width < 0 or not 0 <= index < 2 ** width:
        raise IndexOutOfRangeError(f"index {index} does not fit in {width} bits")
    return np.array([(index >> (width - 1 - b)) & 1 for b in range(width)],
                    dtype=np.int64)


def index_from_bits(bits) -> int:
    """Inverse of :func:`bits_from_index`."""
    value = 0
    for b in np.asarray(bits, dtype=np.int64):
        value = (value << 1) | int(b)
    return value


def _index_bit_errors(true_index: int, est_index: int, width: int) -> int:
    if not 0 <= true_index < 2 ** width or not 0 <= est_index < 2 ** width:
        raise IndexOutOfRangeError("message index out of range for bit width")
    return ((true_index ^ est_index)).bit_count()


# ---------------------------------------------------------------------------
# experiment context: everything derived from the config once per process


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigInvalidError(message)


def validate_config(cfg: ExperimentConfig):
    _require(cfg.scheme in SCHEMES, f"unknown scheme {cfg.scheme!r}")
    _require(cfg.trials >= 1, "trials must be >= 1")
    _require(len(cfg.snr_grid) >= 1, "snr_grid must be nonempty")
    _require(cfg.channel.n_taps >= 1, "channel n_taps must be >= 1")
    _require(cfg.channel.n_taps <= cfg.params.q + 1,
             "channel n_taps exceeds q + 1 delay bins")
    _require(cfg.params.n == 31,
             "the harness draws codewords and pilots from the 33 Gold words "
             "of length 31; other lengths are library-API territory")
    if cfg.scheme in PILOT_FREE_SCHEMES:
        _require(cfg.n_source_words is not None and cfg.n_tag_words is not None,
                 "pilot-free schemes need codebook sizes")
        _require(cfg.n_pilot is None and cfg.l_pilot is None,
                 "pilot-free schemes take codebook sizes, not a pilot layout")
        _require(1 <= cfg.n_source_words <= 33,
                 "source codebook size must lie in [1, 33]")
        _require(1 <= cfg.n_tag_words <= 252,
                 "tag codebook size must lie in [1, 252]")
        _require((cfg.n_source_words & (cfg.n_source_words - 1)) == 0,
                 "source codebook size must be a power of two for bit mapping")
        _require((cfg.n_tag_words & (cfg.n_tag_words - 1)) == 0,
                 "tag codebook size must be a power of two for bit mapping")
    else:
        _require(cfg.n_pilot is not None and cfg.l_pilot is not None,
                 "pilot-aided schemes need n_pilot and l_pilot")
        _require(cfg.n_source_words is None and cfg.n_tag_words is None,
                 "pilot-aided schemes take a pilot layout, not codebook sizes")
        _require(cfg.params.q + 1 <= cfg.n_pilot <= cfg.params.n,
                 "need q + 1 <= n_pilot <= n")
        _require(2 <= cfg.l_pilot <= cfg.params.l, "need 2 <= l_pilot <= l")


class _Context:
    """Per-process immutable experiment state."""

    def __init__(self, cfg: ExperimentConfig):
        validate_config(cfg)
        self.cfg = cfg
        self.gold = gen_gold(5)
        setup_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0,)))
        if cfg.scheme in PILOT_FREE_SCHEMES:
            src_idx = np.sort(setup_rng.choice(len(self.gold), cfg.n_source_words,
                                               replace=False))
            tag_pool = gen_tag_codebook(cfg.params.l).words
            if cfg.n_tag_words > len(tag_pool):
                # beyond the separable set: admit the antipodal complements,
                # which keep the zero-sum constraint but break pairwise rank 2
                tag_pool = np.vstack([tag_pool, -tag_pool])
            tag_idx = np.sort(setup_rng.choice(tag_pool.shape[0], cfg.n_tag_words,
                                               replace=False))
            self.source = SourceCodebook(n=31, words=self.gold.words[src_idx])
            self.tag = TagCodebook(l=cfg.params.l, words=tag_pool[tag_idx])
            self.src_bits = int(np.log2(len(self.source)))
            self.tag_bits = int(np.log2(len(self.tag)))
            log.info("codebook subsets: source %s, tag %s",
                     src_idx.tolist(), tag_idx.tolist())
        else:
            self.x_pilot = alternating_pilot(cfg.l_pilot)
            self.n_data = cfg.params.n - cfg.n_pilot
            self.l_data = cfg.params.l - cfg.l_pilot
        # relaxed data penalties default to the noise variance (fixed at 1)
        reg = cfg.reg
        if reg.lambda_c is None or reg.lambda_x is None:
            reg = replace(reg,
                          lambda_c=1.0 if reg.lambda_c is None else reg.lambda_c,
                          lambda_x=1.0 if reg.lambda_x is None else reg.lambda_x)
        self.reg = reg

    def trial_rng(self, grid_idx: int, trial_idx: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(
            entropy=self.cfg.seed, spawn_key=(1, grid_idx, trial_idx)))


# trial results: (src_bit_err, src_bits, tag_bit_err, tag_bits,
#                 e2_str, n2_str, e2_sr, n2_sr, iters)
def _run_one_trial(ctx: _Context, snr: SnrConfig, grid_idx: int, trial_idx: int):
    cfg = ctx.cfg
    rng = ctx.trial_rng(grid_idx, trial_idx)
    sigma_omega2, sigma_str2, sigma_sr2 = noise_variance(snr, cfg.params.n)
    if cfg.scheme in PILOT_FREE_SCHEMES:
        ci = int(rng.integers(len(ctx.source)))
        xi = int(rng.integers(len(ctx.tag)))
        c = ctx.source.words[ci]
        x = ctx.tag.words[xi]
    else:
        pilot_word = int(rng.integers(len(ctx.gold)))
        c_pilot = ctx.gold.words[pilot_word][:cfg.n_pilot]
        c_data = 1 - 2 * rng.integers(0, 2, ctx.n_data)
        x_data = 1 - 2 * rng.integers(0, 2, ctx.l_data)
        c = np.concatenate([c_pilot, c_data])
        x = np.concatenate([ctx.x_pilot, x_data])
        layout = PilotLayout(c_pilot=c_pilot, x_pilot=ctx.x_pilot,
                             n_data=ctx.n_data, l_data=ctx.l_data)
    g_str = sample_channel(cfg.params.q, cfg.channel.n_taps, sigma_str2,
                           cfg.channel.kappa_db, cfg.channel.sparse, rng)
    g_sr = sample_channel(cfg.params.q, cfg.channel.n_taps, sigma_sr2,
                          cfg.channel.kappa_db, cfg.channel.sparse, rng)
    frame = synthesize_frame(c, x, g_str, g_sr, sigma_omega2, rng, keep_truth=False)
    n2_str = float(np.sum(np.abs(g_str.taps) ** 2))
    n2_sr = float(np.sum(np.abs(g_sr.taps) ** 2))

    scheme = cfg.scheme
    if scheme in PILOT_FREE_SCHEMES:
        if scheme == "pilot_free_joint":
            res = decode_joint(frame.y, ctx.source, ctx.tag, ctx.reg)
        elif scheme == "pilot_free_disjoint":
            res = decode_disjoint(frame.y, ctx.source, ctx.tag, ctx.reg)
        elif scheme == "pilot_free_disjoint_sr_only":
            res = decode_disjoint(frame.y, ctx.source, ctx.tag, ctx.reg,
                                  use_str_for_source=False)
        else:
            res = decode_perfect_csi(frame.y, ctx.source, ctx.tag, g_str, g_sr)
        src_err = _index_bit_errors(ci, res.c_index, ctx.src_bits)
        tag_err = _index_bit_errors(xi, res.x_index, ctx.tag_bits)
        if scheme == "perfect_csi":
            e2_str = e2_sr = 0.0
        else:
            e2_str = float(np.sum(np.abs(res.g_str_hat - g_str.taps) ** 2))
            e2_sr = float(np.sum(np.abs(res.g_sr_hat - g_sr.taps) ** 2))
        return (src_err, ctx.src_bits, tag_err, ctx.tag_bits,
                e2_str, n2_str, e2_sr, n2_sr, 0)

    if scheme == "pilot_aided_noniter":
        res = decode_noniterative(frame.y, layout)
    elif scheme == "pilot_aided_iter_discrete":
        res = decode_iterative(frame.y, layout, ctx.reg, mode="discrete",
                               max_iters=cfg.max_iters, rel_tol=cfg.rel_tol,
                               enum_budget=cfg.enum_budget)
    elif scheme == "pilot_aided_iter_relaxed":
        res = decode_iterative(frame.y, layout, ctx.reg, mode="relaxed",
                               max_iters=cfg.max_iters, rel_tol=cfg.rel_tol)
    else:
        res = exhaustive_search(frame.y, layout, ctx.reg, budget=cfg.search_budget)
    src_err = int(np.count_nonzero(res.c_data_hat != c_data))
    tag_err = int(np.count_nonzero(res.x_data_hat != x_data))
    e2_str = float(np.sum(np.abs(res.g_str_hat - g_str.taps) ** 2))
    e2_sr = float(np.sum(np.abs(res.g_sr_hat - g_sr.taps) ** 2))
    return (src_err, ctx.n_data, tag_err, ctx.l_data,
            e2_str, n2_str, e2_sr, n2_sr, res.iters)


@lru_cache(maxsize=8)
def _context_for(cfg_json: str) -> _Context:
    return _Context(config_from_dict(json.loads(cfg_json)))


def _trial_batch(args):
    cfg_json, grid_idx, snr_str_db, snr_sr_db, start, stop = args
    ctx = _context_for(cfg_json)
    snr = SnrConfig(snr_str_db=snr_str_db, snr_sr_db=snr_sr_db)
    return [_run_one_trial(ctx, snr, grid_idx, i) for i in range(start, stop)]


def _reduce(scheme: str, snr: SnrConfig, trial_results, trials: int,
            seed: int) -> MetricsRow:
    src_err = src_bits = tag_err = tag_bits = 0
    e2_str = n2_str = e2_sr = n2_sr = 0.0
    iters = 0
    for r in trial_results:   # fixed trial order keeps float sums reproducible
        src_err += r[0]; src_bits += r[1]
        tag_err += r[2]; tag_bits += r[3]
        e2_str += r[4]; n2_str += r[5]
        e2_sr += r[6]; n2_sr += r[7]
        iters += r[8]
    return MetricsRow(
        scheme=scheme,
        snr_str_db=snr.snr_str_db, snr_sr_db=snr.snr_sr_db,
        ber_source=src_err / src_bits if src_bits else 0.0,
        ber_tag=tag_err / tag_bits if tag_bits else 0.0,
        nrmse_str=float(np.sqrt(e2_str / n2_str)) if n2_str > 0 else 0.0,
        nrmse_sr=float(np.sqrt(e2_sr / n2_sr)) if n2_sr > 0 else 0.0,
        mean_iters=iters / trials,
        trials=trials,
        seed=seed,
    )


def run_trials(cfg: ExperimentConfig, workers: int = 1,
               grid_offset: int = 0) -> list[MetricsRow]:
    """One MetricsRow per SNR grid point.

    ``grid_offset`` shifts the substream index of the first grid point so a
    sweep can give every axis position its own substreams.
    """
    validate_config(cfg)
    cfg_json = json.dumps(config_to_dict(cfg), sort_keys=True)
    ctx = _context_for(cfg_json)
    rows = []
    if workers > 1:
        chunk = max(1, -(-cfg.trials // (workers * 4)))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for g, snr in enumerate(cfg.snr_grid):
                gi = g + grid_offset
                tasks = [(cfg_json, gi, snr.snr_str_db, snr.snr_sr_db,
                          a, min(a + chunk, cfg.trials))
                         for a in range(0, cfg.trials, chunk)]
                per_trial = [r for batch in pool.map(_trial_batch, tasks)
                             for r in batch]
                rows.append(_reduce(cfg.scheme, snr, per_trial, cfg.trials, cfg.seed))
    else:
        for g, snr in enumerate(cfg.snr_grid):
            gi = g + grid_offset
            per_trial = [_run_one_trial(ctx, snr, gi, i) for i in range(cfg.trials)]
            rows.append(_reduce(cfg.scheme, snr, per_trial, cfg.trials, cfg.seed))
    for row, snr in zip(rows, cfg.snr_grid):
        row.axis_name = "snr_sr"
        row.axis_value = snr.snr_sr_db
    return rows


def _derived_config(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    base_sr = cfg.snr_grid[0].snr_sr_db
    if axis == "snr_sr":
        return replace(cfg, snr_grid=[SnrConfig(value + cfg.rho_db, value)])
    if axis == "snr_str":
        return replace(cfg, snr_grid=[SnrConfig(value, value - cfg.rho_db)])
    if axis == "rho":
        return replace(cfg, snr_grid=[SnrConfig(base_sr + value, base_sr)],
                       rho_db=value)
    if axis == "rate_source":
        rate = int(value)
        if cfg.scheme in PILOT_FREE_SCHEMES:
            return replace(cfg, snr_grid=[cfg.snr_grid[0]], n_source_words=2 ** rate)
        return replace(cfg, snr_grid=[cfg.snr_grid[0]], n_pilot=cfg.params.n - rate)
    if axis == "rate_tag":
        rate = int(value)
        if cfg.scheme in PILOT_FREE_SCHEMES:
            return replace(cfg, snr_grid=[cfg.snr_grid[0]], n_tag_words=2 ** rate)
        return replace(cfg, snr_grid=[cfg.snr_grid[0]], l_pilot=cfg.params.l - rate)
    raise ConfigInvalidError(f"unknown sweep axis {axis!r}; pick one of {SWEEP_AXES}")


def sweep(cfg: ExperimentConfig, axis: str, values=None,
          workers: int = 1) -> list[MetricsRow]:
    """One MetricsRow per axis value, derived from the base config.

    snr_sr/snr_str values couple the other link through rho_db; rho values
    hold the base grid point's direct-link SNR fixed; rate values resize the
    codebooks (pilot-free) or the pilot split (pilot-aided).
    """
    if values is None:
        values = cfg.axis_values
    if not values:
        raise ConfigInvalidError("sweep needs a nonempty axis grid")
    rows = []
    for pos, value in enumerate(values):
        derived = _derived_config(cfg, axis, value)
        row = run_trials(derived, workers=workers, grid_offset=pos)[0]
        row.axis_name = axis
        row.axis_value = float(value)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# serialization


def frame_to_csv(y: np.ndarray) -> str:
    """Debug dump of a frame matrix: one line per PRI, cells as re,im pairs.

    Row p of the frame becomes the line
    ``re(y[p,0]),im(y[p,0]),re(y[p,1]),im(y[p,1]),...`` with full float
    precision, so the dump is text-only and loadable by
    :func:`frame_from_csv`.
    """
    y = np.asarray(y, dtype=np.complex128)
    lines = []
    for row in y:
        cells = []
        for value in row:
            cells.append(f"{float(value.real)!r},{float(value.imag)!r}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def frame_from_csv(text: str) -> np.ndarray:
    """Inverse of :func:`frame_to_csv`."""
    rows = []
    for line in text.strip().split("\n"):
        parts = [float(tok) for tok in line.split(",")]
        if len(parts) % 2 != 0:
            raise ConfigInvalidError("frame dump lines need re,im pairs")
        values = np.array(parts).reshape(-1, 2)
        rows.append(values[:, 0] + 1j * values[:, 1])
    return np.vstack(rows)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def rows_to_csv(rows: list[MetricsRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        record = asdict(row)
        lines.append(",".join(_fmt(record[col]) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[MetricsRow], cfg: ExperimentConfig | None = None) -> str:
    from . import __version__
    payload = {
        "version": CONFIG_VERSION,
        "build": f"radartag-{__version__}",
        "rows": [asdict(row) for row in rows],
    }
    if cfg is not None:
        payload["config"] = config_to_dict(cfg)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "version": CONFIG_VERSION,
        "scheme": cfg.scheme,
        "params": asdict(cfg.params),
        "snr_grid": [asdict(s) for s in cfg.snr_grid],
        "rho_db": cfg.rho_db,
        "reg": asdict(cfg.reg),
        "channel": asdict(cfg.channel),
        "codebook": (None if cfg.n_source_words is None else
                     {"n_source": cfg.n_source_words, "n_tag": cfg.n_tag_words}),
        "layout": (None if cfg.n_pilot is None else
                   {"n_pilot": cfg.n_pilot, "l_pilot": cfg.l_pilot}),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "axis_values": cfg.axis_values,
        "max_iters": cfg.max_iters,
        "rel_tol": cfg.rel_tol,
        "enum_budget": cfg.enum_budget,
        "search_budget": cfg.search_budget,
    }


def config_from_dict(data: dict) -> ExperimentConfig:
    try:
        if data.get("version", CONFIG_VERSION) != CONFIG_VERSION:
            raise ConfigInvalidError(f"unsupported config version {data['version']}")
        params = SystemParams(**data.get("params", {}))
        scheme = data.get("scheme", "pilot_free_joint")
        rho_db = float(data.get("rho_db", -5.0))
        if "snr_grid" in data and data["snr_grid"] is not None:
            grid = [SnrConfig(**point) for point in data["snr_grid"]]
        else:
            sr = data.get("snr_sr_db", 20.0)
            sr_values = sr if isinstance(sr, (list, tuple)) else [sr]
            if "snr_str_db" in data and data["snr_str_db"] is not None:
                st = data["snr_str_db"]
                st_values = st if isinstance(st, (list, tuple)) else [st] * len(sr_values)
                if len(st_values) != len(sr_values):
                    raise ConfigInvalidError("snr_str_db grid length mismatch")
                grid = [SnrConfig(float(a), float(b))
                        for a, b in zip(st_values, sr_values)]
            else:
                grid = [SnrConfig(float(v) + rho_db, float(v)) for v in sr_values]
        reg = RegularizationConfig(**data.get("reg", {}))
        chan = ChannelConfig(**data.get("channel", {}))
        codebook = data.get("codebook")
        layout = data.get("layout")
        cfg = ExperimentConfig(
            params=params, scheme=scheme, snr_grid=grid, rho_db=rho_db,
            reg=reg, channel=chan,
            n_source_words=codebook["n_source"] if codebook else None,
            n_tag_words=codebook["n_tag"] if codebook else None,
            n_pilot=layout["n_pilot"] if layout else None,
            l_pilot=layout["l_pilot"] if layout else None,
            trials=int(data.get("trials", 1000)),
            seed=int(data.get("seed", 0)),
            axis_values=data.get("axis_values"),
            max_iters=int(data.get("max_iters", 50)),
            rel_tol=float(data.get("rel_tol", 1e-8)),
            enum_budget=int(data.get("enum_budget", 2 ** 16)),
            search_budget=int(data.get("search_budget", 2 ** 20)),
        )
    except (TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, ConfigInvalidError):
            raise
        raise ConfigInvalidError(f"malformed config: {exc}") from exc
    validate_config(cfg)
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalidError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)
