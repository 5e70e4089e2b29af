"""
Benchmark harness: gate-count model, parameter sweeps, the per-phase timing table
and ciphertext size accounting.

Without a real bootstrapping backend absolute timings are modelled: every bootstrap
unit costs ``per_gate_delay_ms``, comparison and validation run in ceil(N / n_t)
waves of regions, and the HomAddXOR accumulation runs on one thread.
With ``realize_delay`` the engine actually sleeps that long per unit and measured
wall clock is reported instead.
"""

from __future__ import annotations

import itertools
import logging
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import pandas as pd
from dotenv import dotenv_values

from .circuits import ZeroSampleSheet, evaluate_locpir
from .codec import encode_fixed, encrypt_word, word_nbytes
from .dataset import encode_regions, synthetic_regions
from .engines import create_engine
from .errors import BenchmarkMismatchError, ParameterError
from .models.bench import CSV_COLUMNS, BenchConfig, PhaseReport
from .models.fixed_point import FixedPointFormat
from .models.params import SecurityLevel, TlweParams
from .protocol.wire import query_nbytes, response_nbytes, sheet_nbytes
from .torus_core import NoiseSampler, keygen
from .utils.stopwatch import Stopwatch

logger = logging.getLogger(__name__)

# Unit delay of one gate bootstrap on a single core, in milliseconds.
DEFAULT_GATE_DELAY_MS = 13.0

# Measured LocPIR totals (seconds) at N = m = 9 with six threads.
REFERENCE_TOTAL_S = {
    (SecurityLevel.SEC80, 13): 4.36,
    (SecurityLevel.SEC128, 13): 4.88,
    (SecurityLevel.SEC80, 16): 5.12,
    (SecurityLevel.SEC128, 16): 5.67,
}


def _check_positive(**values: int) -> None:
    for name, value in values.items():
        if value < 1:
            raise ParameterError(f"{name} must be positive, got {value}")


def predict_phase_units(n_regions: int, l: int, m: int) -> dict[str, int]:  # noqa: E741
    """
    Bootstrap units per phase.

    Comparison is four comparators of l XNOR and l MUX each; validation is three
    AND for the box test plus m AND for the service mask; HomAddXOR is m XOR.
    """
    _check_positive(n_regions=n_regions, l=l, m=m)
    return {
        "comparison": n_regions * 12 * l,
        "validation": n_regions * (3 + m),
        "addxor": n_regions * m,
    }


def predict_gate_units(n_regions: int, l: int, m: int) -> int:  # noqa: E741
    """N * (12l + 2m + 3)."""
    return sum(predict_phase_units(n_regions, l, m).values())


def simulated_phase_ms(
    n_regions: int, l: int, m: int, n_t: int, per_gate_delay_ms: float  # noqa: E741
) -> dict[str, float]:
    """
    Per-phase budget-model time.

    Per-region phases are spread over n_t workers; the accumulation over all
    regions is sequential, like ``evaluate_locpir``.
    """
    _check_positive(n_t=n_t)
    if per_gate_delay_ms < 0:
        raise ParameterError(f"gate delay must be non-negative, got {per_gate_delay_ms}")
    waves = math.ceil(n_regions / n_t)
    per_region = predict_phase_units(1, l, m)
    return {
        "comparison": waves * per_region["comparison"] * per_gate_delay_ms,
        "validation": waves * per_region["validation"] * per_gate_delay_ms,
        "addxor": n_regions * per_region["addxor"] * per_gate_delay_ms,
    }


def run_case(
    security: Union[SecurityLevel, str, int],
    n_regions: int,
    l: int,  # noqa: E741
    m: int,
    n_t: int = 1,
    engine: str = "clear",
    per_gate_delay_ms: float = 0.0,
    realize_delay: bool = False,
    seed: Optional[int] = None,
) -> PhaseReport:
    """
    Evaluate one LocPIR query over a synthetic grid and report its phase costs.

    The query point is the centre of region 0, so the decrypted result is that
    region's service value.
    """
    params = TlweParams.for_level(security)
    fmt = FixedPointFormat.for_length(l)
    records = synthetic_regions(n_regions, m, seed)

    sk = keygen(params, seed)
    sampler = NoiseSampler.for_params(params, seed)
    engine_obj = create_engine(
        engine,
        sk=sk,
        sampler=sampler.spawn(0),
        gate_delay_ms=per_gate_delay_ms if realize_delay else 0.0,
    )

    # client side: sheet and query
    stopwatch = Stopwatch()
    sheet = ZeroSampleSheet(
        [[engine_obj.zero_sample(sk, sampler) for _ in range(m)] for _ in range(n_regions)]
    )
    regions = encode_regions(records, fmt, engine_obj, sheet, m, params)
    target = records[0]
    with stopwatch.lap("encrypt"):
        enc_x = encrypt_word(encode_fixed((target.lat1 + target.lat2) / 2, fmt), sk, sampler, engine_obj)
        enc_y = encrypt_word(encode_fixed((target.lon1 + target.lon2) / 2, fmt), sk, sampler, engine_obj)

    engine_obj.counter.reset()
    result = evaluate_locpir(enc_x, enc_y, regions, engine_obj, workers=n_t, m=m)
    with stopwatch.lap("decrypt"):
        value = result.service.reveal(sk)

    units = result.phase_units
    predicted = predict_phase_units(n_regions, l, m)
    if units != predicted:
        logger.error("Gate counts %s differ from the model %s", units, predicted)
        raise BenchmarkMismatchError(f"gate counts {units} differ from the model {predicted}")
    if value != target.service:
        logger.error("Query returned %d, expected %d", value, target.service)
        raise BenchmarkMismatchError(f"query returned {value}, expected {target.service}")

    if realize_delay:
        phase_ms = dict(result.wall_ms)
    else:
        phase_ms = simulated_phase_ms(n_regions, l, m, n_t, per_gate_delay_ms)

    report = PhaseReport(
        params=params.security_level.value,
        n_regions=n_regions,
        l=l,
        m=m,
        n_t=n_t,
        engine=engine_obj.tag,
        comparison_units=units["comparison"],
        validation_units=units["validation"],
        addxor_units=units["addxor"],
        comparison_ms=phase_ms["comparison"],
        validation_ms=phase_ms["validation"],
        addxor_ms=phase_ms["addxor"],
        wall_comparison_ms=result.wall_ms["comparison"],
        wall_validation_ms=result.wall_ms["validation"],
        wall_addxor_ms=result.wall_ms["addxor"],
        encrypt_ms=stopwatch.lap_ms("encrypt"),
        decrypt_ms=stopwatch.lap_ms("decrypt"),
        result=value,
    )
    logger.info(
        "%s N=%d l=%d m=%d n_t=%d: %d units, %.1f ms",
        report.params,
        n_regions,
        l,
        m,
        n_t,
        report.total_units,
        report.total_ms,
    )
    return report


def run_sweep(config: BenchConfig) -> list[PhaseReport]:
    """One report per (security, N, l, m, n_t) tuple, in that nesting order."""
    reports = []
    results: dict[tuple, int] = {}
    for security, n_regions, l, m, n_t in itertools.product(  # noqa: E741
        config.security, config.n_regions, config.lengths, config.service_bits, config.threads
    ):
        reports.append(
            run_case(
                security,
                n_regions,
                l,
                m,
                n_t,
                engine=config.engine,
                per_gate_delay_ms=config.per_gate_delay_ms,
                realize_delay=config.realize_delay,
                seed=config.seed,
            )
        )
        key = (security, n_regions, l, m)
        first = results.setdefault(key, reports[-1].result)
        if reports[-1].result != first:
            logger.error("Result for %s changed from %d to %d at n_t=%d", key, first, reports[-1].result, n_t)
            raise BenchmarkMismatchError(f"result for {key} differs across thread counts")
    return reports


def reports_to_frame(reports: Iterable[PhaseReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports], columns=list(CSV_COLUMNS))


def phase_table(
    seed: Optional[int] = None,
    n_t: int = 6,
    per_gate_delay_ms: float = DEFAULT_GATE_DELAY_MS,
    engine: str = "clear",
) -> pd.DataFrame:
    """
    Per-phase costs at N = m = 9 for l in {13, 16} at both security levels,
    next to the measured reference totals.
    """
    rows = []
    for l in (13, 16):  # noqa: E741
        for level in (SecurityLevel.SEC80, SecurityLevel.SEC128):
            report = run_case(level, 9, l, 9, n_t, engine=engine, per_gate_delay_ms=per_gate_delay_ms, seed=seed)
            row = report.to_row()
            row["encrypt_ms"] = round(report.encrypt_ms, 3)
            row["decrypt_ms"] = round(report.decrypt_ms, 3)
            row["comparison_share"] = round(report.comparison_units / report.total_units, 3)
            reference = REFERENCE_TOTAL_S[(level, l)]
            row["reference_ms"] = reference * 1000
            row["model_ratio"] = round(report.total_ms / (reference * 1000), 3)
            rows.append(row)
    return pd.DataFrame(rows)


def format_size(nbytes: int) -> str:
    return f"{nbytes} B ({nbytes / 1024:.1f} KiB, {nbytes / 1000:.1f} kB)"


def size_report(n_regions: int = 9, m: int = 9, lengths: Sequence[int] = (13, 16)) -> pd.DataFrame:
    """Serialized sizes of every artifact the client sends or receives."""
    rows = []
    for level in (SecurityLevel.SEC80, SecurityLevel.SEC128):
        params = TlweParams.for_level(level)
        items = [
            ("sample", None, params.sample_nbytes),
            ("sheet", None, sheet_nbytes(n_regions, m, params)),
            ("response", None, response_nbytes(m, params)),
        ]
        for l in lengths:  # noqa: E741
            items.append(("coordinate", l, word_nbytes(l, params)))
            items.append(("query", l, query_nbytes(FixedPointFormat.for_length(l), params)))
        for item, l, nbytes in items:  # noqa: E741
            rows.append(
                {
                    "params": level.value,
                    "item": item,
                    "l": l,
                    "bytes": nbytes,
                    "KiB": round(nbytes / 1024, 2),
                    "kB": round(nbytes / 1000, 2),
                    "size": format_size(nbytes),
                }
            )
    return pd.DataFrame(rows)


# -- configuration files --------------------------------------------------------


def parse_int_list(text: str) -> list[int]:
    """'1,5,9', '4..28:4' (inclusive) or a mix of both."""
    values: list[int] = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        if ".." in part:
            bounds, _, step = part.partition(":")
            lo, hi = (int(v) for v in bounds.split("..", 1))
            values.extend(range(lo, hi + 1, int(step) if step else 1))
        else:
            values.append(int(part))
    return values


_LIST_KEYS = {"N": "n_regions", "L": "lengths", "M": "service_bits", "THREADS": "threads"}


def load_bench_config(path: Union[str, Path], **overrides) -> BenchConfig:
    """
    Read a ``key=value`` bench file (SECURITY, N, L, M, THREADS, ENGINE,
    PER_GATE_DELAY_MS, REALIZE_DELAY, SEED); keyword overrides win.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Bench config not found: {path}")
    raw = {k.upper(): v for k, v in dotenv_values(path).items() if v is not None}
    fields: dict = {}
    try:
        for key, name in _LIST_KEYS.items():
            if key in raw:
                fields[name] = parse_int_list(raw[key])
        if "SECURITY" in raw:
            fields["security"] = [f"sec{v}" for v in parse_int_list(raw["SECURITY"])]
        if "ENGINE" in raw:
            fields["engine"] = raw["ENGINE"]
        if "PER_GATE_DELAY_MS" in raw:
            fields["per_gate_delay_ms"] = float(raw["PER_GATE_DELAY_MS"])
        if "REALIZE_DELAY" in raw:
            fields["realize_delay"] = raw["REALIZE_DELAY"].strip().lower() in ("1", "true", "yes")
        if "SEED" in raw:
            fields["seed"] = int(raw["SEED"])
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return BenchConfig(**fields)
    except ValueError as e:
        raise ParameterError(f"invalid bench config {path}: {e}") from e


def plot_sweep(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    """Total time against N, one line per (params, l, m, n_t)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key, group in frame.groupby(["params", "l", "m", "n_t"]):
        params, l, m, n_t = key  # noqa: E741
        group = group.sort_values("N")
        ax.plot(group["N"], group["total_ms"] / 1000, marker="o", label=f"{params} l={l} m={m} n_t={n_t}")
    ax.set_xlabel("Number of bounding boxes N")
    ax.set_ylabel("Time (s)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    logger.info("Plot written to %s", path)
