"""
Loading and validation of region tables.

A region table is a UTF-8 CSV with the header ``city,lat1,lat2,long1,long2,service``;
each row is a half-open bounding box [lat1, lat2) x [long1, long2) and the service
value served for it. Loading derives the circuit dimensions N and m.
"""

from __future__ import annotations

import logging
import random
from pathlib import Path
from typing import Optional, Sequence, Union

import pandas as pd
from faker import Faker
from pydantic import ValidationError

from .circuits import EncodedRegion, ServiceCiphertext, ZeroSampleSheet, preprocess_services
from .codec import CipherWord, encode_fixed, trivial_word
from .errors import DatasetError, EncodingRangeError
from .gate_engine import GateEngine
from .models.fixed_point import FixedPointFormat
from .models.params import TlweParams
from .models.region import DatasetConfig, RegionRecord

logger = logging.getLogger(__name__)

COLUMNS = ("city", "lat1", "lat2", "long1", "long2", "service")

Box = tuple[int, int, int, int]
EncodedBox = tuple[CipherWord, CipherWord, CipherWord, CipherWord]


def encoded_box(record: RegionRecord, fmt: FixedPointFormat) -> Box:
    """Signed fixed-point integers (x1, x2, y1, y2) of a record's edges."""
    return tuple(
        encode_fixed(v, fmt).signed for v in (record.lat1, record.lat2, record.lon1, record.lon2)
    )


def _parse_row(row: dict, line: int, fmt: FixedPointFormat) -> RegionRecord:
    try:
        record = RegionRecord(
            name=row["city"].strip(),
            lat1=float(row["lat1"]),
            lat2=float(row["lat2"]),
            lon1=float(row["long1"]),
            lon2=float(row["long2"]),
            service=int(row["service"]),
        )
    except (ValueError, ValidationError) as e:
        raise DatasetError(f"invalid row {dict(row)}: {e}", line=line) from e
    try:
        x1, x2, y1, y2 = encoded_box(record, fmt)
    except EncodingRangeError as e:
        raise DatasetError(f"{record.name}: {e}", line=line) from e
    if x1 >= x2 or y1 >= y2:
        logger.warning("Rounding collapses the box of %s", record.name)
        raise DatasetError(
            f"{record.name}: box is empty after rounding to {fmt.frac_bits} fractional bits",
            line=line,
        )
    return record


def required_service_bits(records: Sequence[RegionRecord]) -> int:
    return max([r.service.bit_length() for r in records] + [1])


def load_dataset(
    path: Union[str, Path],
    fmt: Optional[FixedPointFormat] = None,
    m: Optional[int] = None,
) -> tuple[list[RegionRecord], DatasetConfig]:
    """
    Load a region table.

    Args:
        path: Path to the CSV file
        fmt: Coordinate format used to check that boxes survive rounding
        m: Optional service bit length; defaults to the bit length of the largest service

    Returns:
        The records in file order and the derived DatasetConfig

    Raises:
        FileNotFoundError: If the file does not exist
        DatasetError: On malformed rows, range violations, inverted or empty boxes,
            or an m too small for the largest service
    """
    fmt = fmt or FixedPointFormat()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")

    try:
        frame = pd.read_csv(
            path, dtype=str, encoding="utf-8", keep_default_na=False, skipinitialspace=True
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DatasetError(f"cannot parse {path}: {e}") from e

    columns = tuple(c.strip() for c in frame.columns)
    if columns != COLUMNS:
        raise DatasetError(f"expected header {','.join(COLUMNS)}, got {','.join(columns)}", line=1)
    frame.columns = list(COLUMNS)

    records = [
        _parse_row(row, line, fmt)
        for line, row in enumerate(frame.to_dict(orient="records"), start=2)
    ]

    required = required_service_bits(records)
    if m is None:
        m = required
    elif m < required:
        raise DatasetError(f"m={m} is too small, the largest service needs {required} bits")

    config = DatasetConfig(n_regions=len(records), m=m, format=fmt)
    logger.info("Loaded %d regions from %s (m=%d, l=%d)", len(records), path, m, fmt.l)
    return records, config


def _overlaps(a: Box, b: Box) -> bool:
    return a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]


def validate_disjoint(
    records: Sequence[RegionRecord], fmt: Optional[FixedPointFormat] = None
) -> list[tuple[int, int]]:
    """Pairs (i, j), i < j, whose encoded half-open boxes intersect with positive area."""
    fmt = fmt or FixedPointFormat()
    boxes = [encoded_box(r, fmt) for r in records]
    overlapping = [
        (i, j)
        for i in range(len(records))
        for j in range(i + 1, len(records))
        if _overlaps(boxes[i], boxes[j])
    ]
    for i, j in overlapping:
        logger.warning("Regions %s and %s overlap", records[i].name, records[j].name)
    return overlapping


def encode_boxes(
    records: Sequence[RegionRecord], fmt: FixedPointFormat, engine: GateEngine
) -> list[EncodedBox]:
    """Edges of every record as trivially encrypted words."""
    return [
        tuple(
            trivial_word(encode_fixed(v, fmt), engine)
            for v in (r.lat1, r.lat2, r.lon1, r.lon2)
        )
        for r in records
    ]


def attach_services(
    boxes: Sequence[EncodedBox], services: Sequence[ServiceCiphertext]
) -> list[EncodedRegion]:
    if len(boxes) != len(services):
        raise DatasetError(f"{len(boxes)} boxes but {len(services)} services")
    return [
        EncodedRegion(x1=x1, x2=x2, y1=y1, y2=y2, service=service, region_id=i)
        for i, ((x1, x2, y1, y2), service) in enumerate(zip(boxes, services))
    ]


def encode_regions(
    records: Sequence[RegionRecord],
    fmt: FixedPointFormat,
    engine: GateEngine,
    sheet: ZeroSampleSheet,
    m: int,
    params: TlweParams,
) -> list[EncodedRegion]:
    """Encode boxes as trivial words and services through the client's zero-sample sheet."""
    services = preprocess_services([r.service for r in records], sheet, m, engine, params)
    return attach_services(encode_boxes(records, fmt, engine), services)


def synthetic_regions(
    n_regions: int, m: int, seed: Optional[int] = None, per_row: int = 8
) -> list[RegionRecord]:
    """
    Disjoint 2x2 degree boxes on a 3 degree grid, with random services below 2^m.

    Edges are whole degrees, so boxes survive any format with at least 8 integer bits.
    """
    fake = Faker("ko_KR")
    fake.seed_instance(seed)
    rng = random.Random(seed)
    records = []
    for i in range(n_regions):
        row, col = divmod(i, per_row)
        lat1 = -40 + 3 * row
        lon1 = -40 + 3 * col
        records.append(
            RegionRecord(
                name=fake.city(),
                lat1=lat1,
                lat2=lat1 + 2,
                lon1=lon1,
                lon2=lon1 + 2,
                service=rng.randrange(1, 1 << m) if m > 1 else 1,
            )
        )
    return records
