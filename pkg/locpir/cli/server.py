"""
locpir-server: serve LocPIR queries over a region table.
"""

import argparse
import logging
from typing import Optional, Sequence

from ..config import Config, configure_logging
from ..dataset import load_dataset, validate_disjoint
from ..engines import create_engine
from ..models.fixed_point import FixedPointFormat
from ..models.params import TlweParams
from ..protocol.client import LocPirClient
from ..protocol.session import LocPirServer
from ..protocol.transport import LoopbackTransport, serve_tcp
from ..torus_core import NoiseSampler, SecretKey, keygen

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Serve location-based PIR queries")
    parser.add_argument("--dataset", "-d", help="Region table CSV (city,lat1,lat2,long1,long2,service)")
    parser.add_argument("--security", type=int, choices=(80, 128), help="Security level")
    parser.add_argument("--frac-bits", type=int, help="Fractional bits of the coordinate format")
    parser.add_argument("--int-bits", type=int, default=9, help="Integer bits, sign included")
    parser.add_argument("--m", type=int, help="Service bit length (default: derived from the table)")
    parser.add_argument("--engine", choices=("clear", "tlwe-oracle"), help="Gate engine")
    parser.add_argument(
        "--insecure-oracle-key",
        help="Client key file for the tlwe-oracle engine (demonstration only, NOT private)",
    )
    parser.add_argument("--listen", default="127.0.0.1:7878", help="host:port to listen on")
    parser.add_argument("--threads", type=int, help="Worker threads per query")
    parser.add_argument(
        "--oneshot",
        action="store_true",
        help="Run one in-process session for --lat/--lon and exit",
    )
    parser.add_argument("--lat", type=float, help="Latitude for --oneshot")
    parser.add_argument("--lon", type=float, help="Longitude for --oneshot")
    return parser


def build_server(args: argparse.Namespace, config: Config) -> tuple[LocPirServer, Optional[SecretKey]]:
    params = TlweParams.for_level(args.security or config.security)
    frac_bits = config.frac_bits if args.frac_bits is None else args.frac_bits
    fmt = FixedPointFormat(int_bits=args.int_bits, frac_bits=frac_bits)
    records, dataset = load_dataset(args.dataset or config.dataset, fmt, m=args.m)
    validate_disjoint(records, fmt)

    engine_tag = args.engine or config.engine
    oracle_key = None
    if engine_tag == "tlwe-oracle":
        if not args.insecure_oracle_key:
            raise ValueError("the tlwe-oracle engine requires --insecure-oracle-key")
        oracle_key = SecretKey.load(args.insecure_oracle_key, params)
        logger.warning("Demo mode: the server holds the client key and can decrypt everything")
    engine = create_engine(
        engine_tag, sk=oracle_key, sampler=NoiseSampler.for_params(params, config.seed)
    )
    server = LocPirServer(records, dataset, params, engine, workers=args.threads or config.threads)
    return server, oracle_key


def main(argv: Optional[Sequence[str]] = None):
    """Main entry point for the server."""
    args = build_parser().parse_args(argv)
    config = Config()
    configure_logging(config.log_level, config.log_file)

    try:
        server, oracle_key = build_server(args, config)

        if args.oneshot:
            if args.lat is None or args.lon is None:
                raise ValueError("--oneshot needs --lat and --lon")
            sk = oracle_key or keygen(server.params, config.seed)
            client = LocPirClient(LoopbackTransport(server), sk, seed=config.seed)
            value = client.query(args.lat, args.lon)
            logger.info("Oneshot query served: %d units", server.engine.counter.bootstrap_units)
            print(value)
            return value

        serve_tcp(server, args.listen)

    except Exception as e:
        logger.error("Error in server: %s", str(e))
        raise


if __name__ == "__main__":
    main()
