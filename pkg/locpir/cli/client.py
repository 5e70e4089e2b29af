"""
locpir-client: generate keys, prepare zero-sample sheets and run queries.
"""

import argparse
import logging
from pathlib import Path
from typing import Optional, Sequence

from ..config import Config, configure_logging
from ..models.params import TlweParams
from ..protocol.client import LocPirClient, client_engine, client_preprocess
from ..protocol.transport import TcpTransport
from ..torus_core import NoiseSampler, SecretKey, keygen

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Query a location-based PIR server")
    parser.add_argument("--server", "-s", default="127.0.0.1:7878", help="Server host:port")
    parser.add_argument("--keyfile", "-k", default="locpir.key", help="Secret key file")
    parser.add_argument("--lat", type=float, help="Latitude in degrees")
    parser.add_argument("--lon", type=float, help="Longitude in degrees")

    commands = parser.add_subparsers(dest="command")

    keygen_cmd = commands.add_parser("keygen", help="Generate a secret key file")
    keygen_cmd.add_argument("--security", type=int, choices=(80, 128), help="Security level")
    keygen_cmd.add_argument("--out", "-o", help="Key file to write (default: --keyfile)")

    preprocess_cmd = commands.add_parser("preprocess", help="Write a ZEROSHEET payload file")
    preprocess_cmd.add_argument("--n-regions", "-N", type=int, required=True, help="Number of regions N")
    preprocess_cmd.add_argument("--m", type=int, required=True, help="Service bit length m")
    preprocess_cmd.add_argument("--engine", choices=("clear", "tlwe-oracle"), help="Server engine")
    preprocess_cmd.add_argument("--out", "-o", default="zerosheet.bin", help="Output file")
    return parser


def run_keygen(args: argparse.Namespace, config: Config) -> Path:
    params = TlweParams.for_level(args.security or config.security)
    out = Path(args.out or args.keyfile)
    keygen(params, config.seed).save(out)
    return out


def run_preprocess(args: argparse.Namespace, config: Config) -> Path:
    sk = SecretKey.load(args.keyfile)
    sampler = NoiseSampler.for_params(sk.params, config.seed)
    engine = client_engine(args.engine or config.engine, sk, sampler)
    payload = client_preprocess(sk, sk.params, args.n_regions, args.m, engine, sampler)
    out = Path(args.out)
    out.write_bytes(payload)
    logger.info("Wrote %d zero samples (%d bytes) to %s", args.n_regions * args.m, len(payload), out)
    return out


def run_query(args: argparse.Namespace, config: Config) -> int:
    if args.lat is None or args.lon is None:
        raise ValueError("--lat and --lon are required for a query")
    sk = SecretKey.load(args.keyfile)
    with TcpTransport(args.server) as transport:
        client = LocPirClient(transport, sk, seed=config.seed)
        value = client.query(args.lat, args.lon)
    logger.info(
        "Query done (encrypt %.2f ms, decrypt %.3f ms)",
        client.timings["encrypt"],
        client.timings["decrypt"],
    )
    return value


def main(argv: Optional[Sequence[str]] = None):
    """Main entry point for the client."""
    args = build_parser().parse_args(argv)
    config = Config()
    configure_logging(config.log_level, config.log_file)

    try:
        if args.command == "keygen":
            return run_keygen(args, config)
        if args.command == "preprocess":
            return run_preprocess(args, config)
        value = run_query(args, config)
        print(value)
        return value

    except Exception as e:
        logger.error("Error in client: %s", str(e))
        raise


if __name__ == "__main__":
    main()
