import logging
import os
import threading

import pytest

from locpir.cli import bench as bench_cli
from locpir.cli import client as client_cli
from locpir.cli import server as server_cli
from locpir.config import DEFAULT_DATASET, Config, configure_logging
from locpir.protocol.transport import LocPirTcpServer
from locpir.torus_core import SecretKey

BUSAN = ["--lat", "35.19", "--lon", "129.0"]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in list(os.environ):
        if name.startswith("LOCPIR_"):
            monkeypatch.delenv(name)
    monkeypatch.setenv("LOCPIR_SEED", "42")


def test_config_defaults():
    config = Config()
    assert (config.seed, config.threads, config.security, config.engine) == (42, 4, 80, "clear")
    assert config.frac_bits == 7
    assert config.dataset == DEFAULT_DATASET
    assert config.dataset.exists()


@pytest.mark.parametrize(
    "name, value",
    [
        ("LOCPIR_THREADS", "zero"),
        ("LOCPIR_THREADS", "0"),
        ("LOCPIR_SECURITY", "96"),
        ("LOCPIR_ENGINE", "gpu"),
        ("LOCPIR_LOG_LEVEL", "LOUD"),
        ("LOCPIR_FRAC_BITS", "-1"),
    ],
)
def test_config_rejects_bad_values(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValueError, match=name):
        Config()


def test_log_file(tmp_path):
    path = tmp_path / "locpir.log"
    configure_logging("DEBUG", str(path))
    logging.getLogger("locpir.test").debug("written to the file")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "locpir.test - DEBUG - written to the file" in path.read_text()
    configure_logging("WARNING")


def test_server_oneshot(capsys):
    assert server_cli.main(["--oneshot", *BUSAN]) == 33
    assert capsys.readouterr().out.strip() == "33"


def test_server_oneshot_with_the_oracle_engine(tmp_path):
    key = tmp_path / "client.key"
    client_cli.main(["--keyfile", str(key), "keygen"])
    args = ["--engine", "tlwe-oracle", "--insecure-oracle-key", str(key), "--threads", "2"]
    assert server_cli.main([*args, "--frac-bits", "4", "--oneshot", *BUSAN]) == 33


def test_oracle_engine_needs_a_key():
    with pytest.raises(ValueError, match="insecure-oracle-key"):
        server_cli.main(["--engine", "tlwe-oracle", "--oneshot", *BUSAN])


def test_oneshot_needs_a_position():
    with pytest.raises(ValueError):
        server_cli.main(["--oneshot"])


def test_keygen_and_preprocess(tmp_path):
    key = tmp_path / "client.key"
    assert client_cli.main(["--keyfile", str(key), "keygen", "--security", "128"]) == key
    assert SecretKey.load(key).n == 630

    key80 = tmp_path / "client80.key"
    client_cli.main(["keygen", "--out", str(key80)])
    sheet = tmp_path / "zerosheet.bin"
    out = client_cli.main(
        ["--keyfile", str(key80), "preprocess", "-N", "9", "--m", "9", "--engine", "tlwe-oracle", "--out", str(sheet)]
    )
    assert out == sheet
    assert sheet.stat().st_size == 175284


def test_client_query_over_tcp(tmp_path, make_server, capsys):
    key = tmp_path / "client.key"
    client_cli.main(["--keyfile", str(key), "keygen"])
    tcp = LocPirTcpServer(("127.0.0.1", 0), make_server(SecretKey.load(key)))
    threading.Thread(target=tcp.serve_forever, daemon=True).start()
    try:
        host, port = tcp.server_address[:2]
        value = client_cli.main(["--server", f"{host}:{port}", "--keyfile", str(key), *BUSAN])
    finally:
        tcp.shutdown()
        tcp.server_close()
    assert value == 33
    assert capsys.readouterr().out.strip() == "33"


def test_bench_sizes(tmp_path):
    out = tmp_path / "sizes.csv"
    frame = bench_cli.main(["--mode", "sizes", "--out", str(out)])
    assert len(frame) == 14
    assert out.read_text().splitlines()[0] == "params,item,l,bytes,KiB,kB,size"


def test_bench_sweep(capsys):
    frame = bench_cli.main(["--N", "1,2", "--l", "8", "--m", "2"])
    assert list(frame["N"]) == [1, 2]
    assert list(frame["total_ms"]) == [1 * (96 + 7) * 13.0, 2 * (96 + 7) * 13.0]
    assert "comparison_units" in capsys.readouterr().out


def test_bench_sweep_from_config_file(tmp_path):
    config = tmp_path / "bench.env"
    config.write_text("SECURITY=80,128\nN=1\nL=8\nM=1\nPER_GATE_DELAY_MS=2\n")
    out = tmp_path / "sweep" / "sweep.csv"
    frame = bench_cli.main(["--config", str(config), "--threads", "1,2", "--out", str(out)])
    assert list(frame["params"]) == ["sec80", "sec80", "sec128", "sec128"]
    assert list(frame["n_t"]) == [1, 2, 1, 2]
    assert out.exists()


def test_bench_phases():
    frame = bench_cli.main(["--mode", "phases"])
    assert sorted(frame["l"].unique()) == [13, 16]
    assert (frame["comparison_share"] >= 0.8).all()
