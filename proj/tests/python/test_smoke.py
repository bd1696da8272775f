import json
import math

import pytest

import hetpol


def test_kernel_first_returns_1d():
    k = hetpol.build_kernel(1, 8)
    assert k.b[1] == pytest.approx(0.5)
    assert k.b[2] == pytest.approx(0.125)
    assert k.b[3] == pytest.approx(1.0 / 16.0)


def test_alpha_three_dimensions():
    assert hetpol.build_kernel(3, 100).alpha == pytest.approx(0.71777, abs=1e-4)


def test_tables_match_enumeration():
    t = hetpol.partition_tables(0.8, 0.1, 0.5, 1, 10, 7)
    ref = hetpol.brute_force_log_z(0.8, 0.1, 0.5, 1, 10, 7)
    assert t.log_z[10] == pytest.approx(ref, rel=1e-10)


def test_lambda_zero_is_exactly_zero():
    t = hetpol.partition_tables(0.0, 0.3, 0.5, 2, 50, 1)
    assert all(v == 0.0 for v in t.log_z)


def test_free_energy_deterministic_across_workers():
    a = hetpol.free_energy(1.0, 0.0, 1.0, 1, 200, 20, 11, workers=1)
    b = hetpol.free_energy(1.0, 0.0, 1.0, 1, 200, 20, 11, workers=3)
    assert a.per_replica == b.per_replica


def test_endpoint_law_normalized():
    law = hetpol.endpoint_law_1d(1.0, 0.0, 1.0, 40, 3)
    assert math.fsum(law) == pytest.approx(1.0, abs=1e-12)


def test_sample_endpoints_shape_and_parity():
    ends = hetpol.sample_endpoints(1.0, 0.5, 0.5, 2, 20, 100, 5)
    assert len(ends) == 100
    assert all(len(e) == 2 and all(c % 2 == 0 for c in e) for e in ends)


def test_classify_below_bound_is_localized():
    h = hetpol.bound_localized(1.0, 1.0, 1) - 0.5
    assert hetpol.classify(1.0, h, 1.0, 1, 400, 20, 9) == "Localized"


def test_verify_passes():
    assert all(ok for _, ok, _ in hetpol.verify())


def test_run_cli(tmp_path):
    rc, _ = hetpol.run_cli(["kernel", "--d", "2", "--n-max", "50", "--output", str(tmp_path)])
    assert rc == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "kernel"


def test_run_cli_config_error():
    rc, message = hetpol.run_cli(["free-energy", "--lamda", "1"])
    assert rc == 2
    assert message
