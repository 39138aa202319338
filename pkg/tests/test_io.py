import numpy as np
import pytest

import spintomo.io as tio
import spintomo.reconstruct as rc
import spintomo.simulate as sim
import spintomo.spincore as sc


def test_density_matrix_round_trip(tmp_path):
    rho = sc.DensityMatrix.random(4, np.random.default_rng(0))
    path = tmp_path / "rho.json"
    tio.save_density_matrix(rho, path)
    back = tio.load_density_matrix(path)
    assert np.max(np.abs(back.matrix - rho.matrix)) <= 1e-15
    assert back.basis_labels == rho.basis_labels


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_single_records_round_trip(tmp_path, fmt):
    rho = sc.DensityMatrix.from_pure(sc.coherent_state(4, 1.0))
    rec = sim.run_experiment(sim.ExperimentConfig(rho, 500, seed=1))
    path = tmp_path / f"rec.{fmt}"
    if fmt == "csv":
        tio.write_records_csv(rec, path)
    else:
        tio.write_records_json(rec, path)
    back = tio.read_records(path)
    assert isinstance(back, sim.SingleRecords)
    assert back.two_s == rec.two_s
    assert np.array_equal(back.thetas, rec.thetas)
    assert np.array_equal(back.m, rec.m)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_multi_records_round_trip(tmp_path, fmt):
    rng = np.random.default_rng(2)
    states = [sc.DensityMatrix.random(2, rng), sc.DensityMatrix.random(3, rng)]
    rec = sim.run_product_experiment(states, 200, seed=0)
    path = tmp_path / f"rec.{fmt}"
    (tio.write_records_csv if fmt == "csv" else tio.write_records_json)(rec, path)
    back = tio.read_records(path)
    assert isinstance(back, sim.MultiRecords)
    assert tuple(back.two_s_list) == (1, 2)
    assert np.array_equal(back.m, rec.m)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_coupled_records_round_trip(tmp_path, fmt):
    rho = sc.symmetrize(sc.DensityMatrix.random(4, np.random.default_rng(3)), 2)
    rec = sim.run_coupled_experiment(rho, 200, seed=0, num_spins=2)
    path = tmp_path / f"rec.{fmt}"
    (tio.write_records_csv if fmt == "csv" else tio.write_records_json)(rec, path)
    back = tio.read_records(path)
    assert isinstance(back, sim.CoupledRecords)
    assert back.num_spins == 2
    assert np.array_equal(back.total_S, rec.total_S)
    assert np.array_equal(back.total_M, rec.total_M)


def test_malformed_csv_reports_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# mode=single two_s=2\ntheta,phi,m\n0.1,0.2,1.0\nx,y,z\n")
    with pytest.raises(tio.RecordFormatError) as err:
        tio.read_records(path)
    assert err.value.line == 4


def test_missing_metadata_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("theta,phi,m\n0.1,0.2,1.0\n")
    with pytest.raises(tio.RecordFormatError):
        tio.read_records(path)


def test_unknown_mode(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# mode=banana\nx\n")
    with pytest.raises(tio.RecordFormatError):
        tio.read_records(path)


def test_estimate_round_trip(tmp_path):
    rho = sc.thermal_state(2, 0.5)
    rec = sim.run_experiment(sim.ExperimentConfig(rho, 1000, seed=5))
    est = rc.mc_reconstruct_single(rec)
    path = tmp_path / "est.json"
    tio.write_estimate(est, path)
    import json
    data = json.loads(path.read_text())
    assert data["schema_version"] == tio.SCHEMA_VERSION
    back = tio.estimate_from_dict(data)
    assert np.max(np.abs(back.matrix - est.matrix)) <= 1e-12
    assert back.num_samples == est.num_samples


def test_diagonal_csv(tmp_path):
    rho = sc.thermal_state(2, 0.5)
    rec = sim.run_experiment(sim.ExperimentConfig(rho, 1000, seed=5))
    est = rc.mc_reconstruct_single(rec)
    path = tmp_path / "diag.csv"
    theory = np.diag(rho.matrix).real
    tio.write_diagonal_csv(est, path, theory)
    lines = path.read_text().splitlines()
    assert lines[0] == "index,label,value,std_error,theory"
    assert len(lines) == 1 + est.dim
