import json
import subprocess
import sys

import numpy as np
from keyrate.paper_dists import activate, binaryze_werner, symmetric_distribution, werner_distribution
from keyrate.probdist import channel_from_document, distribution_from_document


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "keyrate.cli", *args],
        capture_output=True, text=True, cwd=cwd,
    )


def test_dist_werner_document(tmp_path):
    out = tmp_path / "w.json"
    res = run_cli("dist", "werner", "--p", "0.6", "--out", str(out))
    assert res.returncode == 0
    doc = json.loads(out.read_text())
    assert len(doc["probabilities"]) == 15
    assert "checksum 1" in res.stdout
    dist = distribution_from_document(doc)
    assert np.allclose(dist.probabilities, werner_distribution(0.6).probabilities, atol=1e-11)


def test_dist_activated_document(tmp_path):
    out = tmp_path / "a.json"
    res = run_cli("dist", "activated", "--p", "0.55", "--q", "0.2", "--out", str(out))
    assert res.returncode == 0
    assert len(json.loads(out.read_text())["probabilities"]) == 120


def test_dist_rejects_out_of_range():
    res = run_cli("dist", "werner", "--p", "1.2")
    assert res.returncode == 2
    assert "[0, 1]" in res.stderr


def test_dist_requires_family_parameters():
    res = run_cli("dist", "activated", "--p", "0.5")
    assert res.returncode == 2


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_cli("dist", "symmetric", "--q", "0.2", "--out", str(a))
    run_cli("dist", "symmetric", "--q", "0.2", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_binaryze_and_activate_pipeline(tmp_path):
    w, s, wb, act = (tmp_path / n for n in ("w.json", "s.json", "wb.json", "act.json"))
    assert run_cli("dist", "werner", "--p", "0.6", "--out", str(w)).returncode == 0
    assert run_cli("dist", "symmetric", "--q", "0.2", "--out", str(s)).returncode == 0
    assert run_cli("binaryze", str(w), "--out", str(wb)).returncode == 0
    assert run_cli("activate", str(w), str(s), "--out", str(act)).returncode == 0
    wb_dist = distribution_from_document(json.loads(wb.read_text()))
    assert np.allclose(
        wb_dist.probabilities,
        binaryze_werner(werner_distribution(0.6)).probabilities,
        atol=1e-11,
    )
    act_dist = distribution_from_document(json.loads(act.read_text()))
    lib = activate(werner_distribution(0.6), symmetric_distribution(0.2))
    assert act_dist.z_alphabet == lib.z_alphabet
    assert np.allclose(act_dist.probabilities, lib.probabilities, atol=1e-11)


def test_threshold_commands():
    res = run_cli("threshold", "werner")
    assert res.returncode == 0
    assert abs(float(res.stdout.strip()) - 0.6) < 1e-6
    res = run_cli("threshold", "symmetric")
    assert abs(float(res.stdout.strip()) - 0.2) < 1e-6
    res = run_cli("threshold", "activated", "--q", "0.2")
    assert abs(float(res.stdout.strip()) - 0.513) < 1e-3


def test_sweep_two_steps(tmp_path):
    out = tmp_path / "s.csv"
    res = run_cli(
        "sweep", "--family", "symmetric", "--from", "0.1", "--to", "0.3",
        "--steps", "2", "--out", str(out), "--no-plot",
    )
    assert res.returncode == 0
    rows = [l for l in out.read_text().splitlines() if l and not l.startswith("#")]
    assert rows[0] == "family,p,q,beta,bob_ratio,eve_rate,condition_ratio,distillable"
    assert len(rows) == 3  # header + 2 data rows
    assert not (tmp_path / "s.png").exists()


def test_sweep_werner_intrinsic_column(tmp_path):
    out = tmp_path / "w.csv"
    res = run_cli(
        "sweep", "--family", "werner", "--from", "0.5", "--to", "1.0",
        "--steps", "51", "--out", str(out), "--no-plot",
    )
    assert res.returncode == 0
    rows = [l.split(",") for l in out.read_text().splitlines() if l and not l.startswith("#")]
    header, data = rows[0], rows[1:]
    col = header.index("intrinsic_analytic")
    values = [float(r[col]) for r in data]
    assert values[0] == 0.0
    assert all(v > 0 for v in values[1:])


def test_sweep_activated_crossing(tmp_path):
    out = tmp_path / "a.csv"
    res = run_cli(
        "sweep", "--family", "activated", "--from", "0.5", "--to", "0.6",
        "--steps", "21", "--q", "0.2", "--out", str(out), "--no-plot",
    )
    assert res.returncode == 0
    rows = [l.split(",") for l in out.read_text().splitlines() if l and not l.startswith("#")]
    header, data = rows[0], rows[1:]
    pcol, rcol = header.index("p"), header.index("condition_ratio")
    crossings = [
        (float(a[pcol]), float(b[pcol]))
        for a, b in zip(data, data[1:])
        if (float(a[rcol]) - 1.0) * (float(b[rcol]) - 1.0) < 0
    ]
    assert len(crossings) == 1
    lo, hi = crossings[0]
    assert lo >= 0.510 and hi <= 0.515


def test_sweep_plot_rendered(tmp_path):
    out = tmp_path / "w.csv"
    res = run_cli(
        "sweep", "--family", "werner", "--from", "0.5", "--to", "0.8",
        "--steps", "4", "--out", str(out),
    )
    assert res.returncode == 0
    png = tmp_path / "w.png"
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_simulate_command_deterministic(tmp_path):
    wb = tmp_path / "wb.json"
    run_cli("dist", "werner-bin", "--p", "0.6", "--out", str(wb))
    a = run_cli("simulate", str(wb), "--block-size", "2", "--trials", "3000", "--seed", "5")
    b = run_cli("simulate", str(wb), "--block-size", "2", "--trials", "3000", "--seed", "5")
    assert a.returncode == 0
    assert a.stdout == b.stdout
    assert "bob_error_rate" in a.stdout


def test_intrinsic_command(tmp_path):
    doc = {
        "x_alphabet": ["0", "1"],
        "y_alphabet": ["0", "1"],
        "z_alphabet": ["za", "zb"],
        "probabilities": [
            {"x": "0", "y": "0", "z": "za", "p": 0.4},
            {"x": "1", "y": "1", "z": "zb", "p": 0.4},
            {"x": "0", "y": "1", "z": "za", "p": 0.1},
            {"x": "1", "y": "0", "z": "zb", "p": 0.1},
        ],
    }
    path = tmp_path / "d.json"
    path.write_text(json.dumps(doc))
    ch_path = tmp_path / "ch.json"
    a = run_cli("intrinsic", str(path), "--starts", "4", "--seed", "3", "--out", str(ch_path))
    b = run_cli("intrinsic", str(path), "--starts", "4", "--seed", "3")
    assert a.returncode == 0
    assert a.stdout.splitlines()[0] == b.stdout.splitlines()[0]
    ch = channel_from_document(json.loads(ch_path.read_text()))
    assert np.allclose(ch.matrix.sum(axis=1), 1.0, atol=1e-9)
    value = float(a.stdout.splitlines()[0].split()[1])
    assert -1e-9 <= value <= 1.0


def test_intrinsic_malformed_document(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"x_alphabet": ["0"]}')
    res = run_cli("intrinsic", str(path))
    assert res.returncode == 2
    assert "error" in res.stderr.lower()


def test_verify_quantum_default():
    res = run_cli("verify-quantum")
    assert res.returncode == 0
    assert "FAIL" not in res.stdout
    assert "OK" in res.stdout


def test_verify_quantum_werner_grid():
    res = run_cli("verify-quantum", "--family", "werner", "--grid", "0.4,0.5,0.6")
    assert res.returncode == 0
    lines = [l for l in res.stdout.splitlines() if l.startswith("PASS werner PPT")]
    assert [l.split("ppt=")[1] for l in lines] == ["True", "True", "False"]


def test_sweep_rejects_bad_spec(tmp_path):
    res = run_cli("sweep", "--family", "werner", "--from", "0.5", "--to", "0.9",
                  "--steps", "1", "--out", str(tmp_path / "x.csv"))
    assert res.returncode == 2
    res = run_cli("sweep", "--family", "werner", "--from", "0.9", "--to", "0.5",
                  "--steps", "5", "--out", str(tmp_path / "x.csv"))
    assert res.returncode == 2
