"""End-to-end checks of the dtrans command line tool."""

import csv
import json
import os
import subprocess
from pathlib import Path

import jsonschema
import pytest

BIN = os.environ.get("DTRANS_BIN", str(Path(__file__).resolve().parents[2] / "build" / "tools" / "dtrans"))
SCHEMAS = Path(__file__).resolve().parents[2] / "schemas"

SMALL = {
    "cost": ["--n", "3", "--p", "0.2,0.3,0.5", "--q", "0.5,0.3,0.2"],
    "couple": ["--n", "3", "--N", "5,7"],
    "schrodinger": ["--N", "4,6,8", "--seeds", "6", "--regularity-pairs", "2000"],
    "paths": ["--seeds", "4", "--particles", "6", "--grid", "64"],
    "interpolate": ["--atoms", "30", "--t-grid", "17"],
    "entropy": ["--n", "3", "--samples", "400", "--t-grid", "9"],
    "gaps": ["--n-grid", "64,256", "--replicas", "30"],
}

COLUMNS = {
    "cost": {"cost.csv": ["n", "cost"]},
    "couple": {"couple.csv": ["N", "i", "j", "mass"]},
    "schrodinger": {
        "schrodinger.csv": ["n", "N", "lambda", "seed", "mode", "w2_sq", "w2_sq_baseline", "w2_sq_sinkhorn",
                            "matching", "optimal_pair_mass"]
    },
    "paths": {"paths.csv": ["lambda", "seed", "S", "path_distance"], "paths_dump.csv": None},
    "interpolate": {"interpolate.csv": ["t", "cost"]},
    "entropy": {"entropy.csv": ["t", "curve_a", "curve_b"]},
    "gaps": {"gaps.csv": ["n", "replicas", "mean_cost", "term1", "term2", "quadrature_bound"]},
}


def dtrans(*args, env=None):
    full = dict(os.environ)
    full.update(env or {})
    return subprocess.run([BIN, *args], capture_output=True, text=True, env=full, timeout=600)


def run_kind(kind, out, *extra, env=None):
    res = dtrans(kind, *SMALL[kind], *extra, "--out", str(out), "--format", "both", env=env)
    assert res.returncode == 0, res.stderr
    return json.loads((out / f"{kind}.json").read_text())


def test_cost_example():
    res = dtrans("cost", "--n", "2", "--p", "0.5,0.5", "--q", "0.25,0.75")
    assert res.returncode == 0
    assert res.stdout.strip() == "0.1438410"


@pytest.mark.parametrize("kind", sorted(SMALL))
def test_payload_matches_schema_and_csv_columns(kind, tmp_path):
    doc = run_kind(kind, tmp_path)
    schema = json.loads((SCHEMAS / f"{kind}.schema.json").read_text())
    jsonschema.Draft202012Validator(schema).validate(doc)
    assert doc["kind"] == kind
    assert doc["config"]["kind"] == kind
    for name, header in COLUMNS[kind].items():
        with open(tmp_path / name, newline="") as f:
            rows = list(csv.reader(f))
        assert len(rows) > 1
        if header is not None:
            assert rows[0] == header
        else:
            assert rows[0][:2] == ["particle", "t"]
        assert all(len(r) == len(rows[0]) for r in rows)


@pytest.mark.parametrize("kind", sorted(SMALL))
def test_payload_is_identical_across_thread_counts(kind, tmp_path):
    one = run_kind(kind, tmp_path / "one", env={"DTRANS_THREADS": "1"})
    four = run_kind(kind, tmp_path / "four", env={"DTRANS_THREADS": "4"})
    again = run_kind(kind, tmp_path / "again", env={"DTRANS_THREADS": "4"})
    raw = [(tmp_path / d / f"{kind}.json").read_bytes() for d in ("one", "four", "again")]
    assert raw[0] == raw[1] == raw[2]
    assert one == four == again


def flatten(x):
    if isinstance(x, dict):
        for v in x.values():
            yield from flatten(v)
    elif isinstance(x, list):
        for v in x:
            yield from flatten(v)
    elif isinstance(x, float):
        yield x


@pytest.mark.parametrize("kind", ["schrodinger", "couple"])
def test_scalar_kernels_agree_with_vector_kernels(kind, tmp_path):
    vec = run_kind(kind, tmp_path / "vec")
    ref = run_kind(kind, tmp_path / "ref", env={"DTRANS_SIMD": "scalar"})
    a, b = list(flatten(vec["payload"])), list(flatten(ref["payload"]))
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x == pytest.approx(y, rel=1e-9, abs=1e-12)


def test_schrodinger_example(tmp_path):
    res = dtrans("schrodinger", "--n", "2", "--generator", "power:0.5", "--N", "4,6,8,10", "--seeds", "20",
                 "--lambda", "auto", "--seed", "7", "--out", str(tmp_path))
    assert res.returncode == 0, res.stderr
    payload = json.loads((tmp_path / "schrodinger.json").read_text())["payload"]
    medians = [s["median_w2_sq"] for s in payload["summary"]]
    baselines = [s["median_w2_sq_baseline"] for s in payload["summary"]]
    assert all(m < b for m, b in zip(medians, baselines))
    assert payload["spearman"] < 0
    assert medians[-1] < medians[0]
    assert payload["verdicts"] == {"below_baseline": True, "decreasing": True}
    assert payload["lambda_policy"] == "auto"
    assert payload["regularity"]["alpha"] == pytest.approx(0.5, rel=1e-4)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\nkind = gaps\nn_grid = 64\nreplicas = 5\nmodel = exponential:2\nreplicas = 7\n")
    res = dtrans("gaps", "--config", str(cfg), "--replicas", "9", "--out", str(tmp_path / "o"))
    assert res.returncode == 0, res.stderr
    doc = json.loads((tmp_path / "o" / "gaps.json").read_text())
    assert doc["config"]["replicas"] == 9
    assert doc["config"]["model"] == "exponential:2"
    assert doc["payload"]["rows"][0]["replicas"] == 9


def test_validate_reports_lambda_schedule():
    res = dtrans("validate", "--kind", "schrodinger", "--N", "4,6", "--regularity-pairs", "2000")
    assert res.returncode == 0, res.stderr
    assert "alpha=" in res.stdout
    assert "N=4 lambda=" in res.stdout and "N=6 lambda=" in res.stdout
    assert res.stdout.strip().endswith("ok")


@pytest.mark.parametrize(
    "args,code",
    [
        (["validate", "--kind", "schrodinger", "--generator", "affine:1,1", "--lambda", "auto",
          "--regularity-pairs", "500"], 2),
        (["schrodinger", "--generator", "affine:1,1", "--N", "4", "--seeds", "1", "--regularity-pairs", "500"], 3),
        (["validate", "--kind", "schrodinger", "--N", "-4"], 2),
        (["schrodinger", "--N", "-4"], 2),
        (["schrodinger", "--N", "17"], 2),
        (["couple", "--generator", "wobbly:3"], 2),
        (["cost", "--n", "2", "--p", "0.5,0.5"], 2),
        (["gaps", "--model", "cauchy"], 2),
        (["teleport"], 2),
        (["cost", "--bogus", "1"], 2),
    ],
)
def test_exit_codes(args, code):
    res = dtrans(*args)
    assert res.returncode == code, res.stdout + res.stderr
    assert res.stderr.strip()


def test_unwritable_output_is_a_validation_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    res = dtrans("cost", "--n", "2", "--p", "0.5,0.5", "--q", "0.25,0.75", "--out", str(blocker / "sub"))
    assert res.returncode == 2


def test_version():
    res = dtrans("--version")
    assert res.returncode == 0
    assert res.stdout.strip()
