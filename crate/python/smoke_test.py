"""Smoke test for the ugm_map_py extension module.

Builds a small model, solves it with several LP relaxations, restores a
noisy synthetic image, and decodes a short LDPC code, asserting the
results agree with the exhaustive oracles exposed by the module.

Build the module first (the test also picks it up from target/release):

    cargo build -p ugm-map-py --release --features extension-module
"""

import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent
SO = ROOT / "target" / "release" / "libugm_map_py.so"
DEST = HERE / "ugm_map_py.so"

if SO.exists() and (not DEST.exists() or SO.stat().st_mtime > DEST.stat().st_mtime):
    shutil.copy2(SO, DEST)
sys.path.insert(0, str(HERE))

import ugm_map_py as ugm  # noqa: E402


def test_model_relaxations():
    # two overlapping triangles with a frustrated objective
    model = ugm.Model([[0, 1, 2], [1, 2, 3]], 4)
    for v in range(4):
        model.add_node_coeff(v, 1.0)
    model.add_edge_coeff([0, 1, 2], -2.5)
    model.add_edge_coeff([1, 2, 3], -2.5)

    optimum, optima = model.brute_force()
    exact_value, exact_bits = model.solve_exact()
    assert exact_value == optimum
    assert model.evaluate(exact_bits) == optimum
    assert any(bits == exact_bits for bits in optima)

    values = []
    for method in ("stdLP", "flLP", "runLP", "cliqueLP", "McliqueLP"):
        value, _, _ = model.solve_relaxation(method)
        values.append(value)
    values.append(optimum)
    for a, b in zip(values, values[1:]):
        assert a >= b - 1e-6, values

    text = model.export_lp("cliqueLP")
    assert text.startswith("\\ nodes 4")
    assert "Subject To" in text


def test_image_restoration():
    truth = ugm.BitImage.synthetic("CEN", 9, 9)
    noisy = truth.with_noise(0.1, seed=7)
    result = ugm.restore_image(noisy, 25.0, [-10.0, -20.0, -30.0, -40.0],
                               "cliqueLP", truth=truth)
    assert result["is_binary"]
    assert result["partial_recovery"] > 0.8
    ip = ugm.restore_image(noisy, 25.0, [-10.0, -20.0, -30.0, -40.0],
                           "IP", truth=truth)
    assert abs(result["value"] - ip["value"]) <= 1e-6

    round_trip = ugm.BitImage.from_pbm(truth.to_pbm())
    assert round_trip.pixels() == truth.pixels()


def test_ldpc_decoding():
    code = ugm.LdpcCode(9, 3, 2, seed=5)
    assert code.n == 9 and code.num_checks == 6
    assert code.is_codeword([False] * 9)

    observed = [False] * 9
    observed[4] = True  # single flipped bit
    for method in ("parLP", "cliqueLP", "IP"):
        report = code.decode(observed, method)
        assert report["decoded"] == [False] * 9, (method, report)
        assert report["partial_recovery"] == 1.0


def test_experiment_runner():
    csv, summary = ugm.run_experiment_text(
        "application = decode\n"
        "n = 9\nbeta = 3\ngamma = 2\n"
        "p = [0:0.05:0.1]\ntrials = 3\nseed = 1\n"
        "methods = parLP, cliqueLP\n"
    )
    assert csv.splitlines()[0] == (
        "n,beta,gamma,method,p,seed,lp_value,is_binary,partial_recovery,wall_time_s"
    )
    assert len(csv.splitlines()) == 1 + 2 * 3 * 3
    table = ugm.aggregate_csv(csv, "recovery")
    assert table.splitlines()[0] == "method,p,mean,stderr"


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"{name}: ok")
    print("smoke test passed")
