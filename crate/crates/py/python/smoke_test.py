"""Smoke test for the discord_merge extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python crates/py/python/smoke_test.py`.
"""

import math

import discord_merge as dm


def close(a, b, tol=1e-6):
    return abs(a - b) <= tol


def main():
    bell = dm.bell()
    assert bell.dims == [2, 2]
    assert close(bell.entropy(), 0.0, 1e-12)
    assert close(bell.partial_trace([0]).entropy(), 1.0, 1e-12)
    assert close(dm.mutual_information(bell), 2.0, 1e-12)
    assert close(dm.merge_cost(bell), -1.0, 1e-12)

    d = dm.discord(bell)
    assert close(d["discord"], 1.0), d
    assert d["converged"]
    ledger = dm.merge_markup(bell, d["best_measurement"])
    assert close(ledger["markup"], 1.0)
    assert close(ledger["cost_after"], 0.0)

    p = 0.5
    werner = dm.werner(p)
    classical = 0.5 * ((1 + p) * math.log2(1 + p) + (1 - p) * math.log2(1 - p))
    assert close(dm.discord(werner)["classical_corr"], classical)

    report = dm.local_purity_rate(bell)
    assert close(report["kappa"], 1.0)
    assert report["regularization_caveat"] is False

    ghz = dm.DensityMatrix(
        [[0.5 if r in (0, 7) and c in (0, 7) else 0.0 for c in range(8)] for r in range(8)],
        dims=[2, 2, 2],
    )
    assert close(dm.check_ssa(ghz), 1.0, 1e-9)

    rho = dm.random_state([2, 2], seed=7)
    again = dm.DensityMatrix.from_json(rho.to_json())
    assert again.to_lists() == rho.to_lists()
    m = dm.Measurement.projective_qubit(0.3, 1.1)
    assert m.num_outcomes == 2 and m.kind == "projective"
    assert dm.merge_markup(rho, m)["markup"] >= dm.discord(rho)["discord"] - 1e-7

    zero, _ = dm.is_zero_discord(dm.DensityMatrix([[0.5, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0.5]], dims=[2, 2]))
    assert zero

    try:
        dm.DensityMatrix([[0.6, 0.0], [0.0, 0.6]])
    except dm.DiscordMergeError as e:
        assert str(e).startswith("TraceNotOne"), e
    else:
        raise AssertionError("invalid trace accepted")

    print("discord_merge smoke test passed")


if __name__ == "__main__":
    main()
