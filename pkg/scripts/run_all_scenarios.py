#!/usr/bin/env python3
"""Run every attack scenario at its defaults and print a verdict table.

Useful as a one-shot smoke run of the whole laboratory. Trial counts are
modest by default; pass --trials to raise them uniformly, or --out-dir to
keep the canonical report files.

    python3 scripts/run_all_scenarios.py --trials 200 --out-dir reports/
"""
import argparse
import os

from qsiglab.attacks import SCENARIOS, Scenario, canonical_report_json, regime_check, run_scenario

# cheap statistical scenarios can afford more trials than full sessions
_BASE_TRIALS = {
    "honest_arbitrated": 100,
    "eve_pauli_tamper": 200,
    "bob_pauli_forgery": 200,
    "wrong_key_binding": 100,
    "honest_truesig": 200,
    "truesig_forgery": 200,
    "truesig_random_substitution": 200,
    "mac_forgery": 5000,
    "qotp_mixing": 20,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=None, help="override every scenario's trial count")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=None, help="also write canonical reports here")
    args = parser.parse_args()

    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)

    width = max(len(name) for name in SCENARIOS)
    print(f"{'scenario':<{width}} {'trials':>7} {'accept':>8} {'regime':>7}  wall")
    failures = 0
    for name in SCENARIOS:
        trials = args.trials or _BASE_TRIALS[name]
        report = run_scenario(Scenario(name, {}, trials, args.seed))
        ok, _ = regime_check(report)
        failures += not ok
        print(
            f"{name:<{width}} {report.trials:>7} {report.accept_rate:>8.4f} "
            f"{'PASS' if ok else 'FAIL':>7}  {report.wall_time:.2f}s"
        )
        if args.out_dir:
            path = os.path.join(args.out_dir, f"{name}_seed{args.seed}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(canonical_report_json(report) + "\n")
    if failures:
        print(f"{failures} scenario(s) out of regime")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
