"""Scenario registry, deterministic reports, and regime checks."""
import json
import math
from pathlib import Path

import pytest

from qsiglab.attacks import (
    SCENARIOS,
    Report,
    Scenario,
    adversary_catalog,
    canonical_report_json,
    regime_check,
    run_scenario,
    three_sigma_bound,
)

SCHEMA = json.loads((Path(__file__).parent / "report_schema.json").read_text())


def _validate(instance, schema, path="$"):
    """Validator for the schema subset used by report_schema.json."""
    kind = schema.get("type")
    if kind == "object":
        assert isinstance(instance, dict), f"{path}: expected object"
        for key in schema.get("required", ()):
            assert key in instance, f"{path}: missing required key {key!r}"
        for key, sub in schema.get("properties", {}).items():
            if key in instance:
                _validate(instance[key], sub, f"{path}.{key}")
    elif kind == "array":
        assert isinstance(instance, list), f"{path}: expected array"
        if "items" in schema:
            for i, item in enumerate(instance):
                _validate(item, schema["items"], f"{path}[{i}]")
    elif kind == "integer":
        assert isinstance(instance, int) and not isinstance(instance, bool), f"{path}: expected integer"
    elif kind == "number":
        assert isinstance(instance, (int, float)) and not isinstance(instance, bool), f"{path}: expected number"
    elif kind == "string":
        assert isinstance(instance, str), f"{path}: expected string"
    if "enum" in schema:
        assert instance in schema["enum"], f"{path}: {instance!r} not in {schema['enum']}"


# ---------------------------------------------------------------------------
# registry


def test_catalog_covers_all_scenarios():
    catalog = adversary_catalog()
    assert set(catalog) == set(SCENARIOS)
    assert len(catalog) == 9
    for name, entry in catalog.items():
        assert entry["description"], name
        assert entry["key_access"], name
        assert isinstance(entry["defaults"], dict), name


def test_unknown_scenario_rejected():
    with pytest.raises(ValueError):
        run_scenario(Scenario("quantum_heist", {}, 10, 0))


def test_unknown_parameter_rejected():
    with pytest.raises(ValueError):
        run_scenario(Scenario("honest_arbitrated", {"gamma": 3}, 2, 0))


def test_zero_trials_rejected():
    with pytest.raises(ValueError):
        run_scenario(Scenario("mac_forgery", {}, 0, 0))


def test_bad_position_rejected():
    with pytest.raises(ValueError):
        run_scenario(Scenario("eve_pauli_tamper", {"position": "teleport"}, 1, 0))


# ---------------------------------------------------------------------------
# report structure


def _small(name, trials=3, seed=11, **params):
    return run_scenario(Scenario(name, params, trials, seed))


def test_report_bookkeeping():
    rep = _small("truesig_forgery", trials=4)
    assert rep.trials == 4
    assert len(rep.verdicts) == 4
    assert rep.accept_count == sum(rep.verdicts)
    assert rep.accept_rate == rep.accept_count / 4
    assert sum(rep.failure_stages.values()) == 4
    assert rep.wall_time >= 0.0


@pytest.mark.parametrize("name", ["honest_arbitrated", "mac_forgery", "truesig_forgery"])
def test_canonical_json_matches_schema(name):
    rep = _small(name, trials=3)
    _validate(json.loads(canonical_report_json(rep)), SCHEMA)


def test_canonical_json_excludes_wall_time():
    rep = _small("mac_forgery", trials=5)
    data = canonical_report_json(rep)
    assert "wall_time" not in data
    assert rep.wall_time > 0.0


def test_reports_are_byte_identical_across_runs():
    a = _small("truesig_forgery", trials=3, seed=21)
    b = _small("truesig_forgery", trials=3, seed=21)
    assert canonical_report_json(a) == canonical_report_json(b)
    assert a.verdicts == b.verdicts


def test_param_order_does_not_change_bytes():
    a = run_scenario(Scenario("honest_arbitrated", {"n": 2, "t": 4}, 2, 7))
    b = run_scenario(Scenario("honest_arbitrated", {"t": 4, "n": 2}, 2, 7))
    assert canonical_report_json(a) == canonical_report_json(b)


def test_different_seeds_differ():
    a = _small("honest_truesig", trials=3, seed=1)
    b = _small("honest_truesig", trials=3, seed=2)
    assert canonical_report_json(a) != canonical_report_json(b)


# ---------------------------------------------------------------------------
# bounds and regimes


def test_three_sigma_bound_formula():
    p0, n = 1 / 16, 400
    assert math.isclose(three_sigma_bound(p0, n), p0 + 3 * math.sqrt(p0 * (1 - p0) / n))


def test_honest_regimes_hold_on_small_runs():
    for name in ("honest_arbitrated", "honest_truesig", "truesig_forgery", "qotp_mixing"):
        ok, claim = regime_check(_small(name, trials=3))
        assert ok, (name, claim)
        assert claim


def test_adversary_regimes_hold_on_small_runs():
    for name, trials in (
        ("truesig_random_substitution", 10),
        ("mac_forgery", 50),
        ("eve_pauli_tamper", 20),
        ("bob_pauli_forgery", 20),
    ):
        report = _small(name, trials=trials)
        ok, claim = regime_check(report)
        assert ok, (name, report.accept_rate, claim)


def test_wrong_key_regime_both_modes():
    ref = _small("wrong_key_binding", trials=10, mode="referee")
    ok, claim = regime_check(ref)
    assert ok and "referee" in claim
    proto = _small("wrong_key_binding", trials=10, mode="protocol")
    ok, claim = regime_check(proto)
    assert ok and "protocol" in claim


def test_eve_stages_are_authentication_failures():
    report = _small("eve_pauli_tamper", trials=25, seed=33)
    assert report.accept_rate <= three_sigma_bound(2**-4, 25)
    assert set(report.failure_stages) <= {"none", "arb_auth_inner", "arb_auth_outer", "sig_check", "bob_final_auth"}


def test_substitution_fails_at_the_syndrome():
    report = _small("truesig_random_substitution", trials=12, seed=44)
    assert report.accept_rate == 0.0
    assert set(report.failure_stages) == {"step1"}
