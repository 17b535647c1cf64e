from pathlib import Path

import pytest

from homforge.failure_taxonomy import InputFormatError, PreconditionError
from homforge.profile import SUITE_DEFAULTS, default_profile, load_profile

REPO_PROFILE = Path(__file__).resolve().parents[1] / "config" / "selfcheck.yaml"


def _write_test_profile(path, body: list[str]):
    path.write_text("\n".join(["version: 1", "suites:", *body]) + "\n", encoding="utf-8")
    return path


def test_repo_profile_matches_builtin_defaults():
    profile = load_profile(REPO_PROFILE)
    assert list(profile.suites) == list(SUITE_DEFAULTS)
    assert profile.suite("pullout").instances == 1000
    assert profile.suite("oracles").extra_instances == 300
    assert profile.suite("witness").n == 24


def test_missing_profile_falls_back_to_defaults(tmp_path):
    profile = load_profile(tmp_path / "absent.yaml")
    assert profile.suites == default_profile().suites


def test_profile_overrides_and_disables(tmp_path):
    path = _write_test_profile(
        tmp_path / "selfcheck.yaml",
        ["  pullout:", "    instances: 5", "  oracles:", "    enabled: false"],
    )
    profile = load_profile(path)
    assert profile.suite("pullout").instances == 5
    assert profile.suite("pullout").seed == SUITE_DEFAULTS["pullout"].seed
    assert "oracles" not in profile.enabled_suites()
    assert profile.enabled_suites("oracles") == ["oracles"]


def test_profile_rejects_unknown_suites_and_bad_values(tmp_path):
    unknown = _write_test_profile(tmp_path / "unknown.yaml", ["  planar:", "    n: 3"])
    with pytest.raises(InputFormatError):
        load_profile(unknown)
    negative = _write_test_profile(tmp_path / "negative.yaml", ["  witness:", "    seed: -1"])
    with pytest.raises(InputFormatError):
        load_profile(negative)
    broken = tmp_path / "broken.yaml"
    broken.write_text("suites: [unclosed\n", encoding="utf-8")
    with pytest.raises(InputFormatError):
        load_profile(broken)


def test_unknown_suite_filter():
    with pytest.raises(PreconditionError) as excinfo:
        default_profile().enabled_suites("planar")
    assert excinfo.value.code == "PRECONDITION_SUITE"
