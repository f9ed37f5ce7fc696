"""Bundled reference inputs: profiles used in worked examples and the
published share tables the estimator is expected to reproduce."""

from __future__ import annotations

import json
from importlib import resources

from ..prefs import IntProfile, Profile
from ..rules import ScoringRule, as_fraction, make_rule


def _load(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath(name).read_text())


def borda_m3_two_type() -> Profile:
    """Two-type m=3 profile where Borda is manipulable by the runner-up."""
    return Profile.from_dict(_load("borda_m3_two_type.json"))


def borda_m4_case_b() -> Profile:
    """m=4 Borda profile whose witness needs a case-(b) split."""
    return Profile.from_dict(_load("borda_m4_case_b.json"))


def close_race_m3_finite() -> tuple[IntProfile, ScoringRule]:
    """21-voter profile whose limit shares pass the inequalities while the
    finite electorate is not manipulable."""
    data = _load("close_race_m3_finite.json")
    return IntProfile(data["m"], tuple(data["counts"])), make_rule(data["weights"])


def expected_shares() -> dict:
    """Published percentages with sample sizes and tolerances, keyed m3/m4/m5."""
    return _load("expected_shares.json")
