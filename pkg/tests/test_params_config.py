from __future__ import annotations

from fractions import Fraction

import pytest

from partineq.config import Config, default_config_text, load_config, parse_config
from partineq.errors import ConfigError, DomainError
from partineq.params import BoundParams, TABLE_WEIGHTS


def test_defaults_match_published_tables():
    even, odd = BoundParams.for_d(8), BoundParams.for_d(9)
    for p in (even, odd):
        assert p.c == Fraction("0.37501")
        assert p.epsilon == Fraction("0.11")
        assert p.epsilon2 == 1
        assert p.xi == Fraction("0.224")
        assert sum(p.weights) == 1
    assert even.delta == Fraction(1, 3) and odd.delta == Fraction(1, 80)
    assert even.K(3) == Fraction(1, 2) and even.K(8) == Fraction(394, 800)
    assert odd.K(2) == odd.K(3) == Fraction(1, 8) and odd.K(8) == Fraction(595, 800)
    assert even.epsilon1 == even.delta / 4


@pytest.mark.parametrize("field,value", [
    ("epsilon", "0.5"), ("epsilon2", "0.3"), ("delta", "0.5"), ("xi", "1"), ("c", "0.375"),
])
def test_range_checks(field, value):
    kwargs = dict(epsilon="0.11", epsilon2="1", delta="1/3", xi="0.224", c="0.37501",
                  weights=TABLE_WEIGHTS["even"][:7])
    kwargs[field] = value
    with pytest.raises(DomainError):
        BoundParams.build(**kwargs)


def test_weights_must_leave_positive_remainder():
    with pytest.raises(DomainError):
        BoundParams.build(epsilon="0.11", epsilon2="1", delta="1/3", xi="0.224", c="0.37501",
                          weights=["1/7"] * 7)


def test_floats_rejected():
    with pytest.raises(TypeError):
        BoundParams.build(epsilon=0.11, epsilon2="1", delta="1/3", xi="0.224", c="0.37501",
                          weights=TABLE_WEIGHTS["even"])


def test_fingerprint_changes_with_params():
    a = BoundParams.for_d(8)
    assert a.fingerprint() == BoundParams.for_d(10).fingerprint()
    assert a.fingerprint() != BoundParams.for_d(9).fingerprint()
    assert a.fingerprint() != a.with_precision(512).fingerprint()


def test_default_config_text_round_trips():
    cfg = parse_config(default_config_text())
    assert cfg.params_for(8) == Config().params_for(8)
    assert cfg.params_for(9) == Config().params_for(9)


def test_overrides_by_parity(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[run]\nprecision_bits = 128\nf_err_max = none\n\n"
        "[params.odd]\ndelta = 1/100\n"
    )
    cfg = load_config(path)
    assert cfg.f_err_max is None
    assert cfg.params_for(9).delta == Fraction(1, 100)
    assert cfg.params_for(8).delta == Fraction(1, 3)
    assert cfg.params_for(8).precision_bits == 128


@pytest.mark.parametrize("text,line", [
    ("[run]\nprecision_bits = 256\nbogus = 1\n", 3),
    ("[run]\n\nf_err_max = 0.1e\n", 3),
    ("[params]\nepsilon = 0.11\nweights = 1, 2\n", 3),
    ("[run]\nworker_count = many\n", 2),
    ("[nope]\n", 1),
    ("[params.even]\ndelta = 0.6\n", 1),
])
def test_errors_cite_lines(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_parse_error_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("[run]\nthis line has no separator\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")
