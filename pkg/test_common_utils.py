#!/usr/bin/env python3
"""
Tests for configuration helpers, number formatting and UTC provenance
"""
from datetime import datetime
from fractions import Fraction

import numpy as np
import pytest
import pytz
import simplejson

from common_utils import (
    VERSION, ConfigError, CrossCheckError, DomainError, GhzMetroError, NormalizationError,
    SingularPointError, SizeLimitError, check_size, dense_limit, dumps_json, format_number,
    fraction_str, get_int_env, get_utc_isoformat, get_utc_now, parse_fraction, provenance,
    rng_algorithm, to_jsonable,
)


def test_utc_now_is_aware():
    now = get_utc_now()
    assert now.tzinfo is not None
    assert now.utcoffset().total_seconds() == 0


def test_utc_isoformat_round_trips():
    stamp = get_utc_isoformat()
    parsed = datetime.fromisoformat(stamp)
    assert parsed.tzinfo is not None
    assert parsed.microsecond == 0
    assert abs((datetime.now(pytz.UTC) - parsed).total_seconds()) < 60


def test_provenance_header():
    header = provenance('ghzmetro qfi --n 4 --k 2', seed=7)
    assert header['version'] == VERSION
    assert header['seed'] == 7
    assert 'timestamp' in header
    assert 'timestamp' not in provenance('ghzmetro qfi', timestamp=False)


def test_exit_codes():
    assert issubclass(NormalizationError, DomainError)
    assert issubclass(DomainError, ValueError)
    assert issubclass(ConfigError, ValueError)
    codes = {cls: cls.exit_code for cls in (DomainError, NormalizationError, ConfigError,
                                             SizeLimitError, CrossCheckError, SingularPointError)}
    assert codes == {DomainError: 2, NormalizationError: 2, ConfigError: 2,
                     SizeLimitError: 3, CrossCheckError: 4, SingularPointError: 4}
    assert all(issubclass(cls, GhzMetroError) for cls in codes)


def test_int_env(monkeypatch):
    monkeypatch.delenv('GHZMETRO_DENSE_LIMIT', raising=False)
    assert dense_limit() == 12
    monkeypatch.setenv('GHZMETRO_DENSE_LIMIT', ' 9 ')
    assert dense_limit() == 9
    monkeypatch.setenv('GHZMETRO_DENSE_LIMIT', '1')
    with pytest.raises(ConfigError, match='FATAL'):
        dense_limit()
    monkeypatch.setenv('GHZMETRO_TEST_VALUE', 'many')
    with pytest.raises(ConfigError):
        get_int_env('GHZMETRO_TEST_VALUE', 3)


def test_rng_setting(monkeypatch):
    monkeypatch.delenv('GHZMETRO_RNG', raising=False)
    assert rng_algorithm() == 'philox'
    monkeypatch.setenv('GHZMETRO_RNG', 'PCG64')
    assert rng_algorithm() == 'pcg64'


def test_check_size():
    check_size(12, 12, 'Dense matrices')
    with pytest.raises(SizeLimitError, match='n <= 12'):
        check_size(13, 12, 'Dense matrices')


def test_fraction_parsing_and_printing():
    assert parse_fraction('1/4') == Fraction(1, 4)
    assert parse_fraction(' 3 ') == 3
    with pytest.raises(DomainError):
        parse_fraction('1/0')
    with pytest.raises(DomainError):
        parse_fraction('quarter')
    assert fraction_str(Fraction(224, 29)) == '224/29'
    assert fraction_str(Fraction(6, 3)) == '2'


def test_format_number():
    assert format_number(Fraction(32, 11), exact=True) == '32/11'
    assert format_number(Fraction(1, 2)) == '0.5'
    assert format_number(0.1) == '0.10000000000000001'
    assert format_number(True, exact=True) == 'True'
    assert format_number('PPT') == 'PPT'


def test_json_output():
    payload = {'f_q': Fraction(32, 11), 'n': np.int64(4), 'pairs': (Fraction(1, 2), 0)}
    assert to_jsonable(payload, exact=True) == {'f_q': '32/11', 'n': 4, 'pairs': ['1/2', 0]}
    text = dumps_json(payload)
    assert simplejson.loads(text)['f_q'] == pytest.approx(32 / 11)
    assert text.index('"f_q"') < text.index('"n"') < text.index('"pairs"')


if __name__ == "__main__":
    pytest.main([__file__, '-v'])
