import json

import mpmath
import pandas as pd
import pytest

from auxfn import MethodChoice, aux_g
from config import Config
from exporter import ReportExporter, format_value
from integrals import two_electron_integral
from precision import PrecisionContext, to_mpf
from tables import (
    TABLES,
    GoldenRow,
    agreement_digits,
    get_table,
    is_match,
    parse_expected,
    required_digits,
)


# ---------------------------------------------------------------------------
# 参照表
# ---------------------------------------------------------------------------


def test_table_sizes():
    assert {table_id: len(rows) for table_id, rows in TABLES.items()} == {
        1: 23, 2: 15, 3: 10, 4: 9, 5: 2, 6: 11, 7: 10,
    }
    with pytest.raises(ValueError):
        get_table(8)


def test_rows_build_valid_inputs():
    for table_id, rows in TABLES.items():
        for row in rows:
            if row.kind == "aux":
                assert row.aux_params().shape > 0
            else:
                assert row.spec().kind == row.kind
            assert row.label == f"表{table_id}-{row.index}"


def test_parse_expected():
    assert parse_expected("-1.15343 41695 E-07") == "-1.1534341695e-07"


def test_agreement_digits():
    ctx = PrecisionContext(working_digits=50, target_digits=25)
    row = get_table(1)[0]
    with ctx.workdps():
        expected = row.expected_value(ctx)
        assert agreement_digits(expected, row.expected, ctx) == 50
        assert agreement_digits(expected * (1 + mpmath.mpf("3e-21")), row.expected, ctx) == 20
        assert agreement_digits(expected * 2, row.expected, ctx) == 0
        assert is_match(row, expected, ctx)
        assert is_match(row, expected * (1 + mpmath.mpf("1e-26")), ctx)
        assert not is_match(row, expected * (1 + mpmath.mpf("3e-21")), ctx)
    assert required_digits(row, ctx) == 25


def test_required_digits_per_table():
    ctx = PrecisionContext(working_digits=50, target_digits=25)
    assert {required_digits(row, ctx) for row in TABLES[1]} == {25}
    assert {required_digits(row, ctx) for table_id in range(2, 8) for row in TABLES[table_id]} == {20}
    # 目標桁数が低ければそちらに合わせる
    assert required_digits(TABLES[1][0], PrecisionContext(working_digits=30, target_digits=15)) == 15


def test_required_digits_short_printed_value():
    ctx = PrecisionContext(working_digits=50, target_digits=25)
    row = GoldenRow(1, 0, "aux", TABLES[1][0].params, "-1.1534 E-07", 25)
    assert row.printed_digits == 5
    assert required_digits(row, ctx) == 5 - Config.MATCH_SLACK_DIGITS
    assert TABLES[1][0].printed_digits == 36


def test_table_n2_column_is_sign_flipped():
    # 印刷値 1 は (μ+ν)^{-1}
    with mpmath.workdps(30):
        assert to_mpf(TABLES[1][0].aux_params().N2) == -1
        assert to_mpf(TABLES[1][-1].aux_params().N2) == -100
        assert to_mpf(TABLES[2][0].aux_params().N2) == mpmath.mpf("-2.3")


# ---------------------------------------------------------------------------
# 出力
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "value, digits, text",
    [
        ("1.25", 2, "1.2E+00"),
        ("1.75", 2, "1.8E+00"),
        ("-0.000123456", 3, "-1.23E-04"),
        ("0.999999", 3, "1.00E+00"),
        ("0", 3, "0.00E+00"),
        ("12345", 1, "1E+04"),
    ],
)
def test_format_value_rounds_half_even(value, digits, text):
    with mpmath.workdps(30):
        assert format_value(mpmath.mpf(value), digits) == text


def test_format_value_rejects_non_finite():
    with pytest.raises(ValueError):
        format_value(mpmath.inf, 5)
    with pytest.raises(ValueError):
        format_value(1, 0)


def test_export_csv_and_json(tmp_path):
    exporter = ReportExporter(tmp_path)
    rows = [{"row": 1, "value": "1.0E+00"}, {"row": 2, "value": "2.0E+00"}]
    metadata = {"method": "recurrence", "version": "0.1.0"}

    csv_path = exporter.export(rows, metadata, "csv", "result.csv")
    assert csv_path == tmp_path / "result.csv"
    frame = pd.read_csv(csv_path, dtype=str)
    assert list(frame.columns) == ["meta_method", "meta_version", "row", "value"]
    assert list(frame["value"]) == ["1.0E+00", "2.0E+00"]

    json_path = exporter.export(rows, metadata, "json", tmp_path / "sub" / "result.json")
    data = json.loads(json_path.read_text(encoding="utf-8"))
    assert data["metadata"] == metadata
    assert data["rows"] == rows

    with pytest.raises(ValueError):
        exporter.export(rows, metadata, "xml")


# ---------------------------------------------------------------------------
# 参照値の再現（既定精度）
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("method", ["recurrence", "auto"])
@pytest.mark.parametrize("row", [TABLES[1][0], TABLES[1][1], TABLES[1][5]], ids=lambda row: row.label)
def test_table1_rows_with_exact_sums(row, method):
    ctx = PrecisionContext(working_digits=50, target_digits=25)
    outcome = aux_g(row.aux_params(), MethodChoice(method), ctx)
    assert outcome.converged
    assert is_match(row, outcome.value, ctx)
    with ctx.workdps():
        assert agreement_digits(outcome.value, row.expected, ctx) >= 25


@pytest.mark.slow
@pytest.mark.parametrize("row", TABLES[1], ids=lambda row: row.label)
def test_table1_recurrence(row):
    ctx = PrecisionContext.from_config()
    outcome = aux_g(row.aux_params(), MethodChoice("recurrence"), ctx)
    assert is_match(row, outcome.value, ctx)


@pytest.mark.slow
@pytest.mark.parametrize("row", TABLES[2], ids=lambda row: row.label)
def test_table2_auto(row):
    ctx = PrecisionContext.from_config()
    outcome = aux_g(row.aux_params(), MethodChoice("auto"), ctx)
    assert is_match(row, outcome.value, ctx)


@pytest.mark.slow
@pytest.mark.parametrize(
    "row",
    [row for table_id in (3, 4, 5, 6, 7) for row in TABLES[table_id]],
    ids=lambda row: row.label,
)
def test_integral_tables_auto(row):
    ctx = PrecisionContext.from_config()
    outcome = two_electron_integral(row.spec(), MethodChoice("auto"), ctx)
    assert is_match(row, outcome.value, ctx)
