"""
ベンチマーク表モジュール

補助関数と二中心積分の参照値を10進文字列のまま保持し、
計算値との一致桁数を判定する。

表 1, 2: ^{P1}G^{0,q}_{N2 N3 N4}(p1, p2, p3)（35桁）
表 3, 4: STO のクーロン積分・ハイブリッド積分（35桁）
表 5-7: NSTO のクーロン積分・ハイブリッド積分（25桁）
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import mpmath

from auxfn import AuxParams
from config import Config
from integrals import Orbital, TwoElectronSpec
from precision import PrecisionContext, default_context, to_mpf

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GoldenRow:
    """参照値つきの1行"""

    table_id: int
    index: int
    kind: str  # "aux", "coulomb", "hybrid"
    params: Tuple[str, ...]
    expected: str
    required_digits: int
    series_limit: Optional[int] = None
    footnotes: str = "a"

    @property
    def label(self) -> str:
        return f"表{self.table_id}-{self.index}"

    def aux_params(self) -> AuxParams:
        """
        表 1, 2 の行: (N2, N3, N4, q, p1, p2, p3)

        N2 の列は (μ+ν) の指数の符号を反転して載せている
        （図1の G^{0,100}_{-100,100,100} が表1の (100, 100, 100, 100) 行）。
        """
        if self.kind != "aux":
            raise ValueError(f"{self.label} は補助関数の行ではありません")
        N2, N3, N4, q, p1, p2, p3 = self.params
        return AuxParams(0, int(q), _negated(N2), N3, N4, p1, p2, p3, variant=1, kind="P")

    @property
    def printed_digits(self) -> int:
        """参照値として印刷されている有効桁数"""
        mantissa = parse_expected(self.expected).lower().split("e")[0].lstrip("+-")
        return len(mantissa.replace(".", "").lstrip("0"))

    def spec(self) -> TwoElectronSpec:
        """表 3-7 の行: n, l, m, ζ を "a/a'" 形式で持つ"""
        if self.kind == "aux":
            raise ValueError(f"{self.label} は積分の行ではありません")
        n1, l1, m1, z1, n2, l2, m2, z2, R = self.params
        return TwoElectronSpec(
            pair1=_orbitals(n1, l1, m1, z1),
            pair2=_orbitals(n2, l2, m2, z2),
            R=R,
            kind=self.kind,
        )

    def expected_value(self, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
        ctx = ctx or default_context()
        with ctx.workdps():
            return to_mpf(parse_expected(self.expected))

    @property
    def has_cross_check(self) -> bool:
        """適応積分・漸化式・級数の3つで一致が確認されている行"""
        return all(mark in self.footnotes for mark in ("a", "b", "c"))


def _negated(text: str) -> str:
    return text[1:] if text.startswith("-") else f"-{text}"


def _orbitals(n: str, l: str, m: str, zeta: str) -> Tuple[Orbital, Orbital]:
    ns, ls, ms, zs = n.split("/"), l.split("/"), m.split("/"), zeta.split("/")
    return tuple(Orbital(ns[i], int(ls[i]), int(ms[i]), zs[i]) for i in range(2))


def parse_expected(text: str) -> str:
    """表記 "1.23 456 E-00" を mpmath が読める "1.23456e-00" に整える"""
    return text.replace(" ", "").replace("E", "e")


# (N2, N3, N4, q, p1, p2, p3, Ns, 参照値, 脚注)
# (17, 12, 12, q=16) の行は (μ+ν)^{-17}·P[12, p1(μ+ν)] が μ=1, ν=-1 の角で積分できないため含めない
_TABLE_1 = [
    ("1", "1", "3", "1", "2", "12", "1.5", None, "-1.15343 41695 52208 62207 84929 64825 58325 E-07", "a"),
    ("1", "3", "1", "1", "2", "12", "1.5", None, "-7.84235 20645 07762 77321 86752 70231 02223 E-06", "a"),
    ("2", "3", "1", "1", "2", "12", "1.5", None, "-5.84021 41543 38575 37468 78357 87991 82838 E-05", "a"),
    ("2", "1", "3", "3", "15", "20", "12", None, "-3.98124 60701 87560 42411 25094 99407 21556 E-05", "a"),
    ("4", "3", "5", "4", "5", "4", "1", None, "1.013266 52428 99228 68829 33708 47926 62535 E-01", "a"),
    ("4", "5", "8", "4", "0.8", "20", "1.4", None, "4.60128 84384 24297 02627 05703 72641 48936 E-17", "a"),
    ("6", "5", "6", "6", "1.8", "10", "1", 90, "3.89450 66837 96534 91806 96567 64124 65077 E-06", "abc"),
    ("6", "5", "7", "6", "1.8", "10", "1", None, "2.85306 66419 35908 70824 66940 03248 55651 E-7", "a"),
    ("4", "7", "4", "9", "15", "20", "12", 500, "-1.27394 18984 52996 23835 63731 40103 73040 E-01", "abc"),
    ("3", "5", "3", "4", "5", "4", "1", None, "1.43255 70363 69554 53413 90257 62737 65448 E-00", "ab"),
    ("6", "5", "6", "4", "0.8", "20", "1.4", 50, "7.33615 66598 73843 17340 87048 30849 34519 E-13", "abc"),
    ("6", "4", "6", "4", "0.8", "20", "14", 50, "9.31873 24120 75432 18797 86983 49531 60558 E-08", "abc"),
    ("8", "10", "8", "8", "0.07", "6", "0.6", 50, "4.32621 78828 52319 83727 88650 07840 04716 E-13", "abc"),
    ("10", "10", "10", "10", "0.03", "0.8", "0.08", 50, "4.30438 16369 16630 84455 32073 83756 19706 E-03", "abc"),
    ("20", "25", "20", "25", "0.6", "15", "1.05", 50, "-1.38252 33430 90551 19101 89740 33091 84838 E-17", "ac"),
    ("20", "25", "20", "25", "60", "15", "1.05", None, "-1.3097 30696 86664 04941 60077 87137 77693 E+15", "a"),
    ("40", "65", "40", "30", "600", "15", "0.15", None, "6.17374 75959 36901 75370 43063 63073 13455 E+70", "a"),
    ("65", "76", "65", "66", "1.2", "24", "9.6", 80, "4.41492 02430 13616 87153 47681 60265 57629 E-33", "ac"),
    ("65", "76", "65", "66", "120", "24", "9.6", None, "7.71744 47789 00375 89175 90437 82707 02772 E-56", "a"),
    ("86", "86", "86", "86", "0.9", "32", "22.4", 60, "2.38289 43664 90418 64191 74601 04584 83540 E-71", "ac"),
    ("86", "86", "86", "86", "90", "32", "22.4", 60, "3.04609 07864 62693 92828 68038 48138 07134 E+56", "a"),
    ("100", "100", "100", "100", "0.2", "12", "9.6", 60, "3.03896 54964 16960 07216 15049 58398 40396 E-67", "ac"),
    ("100", "100", "100", "100", "2", "12", "9.6", 250, "5.42087 65177 37610 22365 38502 04626 00693 E+22", "ac"),
]

# (N2, N3, N4, q, p1, p2, p3, 参照値)
_TABLE_2 = [
    ("2.3", "1.3", "3.3", "3", "15", "20", "12", "-7.20013 47001 36267 29748 91419 81660 53601 E-05"),
    ("3.6", "2.6", "5.2", "4", "5", "4", "1", "4.58185 80831 03141 07643 56804 34806 01483 E-02"),
    ("4.4", "4.5", "7.5", "4", "0.8", "20", "1.4", "2.45970 38207 36991 51320 48793 29529 96287 E-16"),
    ("6.1", "5.2", "6.1", "6", "1.8", "10", "1", "3.97200 64539 26573 03355 69307 66129 03949 E-16"),
    ("6.1", "5.2", "7.2", "6", "1.8", "10", "1", "2.26354 74052 81424 11025 57714 62836 32456 E-07"),
    ("4.3", "7.5", "4.3", "9", "15", "20", "12", "-2.53202 24148 68428 67810 74097 64810 77155 E-01"),
    ("3.6", "5.4", "3.6", "4", "5", "4", "1", "2.09487 78789 24276 09769 30480 69359 86104 E-00"),
    ("6.4", "5.5", "6.4", "4", "0.8", "20", "1.4", "4.38868 09534 05029 05196 66580 91599 69140 E-13"),
    ("6.8", "6.1", "6.8", "4", "0.8", "20", "1.4", "3.60052 93840 38476 02238 16430 79107 73234 E-08"),
    ("8.5", "10.5", "8.5", "8", "0.07", "6", "0.6", "7.32260 34423 08107 83761 50586 43132 18776 E-14"),
    ("8.5", "10.5", "8.2", "8", "0.07", "6", "0.6", "2.70098 66718 68939 17249 81782 73504 00438 E-33"),
    ("10.3", "10.3", "10.3", "10", "0.03", "0.8", "0.08", "1.94223 81401 94429 27706 51922 22895 90000 E-03"),
    ("20.5", "25.4", "20.5", "25", "0.06", "15", "10.5", "-3.48986 70793 88706 99022 28310 61846 41734 E-38"),
    ("86.3", "86.3", "86.3", "86", "0.9", "32", "22.4", "1.02533 51847 51593 55071 76532 03711 21500 E-71"),
    ("86.3", "86.3", "86.3", "86", "90", "32", "22.4", "3.85809 53502 12316 95256 87588 28303 19649 E-56"),
]

# (n, l, m, ζ, n2, l2, m2, ζ2, R, 参照値, 脚注)
_TABLE_3 = [
    ("1/1", "0/0", "0/0", "5.2/5.2", "2/2", "0/0", "0/0", "4.1/4.1", "0.2", "1.82289 25537 50662 68097 06249 99472 18105", "abc"),
    ("1/2", "0/1", "0/0", "5.2/3.1", "2/3", "0/2", "0/0", "4.1/2.5", "0.2", "-2.36064 30209 20063 71569 41492 47834 51963 E-02", "ab"),
    ("2/1", "1/0", "1/0", "4.0/5.2", "2/2", "1/0", "1/0", "3.1/4.1", "0.2", "2.03568 85382 24252 94658 39569 97218 82382 E-01", "ab"),
    ("1/1", "0/0", "0/0", "5.2/5.2", "2/2", "1/1", "-1/-1", "3.1/3.1", "8.5", "1.17392 89654 55745 79366 72606 57106 36806 E-01", "abc"),
    ("2/2", "1/1", "0/0", "3.1/3.1", "4/4", "2/2", "2/2", "0.5/0.5", "8.5", "8.75284 77629 56292 02391 86570 66188 70938 E-02", "ab"),
    ("3/3", "2/2", "-2/-2", "1.8/1.8", "2/2", "0/0", "0/0", "4.1/4.1", "8.5", "1.15668 97493 85519 57315 49276 08453 94326 E-01", "abc"),
    ("4/2", "3/1", "0/0", "3.5/3.1", "4/4", "2/3", "2/2", "0.5/3.0", "2.5", "-7.36773 13766 53888 45151 51235 09992 20224 E-05", "ab"),
    ("1/1", "0/0", "0/0", "0.99/0.99", "1/1", "0/0", "0/0", "1.01/1.01", "0.01", "6.24916 67058 30088 14983 45518 38351 29936 E-01", "abc"),
    ("1/1", "0/0", "0/0", "5.2/5.2", "2/2", "0/0", "0/0", "4.1/4.1", "100", "1.00000 00000 00000 00000 00000 00000 00000 E-02", "abc"),
    ("4/1", "3/0", "0/0", "0.8/0.9", "3/1", "2/0", "0/0", "1.1/1.2", "100", "1.32578 24709 36295 45612 88059 75651 53922 E-10", "ab"),
]

_TABLE_4 = [
    ("1/1", "0/0", "0/0", "5.2/5.2", "1/2", "0/0", "0/0", "5.2/4.1", "0.2", "1.82283 32730 08003 82547 87867 31094 97571", "abc"),
    ("1/2", "0/1", "0/0", "5.2/3.1", "2/3", "1/2", "1/1", "4.0/3.0", "0.2", "-6.86828 29183 60912 21475 49388 55052 76624 E-02", "ab"),
    ("2/1", "0/0", "0/0", "1.0/1.5", "1/2", "0/0", "0/0", "1.0/1.5", "0.5", "3.52830 59069 42601 45585 21523 21676 29343 E-01", "abc"),
    ("2/2", "1/1", "0/1", "3.1/4.0", "2/3", "1/1", "0/1", "3.1/1.5", "2.5", "5.09491 95301 70106 78339 51218 85823 60340 E-02", "ab"),
    ("4/2", "3/1", "0/0", "3.5/3.1", "1/2", "0/0", "0/0", "5.2/4.1", "2.5", "1.45527 74805 70430 59391 69198 03337 30776 E-04", "ab"),
    ("2/2", "1/1", "1/1", "4.0/4.0", "1/3", "0/2", "0/0", "5.2/5.2", "8.5", "6.52569 93988 77690 25939 54456 64202 47822 E-07", "ab"),
    ("2/2", "1/1", "0/0", "3.1/3.1", "4/3", "3/2", "0/0", "3.5/2.5", "8.5", "1.08708 58144 55211 74102 89705 11940 46919 E-05", "ab"),
    ("2/2", "1/1", "0/0", "5.2/5.2", "2/2", "0/1", "0/0", "5.2/4.1", "0.3", "8.99999 85103 06214 17316 79580 94484 15397 E-01", "ab"),
    ("10/1", "2/0", "0/0", "0.2/5.2", "4/3", "3/2", "1/1", "2.6/3.0", "8.5", "2.36533 58321 44220 60856 72486 90851 06350 E-20", "ab"),
]

# 一中心展開法の列は含めない
_TABLE_5 = [
    ("1.1/1.1", "0/0", "0/0", "5.2/5.2", "2.1/2.1", "0/0", "0/0", "4.1/4.1", "2.0", "4.99960 44305 09269 74512 47068 E-01", "a"),
    ("1.1/1.1", "0/0", "0/0", "5.2/5.2", "2.1/2.1", "0/0", "0/0", "4.1/4.1", "0.2", "1.74489 32510 67943 65295 27064 E-00", "a"),
]

_TABLE_6 = [
    ("1.1/1.1", "0/0", "0/0", "3.3/7.5", "2.1/2.1", "0/0", "0/0", "5.2/4.1", "2.0", "3.70777 93430 04351 88597 41401 E-01", "a"),
    ("1.1/1.1", "0/0", "0/0", "3.3/7.5", "2.1/2.1", "0/0", "0/0", "5.2/4.1", "0.2", "1.43116 03370 07045 41502 21987 E-00", "a"),
    ("1.5/2.5", "0/0", "0/0", "5.2/5.2", "2.2/1.3", "0/0", "0/0", "4.1/4.1", "2.0", "4.03973 39319 31391 43106 54998 E-01", "a"),
    ("1.5/2.5", "0/0", "0/0", "5.2/5.2", "2.2/1.3", "0/0", "0/0", "4.1/4.1", "0.2", "1.37950 96732 83485 29390 58534 E-00", "a"),
    ("3.3/1.2", "0/0", "0/0", "3.5/4.5", "1.3/3.5", "0/0", "0/0", "5.3/5.2", "2.0", "1.43069 98608 06165 34609 69226 E-01", "a"),
    ("1.3/2.2", "0/1", "0/0", "5.2/3.1", "2.1/3.3", "0/2", "0/0", "4.1/2.5", "0.2", "-2.20621 95808 46121 42004 26870 E-02", "a"),
    ("2.3/2.5", "0/1", "0/0", "5.2/3.1", "2.5/3.5", "0/2", "0/0", "4.1/2.5", "0.2", "-2.43223 06409 75118 67189 49036 E-02", "a"),
    ("2.2/1.4", "1/0", "1/0", "4.0/5.2", "2.4/2.2", "1/0", "1/0", "3.1/4.1", "0.2", "2.02231 33338 48645 17745 17104 E-01", "a"),
    ("1.7/1.7", "0/0", "0/0", "5.2/5.2", "2.5/2.5", "1/1", "-1/-1", "3.1/3.1", "8.5", "1.17291 23163 43926 46406 72110 E-01", "a"),
    ("2.6/2.4", "1/0", "1/0", "4.0/5.2", "1.4/1.2", "1/0", "1/0", "3.1/4.1", "0.2", "2.73167 34925 29429 58648 30570 E-01", "a"),
    ("3.1/3.1", "2/2", "-2/-2", "1.8/1.8", "2.3/2.5", "0/0", "0/0", "4.1/4.1", "8.5", "1.15128 95407 69354 45822 45832 E-01", "a"),
]

_TABLE_7 = [
    ("1.1/1.1", "0/0", "0/0", "3.3/7.5", "2.1/2.1", "0/0", "0/0", "5.2/4.1", "2.0", "3.34570 65033 29520 49016 78182 E-02", "a"),
    ("1.1/1.1", "0/0", "0/0", "3.3/7.5", "2.1/2.1", "0/0", "0/0", "5.2/4.1", "0.2", "1.42056 86050 09755 96650 10503 E-00", "a"),
    ("1.5/2.5", "0/0", "0/0", "5.2/5.2", "2.2/1.3", "0/0", "0/0", "4.1/4.1", "2.5", "5.82088 47419 91349 23796 94930 E-03", "a"),
    ("1.5/2.5", "0/0", "0/0", "5.2/5.2", "2.2/1.3", "0/0", "0/0", "4.1/4.1", "0.25", "1.31612 20582 17586 69403 48337 E-00", "a"),
    ("2.3/2.3", "1/1", "0/0", "3.1/4.0", "2.1/3.5", "0/1", "0/0", "3.1/1.5", "2.5", "3.98086 07407 55049 65876 23549 E-01", "a"),
    ("2.3/2.3", "1/1", "0/0", "3.1/4.0", "2.1/3.5", "0/1", "0/0", "3.1/1.5", "0.25", "9.62984 79396 02364 97003 91963 E-02", "a"),
    ("2.3/2.3", "1/1", "0/1", "3.1/4.0", "2.1/3.5", "1/1", "0/1", "3.1/1.5", "2.5", "5.46328 06938 93362 73357 23212 E-03", "a"),
    ("2.3/2.3", "1/1", "0/1", "3.1/4.0", "2.1/3.5", "1/1", "0/1", "3.1/1.5", "0.25", "1.16785 23072 08658 28310 17007 E-02", "a"),
    ("2.1/2.2", "1/1", "0/1", "3.1/4.0", "2.3/3.4", "1/1", "0/1", "3.1/1.5", "0.85", "1.19610 29417 94992 00041 70305 E-02", "a"),
    ("2.1/2.2", "1/1", "0/1", "3.1/4.0", "2.3/3.4", "1/1", "0/1", "3.1/1.5", "8.5", "6.21247 25221 86688 36073 21675 E-06", "a"),
]

TABLE_TITLES = {
    1: "補助関数 P1G^{0,q}（整数指数）",
    2: "補助関数 P1G^{0,q}（非整数指数）",
    3: "STO のクーロン積分",
    4: "STO のハイブリッド積分",
    5: "NSTO のクーロン積分（一中心展開との比較）",
    6: "NSTO のクーロン積分",
    7: "NSTO のハイブリッド積分",
}


def _build_tables() -> Dict[int, List[GoldenRow]]:
    tables: Dict[int, List[GoldenRow]] = {}
    tables[1] = [
        GoldenRow(1, i, "aux", row[:7], row[8], 25, row[7], row[9])
        for i, row in enumerate(_TABLE_1, start=1)
    ]
    tables[2] = [
        GoldenRow(2, i, "aux", row[:7], row[7], 20)
        for i, row in enumerate(_TABLE_2, start=1)
    ]
    for table_id, rows, kind, series_limit in (
        (3, _TABLE_3, "coulomb", 250),
        (4, _TABLE_4, "hybrid", 250),
        (5, _TABLE_5, "coulomb", None),
        (6, _TABLE_6, "coulomb", None),
        (7, _TABLE_7, "hybrid", None),
    ):
        tables[table_id] = [
            GoldenRow(table_id, i, kind, row[:9], row[9], 20, series_limit, row[10])
            for i, row in enumerate(rows, start=1)
        ]
    return tables


TABLES: Dict[int, List[GoldenRow]] = _build_tables()


def get_table(table_id: int) -> List[GoldenRow]:
    if table_id not in TABLES:
        raise ValueError(f"表番号は 1-7 です: {table_id}")
    return TABLES[table_id]


def agreement_digits(computed, expected, ctx: Optional[PrecisionContext] = None) -> int:
    """
    一致している有効桁数 floor(-log10(|計算値-参照値|/|参照値|))

    完全一致は作業桁数を返す。
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        computed = to_mpf(computed)
        expected = to_mpf(parse_expected(expected)) if isinstance(expected, str) else to_mpf(expected)
        difference = abs(computed - expected)
        if difference == 0:
            return ctx.working_digits
        scale = abs(expected) if expected != 0 else mpmath.mpf(1)
        relative = difference / scale
        return max(0, int(mpmath.floor(-mpmath.log10(relative))))


def required_digits(row: GoldenRow, ctx: PrecisionContext) -> int:
    """
    一致とみなす桁数

    表ごとの必要桁数（表1: 25、他: 20）と目標桁数の小さい方。
    参照値の印刷桁数がそれに足りない行だけ、末尾の丸め差を許して印刷桁数から差し引く。
    """
    digits = min(row.required_digits, ctx.target_digits)
    if row.printed_digits < digits:
        return row.printed_digits - Config.MATCH_SLACK_DIGITS
    return digits


def is_match(row: GoldenRow, computed, ctx: Optional[PrecisionContext] = None) -> bool:
    ctx = ctx or default_context()
    digits = agreement_digits(computed, row.expected, ctx)
    matched = digits >= required_digits(row, ctx)
    if not matched:
        logger.warning(f"{row.label}: 参照値との一致 {digits} 桁（必要 {required_digits(row, ctx)} 桁）")
    return matched
