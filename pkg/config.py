"""設定管理モジュール"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        # validate() で報告する
        return default


class Config:
    """計算・出力の設定"""

    VERSION = "0.1.0"

    # パス設定
    BASE_DIR = Path(__file__).parent
    OUTPUT_DIR = Path(os.getenv("AUXINT_OUTPUT_DIR", str(BASE_DIR / "output")))

    # 精度設定（10進桁数）
    WORKING_DIGITS = _env_int("AUXINT_WORKING_DIGITS", 50)
    TARGET_DIGITS = _env_int("AUXINT_TARGET_DIGITS", 25)
    GUARD_DIGITS = 10  # working >= target + GUARD_DIGITS

    # 適応積分設定
    MAX_RECURSION = _env_int("AUXINT_MAX_RECURSION", 35)  # 分割の深さ上限
    MAX_SUBDIVISIONS = _env_int("AUXINT_MAX_SUBDIVISIONS", 4000)  # 分割回数の上限
    RULE_POINTS = _env_int("AUXINT_RULE_POINTS", 7)  # Gauss 7点 / Kronrod 15点

    # 級数・評価法設定
    SERIES_LIMIT = _env_int("AUXINT_SERIES_LIMIT", 250)
    METHOD = os.getenv("AUXINT_METHOD", "adaptive")
    METHODS = ("adaptive", "recurrence", "series", "auto")
    RECURRENCE_MAX_TERMS = 2000  # auto 選択時の漸化式展開の項数上限
    AUTO_P1_LIMIT = 10  # p1 がこれを超えると auto は数値積分を選ぶ

    # 表の照合
    MATCH_SLACK_DIGITS = 1

    # 収束スキャン（図1・図2）
    SCAN_FIG1_GRID = ("0.1", "0.2", "0.5", "1", "2", "5", "10", "20", "50")
    SCAN_FIG2_P1 = ("0.5", "2", "10", "30")
    SCAN_FIG2_NS_MAX = 120

    # ログ設定
    LOG_LEVEL = os.getenv("AUXINT_LOG_LEVEL", "WARNING")

    # CSV出力設定
    CSV_ENCODING = "utf-8"

    @classmethod
    def setup_directories(cls):
        """必要なディレクトリを作成"""
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    @classmethod
    def validate(cls):
        """設定の検証"""
        errors = []

        for name in (
            "AUXINT_WORKING_DIGITS",
            "AUXINT_TARGET_DIGITS",
            "AUXINT_MAX_RECURSION",
            "AUXINT_MAX_SUBDIVISIONS",
            "AUXINT_RULE_POINTS",
            "AUXINT_SERIES_LIMIT",
        ):
            value = os.getenv(name)
            if value and not value.strip().lstrip("-").isdigit():
                errors.append(f"{name} は整数で指定してください: {value}")

        if cls.WORKING_DIGITS < cls.TARGET_DIGITS + cls.GUARD_DIGITS:
            errors.append(
                f"作業桁数 {cls.WORKING_DIGITS} は目標桁数 {cls.TARGET_DIGITS} + "
                f"{cls.GUARD_DIGITS} 以上が必要です"
            )
        if cls.MAX_RECURSION < 1:
            errors.append(f"MAX_RECURSION は1以上が必要です: {cls.MAX_RECURSION}")
        if cls.RULE_POINTS < 1:
            errors.append(f"RULE_POINTS は1以上が必要です: {cls.RULE_POINTS}")
        if cls.SERIES_LIMIT < 1:
            errors.append(f"SERIES_LIMIT は1以上が必要です: {cls.SERIES_LIMIT}")
        if cls.METHOD not in cls.METHODS:
            errors.append(f"未知の評価法です: {cls.METHOD}")

        return errors
