"""レポート出力モジュール（CSV / JSON）"""

import json
import sys
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional

import mpmath
import pandas as pd

from config import Config

FORMATS = ("csv", "json")


def format_value(value, digits: int) -> str:
    """
    有効数字 digits 桁の指数表記 "d.ddd…E±XX"（偶数丸め）

    mpf を有理数に直してから1回だけ丸める。
    """
    if digits < 1:
        raise ValueError(f"桁数は1以上が必要です: {digits}")
    value = mpmath.mpf(value)
    if not mpmath.isfinite(value):
        raise ValueError(f"有限の値ではありません: {value}")
    if value == 0:
        return f"{'0.' + '0' * (digits - 1) if digits > 1 else '0'}E+00"

    sign_bit, man, exp, _ = value._mpf_
    exact = Fraction(int(man)) * Fraction(2) ** int(exp)
    context = Context(prec=digits, rounding=ROUND_HALF_EVEN)
    rounded = context.divide(Decimal(exact.numerator), Decimal(exact.denominator))

    mantissa = "".join(str(d) for d in rounded.as_tuple().digits).ljust(digits, "0")[:digits]
    exponent = rounded.adjusted()
    sign = "-" if sign_bit else ""
    body = mantissa[0] + ("." + mantissa[1:] if digits > 1 else "")
    return f"{sign}{body}E{exponent:+03d}"


class ReportExporter:
    """計算結果の出力クラス"""

    def __init__(self, output_dir: Path = None):
        self.output_dir = output_dir or Config.OUTPUT_DIR
        self.encoding = Config.CSV_ENCODING

    def _resolve(self, out: Optional[Path]) -> Optional[Path]:
        """相対パスは出力ディレクトリ基準（None は標準出力）"""
        if out is None:
            return None
        out = Path(out)
        if not out.is_absolute() and out.parent == Path("."):
            self.output_dir.mkdir(parents=True, exist_ok=True)
            return self.output_dir / out
        out.parent.mkdir(parents=True, exist_ok=True)
        return out

    def to_frame(self, rows: List[Dict], metadata: Dict) -> pd.DataFrame:
        """
        行リストを DataFrame に変換

        CSV は1表なので、メタデータは各行の先頭列として繰り返す。
        """
        data = []
        for row in rows:
            record = {f"meta_{key}": value for key, value in metadata.items()}
            record.update(row)
            data.append(record)
        return pd.DataFrame(data)

    def export_csv(self, rows: List[Dict], metadata: Dict, out: Optional[Path] = None) -> Optional[Path]:
        """
        CSV出力

        Args:
            rows: 1行1辞書（キーの順序が列順）
            metadata: 精度設定・評価法・バージョン
            out: 出力先（None で標準出力）

        Returns:
            出力ファイルのパス（標準出力なら None）
        """
        df = self.to_frame(rows, metadata)
        output_path = self._resolve(out)
        if output_path is None:
            df.to_csv(sys.stdout, index=False, lineterminator="\n")
            return None
        df.to_csv(output_path, index=False, encoding=self.encoding, lineterminator="\n")
        return output_path

    def export_json(self, rows: List[Dict], metadata: Dict, out: Optional[Path] = None) -> Optional[Path]:
        """JSON出力（メタデータのオブジェクトと行の配列、キーは挿入順）"""
        text = json.dumps({"metadata": metadata, "rows": rows}, ensure_ascii=False, indent=2) + "\n"
        output_path = self._resolve(out)
        if output_path is None:
            sys.stdout.write(text)
            return None
        output_path.write_text(text, encoding=self.encoding)
        return output_path

    def export(self, rows: List[Dict], metadata: Dict, fmt: str = "csv", out: Optional[Path] = None) -> Optional[Path]:
        if fmt not in FORMATS:
            raise ValueError(f"出力形式は csv または json です: {fmt}")
        if fmt == "csv":
            return self.export_csv(rows, metadata, out)
        return self.export_json(rows, metadata, out)
