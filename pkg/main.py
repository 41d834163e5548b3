#!/usr/bin/env python3
"""
分子補助関数・二中心積分の計算ツール

使い方:
    python main.py aux --variant 1 --kind P --N 0,1,1,3 --q 1 --p 2,12,1.5
    python main.py coulomb --n 1,1,2,2 --l 0,0,0,0 --m 0,0,0,0 --zeta 5.2,5.2,4.1,4.1 --R 0.2
    python main.py hybrid --n 1,1,1,2 --l 0,0,0,0 --m 0,0,0,0 --zeta 5.2,5.2,5.2,4.1 --R 0.2
    python main.py --method recurrence table 1 --out table1.csv
    python main.py scan fig1 --grid 0.1,0.5,2,20

終了コード: 0 正常, 1 未収束あり, 2 入力エラー, 3 参照値と不一致, 4 計算エラー
"""

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from tqdm import tqdm

from auxfn import AuxParams, MethodChoice, aux_g, aux_g_series
from config import Config
from errors import DomainError
from exporter import FORMATS, ReportExporter, format_value
from integrals import Orbital, TwoElectronSpec, two_electron_integral
from precision import PrecisionContext
from quadrature import QuadratureOutcome
from tables import GoldenRow, TABLE_TITLES, agreement_digits, get_table, required_digits

logger = logging.getLogger(__name__)

COMMANDS = ("aux", "coulomb", "hybrid", "table", "scan")
SCAN_FAMILIES = ("fig1", "fig2")

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_INVALID = 2
EXIT_MISMATCH = 3
EXIT_EVALUATION = 4

@dataclass(frozen=True)
class ScanFunction:
    """スキャンする関数族 P1G^{0,q}_{N2,N3,N4}(p1, p2, p3) と級数の項数 Ns"""

    q: int = 100
    N2: int = -100
    N3: int = 100
    N4: int = 100
    p2: str = "12"
    p3: str = "9.6"
    ns: int = 100

    def params(self, p1: str) -> AuxParams:
        return AuxParams(0, self.q, self.N2, self.N3, self.N4, p1, self.p2, self.p3, variant=1, kind="P")


# 図1・図2 の関数族 P1G^{0,100}_{-100,100,100}(p1, 12, 9.6), Ns=100
FIGURE_FUNCTION = ScanFunction()


@dataclass
class RunRequest:
    """1回の実行の指定"""

    command: str
    params: Dict = field(default_factory=dict)
    method: MethodChoice = field(default_factory=MethodChoice.from_config)
    precision: PrecisionContext = field(default_factory=PrecisionContext.from_config)
    output_format: str = "csv"
    out: Optional[Path] = None
    timing: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"未知のコマンドです: {self.command}")
        if self.output_format not in FORMATS:
            raise DomainError(f"出力形式は csv または json です: {self.output_format}")


@dataclass
class RunReport:
    """計算結果（行は入力順、値は目標桁数の文字列）"""

    rows: List[Dict]
    metadata: Dict
    all_converged: bool = True
    all_matched: bool = True

    @property
    def exit_code(self) -> int:
        if not self.all_matched:
            return EXIT_MISMATCH
        if not self.all_converged:
            return EXIT_NOT_CONVERGED
        return EXIT_OK


def _metadata(request: RunRequest) -> Dict:
    ctx = request.precision
    return {
        "working_digits": ctx.working_digits,
        "target_digits": ctx.target_digits,
        "max_recursion": ctx.max_recursion,
        "method": request.method.strategy,
        "series_limit": request.method.series_limit,
        "version": Config.VERSION,
    }


def _outcome_columns(outcome: QuadratureOutcome, ctx: PrecisionContext) -> Dict:
    with ctx.workdps():
        return {
            "value": format_value(outcome.value, ctx.target_digits),
            "error_estimate": format_value(outcome.error_estimate, 3),
            "evaluations": outcome.evaluations,
            "subdivisions": outcome.subdivisions,
            "converged": bool(outcome.converged),
        }


def parse_list(text: str, count: int, name: str) -> List[str]:
    """"a,b,c" を count 個の文字列に分割（数値は文字列のまま渡して精度を保つ）"""
    items = [item.strip() for item in str(text).split(",")]
    if len(items) != count or any(item == "" for item in items):
        raise DomainError(f"{name} は {count} 個の値をカンマ区切りで指定してください: {text}")
    for item in items:
        try:
            mpmath.mpf(item)
        except (ValueError, TypeError):
            raise DomainError(f"{name} に数値でない値があります: {item}")
    return items


# ---------------------------------------------------------------------------
# 単発計算
# ---------------------------------------------------------------------------


def _aux_params(params: Dict) -> AuxParams:
    N1, N2, N3, N4 = parse_list(params["N"], 4, "--N")
    p1, p2, p3 = parse_list(params["p"], 3, "--p")
    if not mpmath.isint(mpmath.mpf(N1)):
        raise DomainError(f"N1 は整数が必要です: {N1}")
    return AuxParams(
        int(mpmath.mpf(N1)), int(params["q"]), N2, N3, N4, p1, p2, p3,
        variant=int(params["variant"]), kind=params["kind"],
    )


def _spec(command: str, params: Dict) -> TwoElectronSpec:
    n = parse_list(params["n"], 4, "--n")
    l = [int(v) for v in parse_list(params["l"], 4, "--l")]
    m = [int(v) for v in parse_list(params["m"], 4, "--m")]
    zeta = parse_list(params["zeta"], 4, "--zeta")
    orbitals = [Orbital(n[i], l[i], m[i], zeta[i]) for i in range(4)]
    return TwoElectronSpec(
        pair1=(orbitals[0], orbitals[1]),
        pair2=(orbitals[2], orbitals[3]),
        R=params["R"],
        kind=command,
    )


def run_single(request: RunRequest) -> RunReport:
    """
    補助関数または積分を1つ計算

    Args:
        request: aux / coulomb / hybrid の指定

    Returns:
        1行の RunReport
    """
    ctx = request.precision
    started = time.perf_counter()
    if request.command == "aux":
        p = _aux_params(request.params)
        outcome = aux_g(p, request.method, ctx)
        inputs = {
            "variant": p.variant, "kind": p.kind, "N1": p.N1, "q": p.q,
            "N2": str(p.N2), "N3": str(p.N3), "N4": str(p.N4),
            "p1": str(p.p1), "p2": str(p.p2), "p3": str(p.p3),
        }
    elif request.command in ("coulomb", "hybrid"):
        spec = _spec(request.command, request.params)
        outcome = two_electron_integral(spec, request.method, ctx)
        inputs = {key: str(request.params[key]) for key in ("n", "l", "m", "zeta", "R")}
    else:
        raise DomainError(f"run_single で扱えないコマンドです: {request.command}")

    row = dict(inputs)
    row.update(_outcome_columns(outcome, ctx))
    if request.timing:
        row["wall_time"] = round(time.perf_counter() - started, 3)
    if not outcome.converged:
        logger.warning(f"目標精度に収束しませんでした: 誤差推定 {row['error_estimate']}")
    return RunReport([row], _metadata(request), all_converged=bool(outcome.converged))


# ---------------------------------------------------------------------------
# 表の再現
# ---------------------------------------------------------------------------


def _row_method(row: GoldenRow, method: MethodChoice) -> MethodChoice:
    if method.strategy == "series" and row.series_limit is not None:
        return MethodChoice(method.strategy, row.series_limit)
    return method


def _evaluate_row(row: GoldenRow, method: MethodChoice, ctx: PrecisionContext, timing: bool) -> Dict:
    """表の1行を計算して照合（ProcessPoolExecutor からも呼ぶ）"""
    started = time.perf_counter()
    row_method = _row_method(row, method)
    if row.kind == "aux":
        outcome = aux_g(row.aux_params(), row_method, ctx)
    else:
        outcome = two_electron_integral(row.spec(), row_method, ctx)

    digits = agreement_digits(outcome.value, row.expected, ctx)
    result = {"table": row.table_id, "row": row.index, "params": " ".join(row.params)}
    result.update(_outcome_columns(outcome, ctx))
    result["expected"] = row.expected.replace(" ", "")
    result["agreement_digits"] = digits
    result["match"] = digits >= required_digits(row, ctx)
    if timing:
        result["wall_time"] = round(time.perf_counter() - started, 3)
    return result


def run_table(
    table_id: int,
    method: Optional[MethodChoice] = None,
    precision: Optional[PrecisionContext] = None,
    timing: bool = False,
    jobs: int = 1,
) -> RunReport:
    """
    ベンチマーク表を再現して参照値と照合

    Args:
        table_id: 表番号 1-7
        method: 評価法（series では行ごとの Ns を使う）
        precision: 精度コンテキスト
        timing: 経過時間の列を付けるか
        jobs: 並列プロセス数（1 で逐次）

    Returns:
        行番号順の RunReport
    """
    method = method or MethodChoice.from_config()
    precision = precision or PrecisionContext.from_config()
    rows = get_table(table_id)
    print(f"\n=== 表{table_id}: {TABLE_TITLES[table_id]}（{len(rows)}行） ===", file=sys.stderr)

    results: List[Dict] = []
    if jobs <= 1:
        for row in tqdm(rows, desc=f"表{table_id}", file=sys.stderr):
            results.append(_evaluate_row(row, method, precision, timing))
    else:
        # mpmath の精度はプロセス内のグローバル状態なので、スレッドではなくプロセスで分ける
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(_evaluate_row, row, method, precision, timing) for row in rows]
            for future in tqdm(as_completed(futures), total=len(futures), desc=f"表{table_id}", file=sys.stderr):
                results.append(future.result())
        results.sort(key=lambda r: r["row"])

    matched = sum(1 for r in results if r["match"])
    print(f"一致: {matched}/{len(results)} 行", file=sys.stderr)
    request = RunRequest("table", {"id": table_id}, method, precision)
    return RunReport(
        results,
        _metadata(request),
        all_converged=all(r["converged"] for r in results),
        all_matched=matched == len(results),
    )


# ---------------------------------------------------------------------------
# 収束スキャン
# ---------------------------------------------------------------------------


def _scan_fig1(grid: Sequence[str], function: ScanFunction, ctx: PrecisionContext) -> Tuple[List[Dict], bool]:
    rows = []
    converged = True
    deviations = []
    for p1 in tqdm(grid, desc="fig1", file=sys.stderr):
        p = function.params(p1)
        series = aux_g_series(p, function.ns, ctx)
        adaptive = aux_g(p, MethodChoice("adaptive"), ctx)
        converged = converged and adaptive.converged
        with ctx.workdps():
            if adaptive.value != 0:
                deviation = abs(series.value - adaptive.value) / abs(adaptive.value)
            else:
                deviation = abs(series.value)
            log_deviation = float(mpmath.log10(deviation)) if deviation != 0 else -float(ctx.working_digits)
            deviations.append(log_deviation)
            rows.append(
                {
                    "p1": p1,
                    "Ns": function.ns,
                    "series": format_value(series.value, ctx.target_digits),
                    "adaptive": format_value(adaptive.value, ctx.target_digits),
                    "relative_deviation": format_value(deviation, 3),
                    "log10_deviation": round(log_deviation, 3),
                    "series_diverged": bool(series.diverged),
                }
            )
    trend = np.diff(np.array(deviations, dtype=float))
    for row, step in zip(rows[1:], trend):
        row["deviation_growing"] = bool(step > 0)
    if rows:
        rows[0]["deviation_growing"] = False
    return rows, converged


def _scan_fig2(grid: Sequence[str], function: ScanFunction, ns_max: int, ctx: PrecisionContext) -> List[Dict]:
    rows = []
    for p1 in tqdm(grid, desc="fig2", file=sys.stderr):
        series = aux_g_series(function.params(p1), ns_max, ctx)
        with ctx.workdps():
            for ns, partial in enumerate(series.partial_sums):
                rows.append(
                    {
                        "p1": p1,
                        "Ns": ns,
                        "partial_sum": format_value(partial, ctx.target_digits),
                        "critical_ns": series.critical_ns,
                        "converged": bool(series.converged),
                    }
                )
    return rows


def run_scan(
    family: str,
    grid: Sequence[str],
    ns_max: Optional[int] = None,
    precision: Optional[PrecisionContext] = None,
    function: ScanFunction = FIGURE_FUNCTION,
) -> RunReport:
    """
    級数と数値積分の比較スキャン

    fig1: p1 の格子で Ns=function.ns（既定 100）の級数と適応積分を比べる
    fig2: p1 ごとに Ns に対する部分和の推移と臨界 Ns を出す
    """
    if family not in SCAN_FAMILIES:
        raise DomainError(f"スキャンの種類は fig1 または fig2 です: {family}")
    grid = [str(p).strip() for p in grid if str(p).strip() != ""]
    if not grid:
        raise DomainError("スキャンの格子が空です")
    precision = precision or PrecisionContext.from_config()
    print(f"\n=== スキャン {family}（{len(grid)}点） ===", file=sys.stderr)

    request = RunRequest("scan", {"family": family}, MethodChoice("series", function.ns), precision)
    if family == "fig1":
        rows, converged = _scan_fig1(grid, function, precision)
        return RunReport(rows, _metadata(request), all_converged=converged)
    ns_max = ns_max or Config.SCAN_FIG2_NS_MAX
    request.method = MethodChoice("series", ns_max)
    return RunReport(_scan_fig2(grid, function, ns_max, precision), _metadata(request))


# ---------------------------------------------------------------------------
# コマンドライン
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="分子補助関数・二中心クーロン/ハイブリッド積分の高精度計算"
    )
    parser.add_argument("--precision", type=int, default=None, help="作業桁数（デフォルト: 50）")
    parser.add_argument("--target", type=int, default=None, help="目標桁数（デフォルト: 25）")
    parser.add_argument("--max-recursion", type=int, default=None, help="適応分割の深さ上限（デフォルト: 35）")
    parser.add_argument(
        "--method",
        choices=Config.METHODS,
        default=None,
        help="評価法（デフォルト: adaptive）",
    )
    parser.add_argument("--series-limit", type=int, default=None, help="級数の上限 Ns（デフォルト: 250）")
    parser.add_argument("--output", choices=FORMATS, default="csv", help="出力形式")
    parser.add_argument("--out", type=Path, default=None, help="出力ファイル（未指定で標準出力）")
    parser.add_argument("--timing", action="store_true", help="経過時間の列を出力")
    parser.add_argument("--jobs", type=int, default=1, help="表の行を並列計算するプロセス数")
    parser.add_argument("--verbose", "-v", action="store_true", help="詳細ログを表示")

    sub = parser.add_subparsers(dest="command", required=True)

    aux = sub.add_parser("aux", help="補助関数 G を1つ計算")
    aux.add_argument("--variant", type=int, choices=(1, 2, 3), default=1, help="変数 (1: μ+ν, 2: μ-ν, 3: μν)")
    aux.add_argument("--kind", choices=("P", "Q"), default="P", help="不完全ガンマ関数の種類")
    aux.add_argument("--N", required=True, help="N1,N2,N3,N4")
    aux.add_argument("--q", type=int, required=True, help="(μν) のべき q")
    aux.add_argument("--p", required=True, help="p1,p2,p3")

    for name, help_text in (("coulomb", "クーロン積分を計算"), ("hybrid", "ハイブリッド積分を計算")):
        integral = sub.add_parser(name, help=help_text)
        integral.add_argument("--n", required=True, help="n1,n1',n2,n2'")
        integral.add_argument("--l", required=True, help="l1,l1',l2,l2'")
        integral.add_argument("--m", required=True, help="m1,m1',m2,m2'")
        integral.add_argument("--zeta", required=True, help="ζ1,ζ1',ζ2,ζ2'")
        integral.add_argument("--R", required=True, help="核間距離（bohr）")

    table = sub.add_parser("table", help="ベンチマーク表を再現")
    table.add_argument("id", type=int, choices=sorted(TABLE_TITLES), help="表番号")

    scan = sub.add_parser("scan", help="級数の収束スキャン")
    scan.add_argument("family", choices=SCAN_FAMILIES)
    scan.add_argument("--grid", default=None, help="p1 の格子（カンマ区切り）")
    scan.add_argument("--ns-max", type=int, default=None, help="fig2 の Ns 上限")
    return parser


def _setup_logging(verbose: bool):
    level = logging.DEBUG if verbose else getattr(logging, Config.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")


def _dispatch(args) -> RunReport:
    precision = PrecisionContext.from_config(
        working_digits=args.precision,
        target_digits=args.target,
        max_recursion=args.max_recursion,
    )
    method = MethodChoice.from_config(strategy=args.method, series_limit=args.series_limit)

    if args.command == "table":
        return run_table(args.id, method, precision, timing=args.timing, jobs=args.jobs)
    if args.command == "scan":
        if args.grid is None:
            grid = Config.SCAN_FIG1_GRID if args.family == "fig1" else Config.SCAN_FIG2_P1
        else:
            grid = args.grid.split(",")
        return run_scan(args.family, grid, args.ns_max, precision)

    params = {key: value for key, value in vars(args).items() if key in ("variant", "kind", "N", "q", "p", "n", "l", "m", "zeta", "R")}
    request = RunRequest(args.command, params, method, precision, args.output, args.out, args.timing)
    return run_single(request)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    errors = Config.validate()
    if errors:
        print("設定エラー:", file=sys.stderr)
        for e in errors:
            print(f"  - {e}", file=sys.stderr)
        return EXIT_INVALID

    try:
        report = _dispatch(args)
    except ValueError as e:
        print(f"入力エラー: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as e:
        # EvaluationError（積分点の位置つき）を含む
        print(f"計算エラー: {e}", file=sys.stderr)
        logger.debug("計算エラーの詳細", exc_info=True)
        return EXIT_EVALUATION

    exporter = ReportExporter()
    path = exporter.export(report.rows, report.metadata, args.output, args.out)
    if path is not None:
        print(f"出力: {path}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
