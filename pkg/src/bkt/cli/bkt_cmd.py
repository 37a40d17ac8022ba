#!/usr/bin/env python3
"""
ベイズ・カーネル二標本検定 CLI

Usage:
    bkt test --input data.csv [--s 40] [--seed 0] [--iters 2000] [--burnin 500] [--thin 2] [--out DIR]
    bkt bf --input data.csv [--theta T | --theta-grid lo:hi:count] [--out DIR]
    bkt synth --scenario NAME --n N [--seed S] --out file.csv
    bkt experiment --scenario NAME [--scenario NAME ...] --n 50,100,200 [--replicates 100] [--out DIR]
    bkt check [--instances 1000] [--seed 0]

環境変数 (.env でも可):
    BKT_THREADS    experiment のワーカー数の上限
    BKT_LOG_LEVEL  ログレベル (デフォルト: WARNING)
    BKT_SEED       --seed 省略時のシード (デフォルト: 0)
"""

import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from bkt.errors import BKTError, ConfigError

load_dotenv()

USAGE_EXIT = 1


class _Parser(argparse.ArgumentParser):
    """使い方の誤りを終了コード 1 で報告する ArgumentParser"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"エラー: {message}", file=sys.stderr)
        sys.exit(USAGE_EXIT)


def _env_int(name: str, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("BAD_ENV", f"{name} must be an integer, got {raw!r}") from None


def _setup_logging(verbose: int):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, os.getenv("BKT_LOG_LEVEL", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _seed(args) -> int:
    return args.seed if args.seed is not None else _env_int("BKT_SEED", 0)


def _chain_config(args):
    from bkt.inference import ChainConfig

    return ChainConfig(
        m_tilde=args.iters,
        n_tilde=args.hmc_steps,
        warmup_inner=args.warmup_inner,
        burnin=args.burnin,
        thin=args.thin,
        leapfrog_steps=args.leapfrog,
        prior_odds=args.prior_odds,
        sigma_method=args.sigma_method,
        clamp_jacobian=args.clamp_jacobian,
    )


def _print_quantiles(title: str, quantiles: dict):
    if not quantiles:
        print(f"  {title}: (サンプルなし)")
        return
    body = "  ".join(f"{k}={v:.4g}" for k, v in quantiles.items())
    print(f"  {title}: {body}")


def cmd_test(args):
    """Gibbs 連鎖で P(H1 | D) と θ の事後分布を推定"""
    from bkt.runner import RunConfig, run_test

    cfg = RunConfig(verb="test", input=args.input, out=args.out, s=args.s,
                    seed=_seed(args), chain=_chain_config(args))
    print(f"連鎖を実行中... (反復 {cfg.chain.m_tilde}, burn-in {cfg.chain.burnin}, s={cfg.s})")
    summary = run_test(cfg)

    print("\n=== 検定結果 ===")
    print(f"  P(H1 | D) = {summary.p_h1:.4f}")
    print(f"  受理率: {summary.acceptance_rate:.3f}")
    _print_quantiles("θ", summary.theta_quantiles)
    for label, quantiles in summary.theta_quantiles_by_model.items():
        _print_quantiles(f"θ | {label}", quantiles)
    print(f"\n出力: {cfg.out / 'summary.json'}, {cfg.out / 'samples.csv'}")


def cmd_bf(args):
    """固定 θ またはグリッド探索で Bayes 因子を計算"""
    from bkt.runner import RunConfig, run_bf

    cfg = RunConfig(verb="bf", input=args.input, out=args.out, s=args.s, seed=_seed(args),
                    chain=_chain_config(args), theta=args.theta, theta_grid=args.theta_grid)
    summary = run_bf(cfg)

    print("=== Bayes 因子 ===")
    print(f"  θ = {summary.theta:.6g} ({summary.extras['theta_source']})")
    print(f"  log10 BF = {summary.log10_bf:.4f}")
    print(f"  P(H1 | Δ, θ) = {summary.p_h1:.4g}")
    outputs = [str(cfg.out / "summary.json")]
    if cfg.theta_grid is not None:
        outputs.append(str(cfg.out / "curve.csv"))
    print(f"\n出力: {', '.join(outputs)}")


def cmd_synth(args):
    """プリセットのシナリオから CSV を生成"""
    from bkt.runner import write_paired_csv
    from bkt.synth import gen, preset

    spec = preset(args.scenario, n=args.n, seed=_seed(args))
    data = gen(spec)
    config = {"verb": "synth", "scenario": args.scenario, "family": spec.family,
              "n": spec.n, "seed": spec.seed}
    path = write_paired_csv(args.out, data, config)
    print(f"{args.scenario}: {data.n} 行 (D={data.dim}) を {path} に書き出しました。")


def cmd_experiment(args):
    """シナリオ × n × 反復 のグリッドを実行"""
    from bkt.runner import ExperimentConfig, run_experiment

    try:
        ns = tuple(int(v) for v in args.n.split(",") if v.strip())
    except ValueError:
        raise ConfigError("BAD_N", f"--n must be a comma-separated list of integers, got {args.n!r}") from None
    threads = args.threads or os.cpu_count() or 1
    cap = _env_int("BKT_THREADS", None)
    if cap is not None:
        threads = min(threads, max(1, cap))

    cfg = ExperimentConfig(scenarios=tuple(args.scenario), ns=ns, replicates=args.replicates,
                           seed=_seed(args), s=args.s, chain=_chain_config(args), out=args.out,
                           threads=threads)
    total = len(cfg.scenarios) * len(cfg.ns) * cfg.replicates
    print(f"実験を実行中... ({total} 反復, ワーカー {cfg.threads})")
    rows = run_experiment(cfg)

    print("\n=== 実験結果 (P(H1 | D) の中央値) ===")
    groups: dict[tuple, list[float]] = {}
    for scenario, n, _, _, p_h1, _, _ in rows:
        groups.setdefault((scenario, n), []).append(p_h1)
    for (scenario, n), values in groups.items():
        values = sorted(values)
        print(f"  {scenario:<24} n={n:<6} median={values[len(values) // 2]:.3f}")
    print(f"\n出力: {cfg.out / 'experiment.csv'}")


def cmd_check(args):
    """効率版の尤度と密な参照実装の一致を検査"""
    from bkt.runner import run_check

    print(f"検査中... (インスタンス {args.instances})")
    code, report = run_check(instances=args.instances, seed=_seed(args), perturbation=args.perturb)

    print("\n=== 検査結果 ===")
    for r in report.results:
        mark = "OK  " if r.passed else "FAIL"
        print(f"  [{mark}] {r.name}: max_err={r.max_error:.2e} (tol {r.tolerance:.0e}, {r.instances} 件)")
    notes = report.notes
    if notes:
        print("\n  帰無データでのラベル更新規則の比較:")
        print(f"    log BF = {notes['log_bf']:.4g}")
        print(f"    H0 を確率 BF/(1+BF) で選ぶ場合 P(H1|θ) = {notes['p_h1_adopted']:.4g}  (採用)")
        print(f"    H0 を確率 1/(1+BF) で選ぶ場合 P(H1|θ) = {notes['p_h1_literal']:.4g}")
    print("\n完了: すべて合格" if code == 0 else "\n失敗: 不一致があります")
    return code


def _add_common(p, input_required=True):
    p.add_argument("--input", required=input_required, help="入力 CSV (ヘッダー x1..xD,y1..yD)")
    p.add_argument("--s", type=int, default=40, help="評価点の数 (偶数, デフォルト: 40)")
    p.add_argument("--seed", type=int, default=None, help="乱数シード (デフォルト: BKT_SEED または 0)")
    p.add_argument("--out", default="bkt_out", help="出力ディレクトリ (デフォルト: bkt_out)")


def _add_chain(p):
    p.add_argument("--iters", type=int, default=2000, help="Gibbs の反復数 (デフォルト: 2000)")
    p.add_argument("--burnin", type=int, default=500, help="burn-in (デフォルト: 500)")
    p.add_argument("--thin", type=int, default=2, help="間引き (デフォルト: 2)")
    p.add_argument("--hmc-steps", type=int, default=9, help="1 スイープあたりの HMC 遷移 (デフォルト: 9)")
    p.add_argument("--warmup-inner", type=int, default=3, help="うちステップ幅適応に使う遷移 (デフォルト: 3)")
    p.add_argument("--leapfrog", type=int, default=10, help="リープフロッグのステップ数 (デフォルト: 10)")
    p.add_argument("--clamp-jacobian", action="store_true", help="特異な J^T J の固有値を切り上げる")


def _add_model(p):
    p.add_argument("--sigma-method", type=int, choices=(1, 2), default=2, help="Σ_θ の推定方法 (デフォルト: 2)")
    p.add_argument("--prior-odds", type=float, default=1.0, help="P(H1)/P(H0) (デフォルト: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bkt", description="ベイズ・カーネル二標本検定")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="ログを詳しく表示 (-vv でデバッグ)")
    subparsers = parser.add_subparsers(dest="command")

    # test コマンド
    p_test = subparsers.add_parser("test", help="Gibbs 連鎖で P(H1 | D) を推定")
    _add_common(p_test)
    _add_chain(p_test)
    _add_model(p_test)

    # bf コマンド
    p_bf = subparsers.add_parser("bf", help="固定 θ の Bayes 因子")
    _add_common(p_bf)
    _add_model(p_bf)
    p_bf.add_argument("--theta", type=float, default=None, help="θ (省略時はメディアンヒューリスティック)")
    p_bf.add_argument("--theta-grid", default=None, help="lo:hi:count のグリッドで BF を最小化")
    p_bf.set_defaults(iters=2000, burnin=500, thin=2, hmc_steps=9, warmup_inner=3, leapfrog=10,
                      clamp_jacobian=False)

    # synth コマンド
    p_synth = subparsers.add_parser("synth", help="合成データの CSV を生成")
    p_synth.add_argument("--scenario", required=True, help="プリセット名")
    p_synth.add_argument("--n", type=int, required=True, help="行数")
    p_synth.add_argument("--seed", type=int, default=None, help="乱数シード")
    p_synth.add_argument("--out", required=True, help="出力 CSV")

    # experiment コマンド
    p_exp = subparsers.add_parser("experiment", help="シナリオ × n × 反復 のグリッドを実行")
    p_exp.add_argument("--scenario", action="append", required=True, help="プリセット名 (複数指定可)")
    p_exp.add_argument("--n", required=True, help="サンプルサイズ (カンマ区切り)")
    p_exp.add_argument("--replicates", type=int, default=100, help="反復数 (デフォルト: 100)")
    p_exp.add_argument("--threads", type=int, default=None, help="ワーカー数 (デフォルト: CPU 数, BKT_THREADS で上限)")
    _add_common(p_exp, input_required=False)
    _add_chain(p_exp)
    _add_model(p_exp)

    # check コマンド
    p_check = subparsers.add_parser("check", help="効率版と参照実装の一致を検査")
    p_check.add_argument("--instances", type=int, default=1000, help="乱数インスタンス数 (デフォルト: 1000)")
    p_check.add_argument("--seed", type=int, default=None, help="乱数シード")
    p_check.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    commands = {
        "test": cmd_test,
        "bf": cmd_bf,
        "synth": cmd_synth,
        "experiment": cmd_experiment,
        "check": cmd_check,
    }
    if args.command not in commands:
        parser.print_help()
        return USAGE_EXIT

    try:
        _setup_logging(args.verbose)
        return commands[args.command](args) or 0
    except BKTError as e:
        print(f"エラー: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"エラー: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
