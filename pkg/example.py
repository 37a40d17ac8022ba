#!/usr/bin/env python3
"""
ベイズ・カーネル二標本検定サンプル

使い方:
1. (任意) .env に BKT_SEED を設定
2. このスクリプトを実行
"""

import os

from dotenv import load_dotenv

from bkt import ChainConfig, compute_bayes_factor, gibbs_run, median_heuristic, posterior_h1, subsample_eval_points
from bkt.inference import conditional_h1_curve, theta_grid
from bkt.synth import gen, preset

# .envファイルを読み込む
load_dotenv()

SEED = int(os.getenv("BKT_SEED", "0"))


def main():
    # 1. 合成データを生成 (x ~ N(0, 1), y ~ N(1, 1))
    print("=== データ生成 ===")
    data = gen(preset("gauss_mean1", n=200, seed=SEED))
    print(f"  n={data.n}, D={data.dim}")

    z = subsample_eval_points(data, s=40, seed=SEED)

    # 2. メディアンヒューリスティックの θ で Bayes 因子
    print("\n=== 固定 θ の Bayes 因子 ===")
    p = median_heuristic(data)
    bf = compute_bayes_factor(data, z, p)
    print(f"  θ = {p.theta:.4g}")
    print(f"  log10 BF = {bf.log10_bf:.3f}")
    print(f"  P(H1 | Δ, θ) = {posterior_h1(bf):.4f}")

    # 3. θ ごとの P(H1 | θ, D)
    print("\n=== θ ごとの P(H1 | θ, D) ===")
    for theta, p_h1 in conditional_h1_curve(data, z, theta_grid(0.1, 3.0, 6)):
        print(f"  θ={theta:<6.3g} P(H1)={p_h1:.4f}")

    # 4. θ と仮説ラベルの同時推定
    print("\n=== HMC-within-Gibbs ===")
    cfg = ChainConfig(m_tilde=400, burnin=100, seed=SEED)
    out = gibbs_run(data, z, cfg)
    print(f"  P(H1 | D) = {out.p_h1:.4f}")
    print(f"  受理率: {out.acceptance_rate:.3f}")
    print(f"  初期ステップ幅: {out.diagnostics['initial_step']:.3g}")
    for key, value in out.theta_quantiles().items():
        print(f"  θ {key}: {value:.4g}")


if __name__ == "__main__":
    main()
