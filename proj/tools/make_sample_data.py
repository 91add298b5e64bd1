#!/usr/bin/env python3
"""Regenerate data/sp500_sample.csv, the synthetic index series bundled for offline runs.

Weekday closes from 2012-01-02 to 2016-12-30 follow a geometric random walk with
a mild drift and occasional jumps so both tails carry extreme events.
"""
import argparse
import csv

import numpy as np
import pandas as pd


def generate(seed: int) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    dates = pd.bdate_range("2012-01-02", "2016-12-30")
    n = len(dates)
    ret = rng.normal(0.0003, 0.008, n)
    jumps = rng.random(n) < 0.02
    ret[jumps] += rng.normal(0.0, 0.03, jumps.sum())
    close = 1275.0 * np.exp(np.cumsum(ret))
    open_ = close * np.exp(rng.normal(0.0, 0.003, n))
    high = np.maximum(open_, close) * (1.0 + np.abs(rng.normal(0.0, 0.004, n)))
    low = np.minimum(open_, close) * (1.0 - np.abs(rng.normal(0.0, 0.004, n)))
    volume = rng.integers(2_500_000_000, 5_000_000_000, n)
    return pd.DataFrame({
        "Date": dates.strftime("%Y-%m-%d"),
        "Open": open_.round(2),
        "High": high.round(2),
        "Low": low.round(2),
        "Close": close.round(2),
        "Volume": volume,
    })


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20120102)
    ap.add_argument("--out", default="data/sp500_sample.csv")
    args = ap.parse_args()
    generate(args.seed).to_csv(args.out, index=False, quoting=csv.QUOTE_MINIMAL)


if __name__ == "__main__":
    main()
