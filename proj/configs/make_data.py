"""Writes the synthetic data sets used by the example configs."""

import csv
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent


def simulate(lags, impact, T, burn=100, seed=0):
    rng = np.random.default_rng(seed)
    n = impact.shape[0]
    p = len(lags)
    y = np.zeros((T + burn, n))
    for t in range(p, T + burn):
        y[t] = sum(lags[k] @ y[t - 1 - k] for k in range(p)) + impact @ rng.standard_normal(n)
    return y[burn:]


def write(path, names, y, start_year=1990):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["date", *names])
        for t, row in enumerate(y):
            year, month = start_year + t // 12, t % 12 + 1
            w.writerow([f"{year}-{month:02d}", *(f"{v:.10g}" for v in row)])


def main():
    impact = np.array([[1.0, -0.4], [0.6, 0.8]])
    write(HERE / "bivariate.csv", ["output", "prices"],
          simulate([np.array([[0.5, 0.2], [0.1, 0.4]])], impact, 200, seed=1))

    impact = np.array([[-0.6, 0.3, 0.2, 0.1],
                       [-0.3, 0.7, -0.2, 0.1],
                       [0.8, 0.6, 0.9, -0.3],
                       [0.1, 0.2, 0.4, 0.5]])
    a1 = np.diag([0.6, 0.7, 0.8, 0.5])
    a2 = np.diag([0.1, 0.05, -0.1, 0.1])
    write(HERE / "oil_market.csv",
          ["oil_production", "real_activity", "real_oil_price", "inventories"],
          simulate([a1, a2], impact, 300, seed=2))


if __name__ == "__main__":
    main()
