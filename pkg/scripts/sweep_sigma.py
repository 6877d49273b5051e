"""Mean energy efficiency against the CSI error standard deviation."""

from _common import sweep_main

if __name__ == "__main__":
    sweep_main("sigma_eps", [0.0, 0.0025, 0.005, 0.0075, 0.01], "ee_vs_sigma.csv", __doc__)
