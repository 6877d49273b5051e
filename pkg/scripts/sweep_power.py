"""Mean energy efficiency against the total power budget (20 to 45 dBm)."""

import numpy as np
from _common import sweep_main

if __name__ == "__main__":
    sweep_main("total_power_dbm", np.linspace(20, 45, 11), "ee_vs_power.csv", __doc__)
