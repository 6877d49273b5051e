"""Mean energy efficiency against the RSU coverage radius."""

from _common import sweep_main

if __name__ == "__main__":
    sweep_main("rsu_radius_m", [5.0, 10.0, 15.0, 20.0], "ee_vs_radius.csv", __doc__)
