"""Published case-study profiles and bands, shared by several test modules."""
from reasontopo.health import HealthBand
from reasontopo.indicators import METRICS, TopologicalProfile

# (initial value, band lower, band upper, optimized value)
MATH_ALGEBRA = {
    "f_coh": (0.00, 0.34, 0.71, 0.65),
    "f_val": (0.00, 0.45, 0.76, 0.56),
    "f_div": (1.00, 1.42, 3.91, 2.31),
    "f_pen": (4.20, 1.40, 3.30, 3.10),
    "density": (0.22, 0.23, 0.54, 0.26),
    "f_complexity": (14.50, 10.20, 23.7, 22.10),
}
MMLU_PHYSICS = {
    "f_coh": (0.80, 0.08, 0.35, 0.28),
    "f_val": (0.85, 0.15, 0.43, 0.39),
    "f_div": (1.30, 2.31, 5.88, 4.10),
    "f_pen": (1.20, 0.40, 1.90, 1.40),
    "density": (0.22, 0.22, 0.48, 0.25),
    "f_complexity": (4.80, 16.20, 32.70, 22.10),
}
MATH_QUESTION = "Solve for x: sqrt(3x + 1) = x - 1."
MMLU_QUESTION = "Why does a metal spoon feel colder than a wooden spoon at the same temperature?"


def bands_of(table, sigma=0.1):
    # sigma is not published; any positive value keeps the band logic intact
    return {m: HealthBand(m, table[m][1], table[m][2], sigma) for m in METRICS}


def profile_of(table, column=0):
    return TopologicalProfile(**{m: table[m][column] for m in METRICS})
