import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# Nested geometry with seven contours: flips (half-integers) and the expected
# contour groups given as 1-based flip indices.
SEVEN_CONTOURS = [-0.5, 54.5, 57.5, 58.5, 61.5, 62.5, 63.5, 118.5, 121.5, 122.5, 125.5, 128.5,
                  129.5, 132.5, 133.5, 136.5, 139.5, 140.5]
SEVEN_CONTOURS_GROUPS = [(1, 8, 11, 16), (2, 5, 6, 7), (3, 4), (9, 10), (12, 13), (14, 15), (17, 18)]
SEVEN_CONTOURS_POLYMERS = [[1, 4, 7], [2, 5, 6], [3]]

# Six contours where one inner contour cannot join its siblings.
SIX_CONTOURS = [-0.5, 72.5, 75.5, 76.5, 79.5, 80.5, 83.5, 121.5, 124.5, 125.5, 128.5, 166.5]
SIX_CONTOURS_GROUPS = [(1, 12), (2, 7), (3, 4), (5, 6), (8, 11), (9, 10)]
SIX_CONTOURS_POLYMERS = [[1], [2, 5], [3, 4], [6]]

# Three contours, the second nested in the first.
NESTED_THREE = [0.5, 6.5, 7.5, 15.5, 19.5, 20.5, 23.5, 30.5]


# One line per acceptance criterion, collected by tests/test_acceptance.py and
# repeated in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
