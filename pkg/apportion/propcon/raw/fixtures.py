"""Named numeric cases with their expected allocations (input order)."""
# > each case: populations, method ids, expected seats per house, and the
# > house/lambda at which proportional consistency is expected to fail
# > keys are the result labels each case is quoted from; aliases are descriptive

# prop1ii: a divisor rule with fixed, non-stationary signposts is not
# proportionally consistent.
# Fixed-signpost divisor rule: f(k) = k + 1/2 at the signposts deciding the
# 15th, 9th and 3rd seats, f(k) = k + 1 elsewhere
fixed_signpost = {
    "populations": [4600, 2500, 1000],  # quotas (46/3, 25/3, 10/3) at H=27
    "methods": ["table:default=1;2=5/2,8=17/2,14=29/2"],
    "expected": {27: [15, 9, 3], 18: [11, 5, 2]},  # 2/3 * (15, 9, 3) = (10, 6, 2)
    "pc_failure": (27, "2/3"),
}

# prop8: NIS satisfies quota but is not proportionally consistent.
# Nearest-integer, one-each-to-smallest (NIS) with eight states
nis_eight = {
    "populations": [1000, 965, 965, 965, 965, 965, 625, 550],  # V = 7000
    "methods": ["nis"],
    "expected": {70: [10, 10, 10, 10, 10, 10, 5, 5], 28: [4, 4, 4, 4, 4, 4, 3, 1]},
    "pc_failure": (70, "2/5"),  # expected (4, 4, 4, 4, 4, 4, 2, 2)
}

# prop9n5: the five-state example accompanying the NIS bound on lambda;
# the violation needs lambda > 1/2.
# NIS with five states; quotas at H=40 equal the populations / 1000
nis_five = {
    "populations": [14375, 9350, 5425, 5425, 5425],  # V = 40000
    "methods": ["nis"],
    "expected": {40: [15, 10, 5, 5, 5], 32: [13, 7, 4, 4, 4]},
    "pc_failure": (40, "4/5"),  # expected (12, 8, 4, 4, 4)
}

# prop11: quotatone with a stationary rule, s >= 1/2, is not proportionally
# consistent.
# Quotatone with stationary rules s = 1/2, 3/4, 1, including every
# intermediate house of the induction that matters
quotatone_stationary = {
    "populations": [48569, 41012, 8200, 1115, 1095],
    "methods": [
        "quotatone:stationary:1/2",
        "quotatone:stationary:3/4",
        "quotatone:stationary:1",
    ],
    "expected": {
        24: [12, 10, 2, 0, 0],
        28: [14, 12, 2, 0, 0],
        29: [15, 12, 2, 0, 0],
        30: [15, 13, 2, 0, 0],
        36: [18, 15, 3, 0, 0],
        37: [18, 16, 3, 0, 0],
        38: [19, 16, 3, 0, 0],
        39: [19, 16, 4, 0, 0],
        40: [20, 16, 4, 0, 0],
    },
    "pc_failure": (40, "3/4"),  # expected (15, 12, 3, 0, 0)
}

# prop13: quotatone with s < 1/2 or Hill-Huntington is not proportionally
# consistent either.
# Quotatone with stationary rules s = 0, 1/4, 1/2 and Hill-Huntington
quotatone_hill = {
    "populations": [57535, 56825, 4027, 3318, 3295],  # V = 125000
    "methods": [
        "quotatone:stationary:0",
        "quotatone:stationary:1/4",
        "quotatone:stationary:1/2",
        "quotatone:hill",
    ],
    "expected": {175: [80, 80, 5, 5, 5], 140: [64, 63, 5, 4, 4]},
    "pc_failure": (175, "4/5"),  # expected (64, 64, 4, 4, 4)
}

FIXTURES = {
    "prop1ii": fixed_signpost,
    "prop8": nis_eight,
    "prop9n5": nis_five,
    "prop11": quotatone_stationary,
    "prop13": quotatone_hill,
}

ALIASES = {
    "fixed-signpost": "prop1ii",
    "nis-eight": "prop8",
    "nis-five": "prop9n5",
    "quotatone-stationary": "prop11",
    "quotatone-hill": "prop13",
}
