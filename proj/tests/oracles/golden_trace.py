"""Independent oracle for the 12-point live win-probability trace.

Written without reference to the C++ engine: raw point counts, a closed-form
remaining-points formula valid for the opening games of set 1, and the
momentum/decay/blend chain evaluated directly.
"""
import json
import math
import sys

ALPHA = 1.0
BETA = 1.0
LAMBDA = 1.0
FLOOR = 1e-6
OFFSET = 1.0
EXPECTED_POINTS = 180
SETS_TO_WIN = 2
FRESH_MIN = 48
PRIOR = (0.62, 0.38)

# 1 = first player, 2 = second player. Game 1 goes to deuce twice.
SEQUENCE = [1, 2, 1, 2, 1, 2, 1, 1, 2, 2, 2, 2]


def remaining(me, other, games_me, games_other, sets_me):
    # Only valid while no tiebreak is reachable (games_other <= 4).
    assert games_other <= 4
    to_game = max(4, other + 2) - me
    set_target = max(6, games_other + 2)
    games_after = set_target - (games_me + 1)
    return to_game + 4 * games_after + 24 * (SETS_TO_WIN - 1 - sets_me)


def main():
    m = [OFFSET + PRIOR[0], OFFSET + PRIOR[1]]
    pts = [0, 0]
    games = [0, 0]
    played = 0
    rows = []
    for winner in SEQUENCE:
        w_idx = winner - 1
        l_idx = 1 - w_idx
        m[w_idx] = max(FLOOR, m[w_idx] + ALPHA * 1.0)
        m[l_idx] = max(FLOOR, m[l_idx] - BETA * 1.0)
        c = min(1.0, played / EXPECTED_POINTS)
        decayed = [x * math.exp(-LAMBDA * c) for x in m]
        scaled = [decayed[0] / sum(decayed), decayed[1] / sum(decayed)]

        pts[w_idx] += 1
        played += 1
        if pts[w_idx] >= 4 and pts[w_idx] - pts[l_idx] >= 2:
            games[w_idx] += 1
            pts = [0, 0]

        r1 = remaining(pts[0], pts[1], games[0], games[1], 0)
        r2 = remaining(pts[1], pts[0], games[1], games[0], 0)
        w = 1.0 - min(r1, r2) / FRESH_MIN
        live = [PRIOR[i] * (1 - w) + scaled[i] * w for i in range(2)]
        boosted = [live[i] * (1 + 0 / SETS_TO_WIN) for i in range(2)]
        norm = [boosted[0] / sum(boosted), boosted[1] / sum(boosted)]
        rows.append({
            "point_index": played,
            "winner": winner,
            "momentum_raw": list(m),
            "momentum_decayed": decayed,
            "momentum_scaled": scaled,
            "remaining": [r1, r2],
            "blend_weight": w,
            "live": live,
            "boosted_raw": boosted,
            "normalized": norm,
        })
    out = {
        "config": {"alpha": ALPHA, "beta": BETA, "lambda": LAMBDA,
                   "momentum_floor": FLOOR, "momentum_init_offset": OFFSET,
                   "expected_total_points": EXPECTED_POINTS,
                   "context_multipliers": 1.0},
        "format": "bo3",
        "initial_server": 1,
        "static_prior": list(PRIOR),
        "sequence": SEQUENCE,
        "trace": rows,
    }
    json.dump(out, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
