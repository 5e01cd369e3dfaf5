#!/usr/bin/env python3
"""Generates the bundled replay fixtures (synthetic desk-scale matches).

Each file holds the static documents for one match followed by a
point-by-point stream and per-game cumulative match statistics. All numbers
are synthetic. Output is deterministic for the seeds below.

    python3 tools/fixtures/make_fixtures.py data/replay
"""
import json
import os
import random
import sys

BASE_TS = 1751900000000
POINT_GAP_MS = 5

MATCHES = [
    {
        "match_id": "M1",
        "file": "m1_alcaraz_sinner_bo5.ndjson",
        "seed": 3,
        "best_of": 5,
        "tour": "ATP",
        "event": "Desk Open 2025 Men's Singles",
        "round": "QF",
        "round_name": "Quarterfinals",
        "court": "Centre Court",
        "scheduled_start": "2025-07-08T13:30:00Z",
        "order_on_court": 1,
        "surface": "Grass",
        "serve_win": (0.66, 0.65),
        "power_index": (91.4, 90.8),
        "players": [
            dict(id="ATP-A0E2", first_name="Carlos", last_name="Alcaraz", aliases=["Carlitos"],
                 seed=2, ranking=2, nationality="ESP", height_cm=183, weight_kg=74,
                 date_of_birth="2003-05-05", age=22, career_wins=232, career_losses=50,
                 slam_titles=5, prior_year_result="Champion", plays="Right-handed",
                 birthplace="El Palmar, Spain", turned_pro=2018, coach="Juan Carlos Ferrero",
                 recent_form=0.86, surface_preference=0.82, historical_win_ratio=0.82),
            dict(id="ATP-S0AG", first_name="Jannik", last_name="Sinner", aliases=[],
                 seed=1, ranking=1, nationality="ITA", height_cm=191, weight_kg=77,
                 date_of_birth="2001-08-16", age=23, career_wins=268, career_losses=72,
                 slam_titles=3, prior_year_result="Quarterfinals", plays="Right-handed",
                 birthplace="San Candido, Italy", turned_pro=2018, coach="Simone Vagnozzi",
                 recent_form=0.88, surface_preference=0.74, historical_win_ratio=0.79),
        ],
        "h2h": dict(matches=12, wins=[7, 5], sets_won=[19, 16], game_ratio=0.512,
                    last_meeting=dict(event="Desk Masters", year=2025, winner=1)),
    },
    {
        "match_id": "M2",
        "file": "m2_sabalenka_swiatek_bo3.ndjson",
        "seed": 3,
        "best_of": 3,
        "tour": "WTA",
        "event": "Desk Open 2025 Women's Singles",
        "round": "SF",
        "round_name": "Semifinals",
        "court": "Court 1",
        "scheduled_start": "2025-07-10T12:00:00Z",
        "order_on_court": 2,
        "surface": "Grass",
        "serve_win": (0.62, 0.60),
        "power_index": (89.7, 88.9),
        "players": [
            dict(id="WTA-S0B1", first_name="Aryna", last_name="Sabalenka", aliases=[],
                 seed=1, ranking=1, nationality="BLR", height_cm=182, weight_kg=80,
                 date_of_birth="1998-05-05", age=27, career_wins=402, career_losses=164,
                 slam_titles=3, prior_year_result="Did not play", plays="Right-handed",
                 birthplace="Minsk, Belarus", turned_pro=2015, coach="Anton Dubrov",
                 recent_form=0.84, surface_preference=0.70, historical_win_ratio=0.71),
            dict(id="WTA-S0W2", first_name="Iga", last_name="Swiatek", aliases=["Świątek"],
                 seed=8, ranking=4, nationality="POL", height_cm=176, weight_kg=65,
                 date_of_birth="2001-05-31", age=24, career_wins=378, career_losses=92,
                 slam_titles=5, prior_year_result="Third round", plays="Right-handed",
                 birthplace="Warsaw, Poland", turned_pro=2016, coach="Wim Fissette",
                 recent_form=0.78, surface_preference=0.62, historical_win_ratio=0.80),
        ],
        "h2h": dict(matches=13, wins=[5, 8], sets_won=[12, 17], game_ratio=0.471,
                    last_meeting=dict(event="Desk Premier", year=2025, winner=1)),
    },
]

POINT_NAMES = ["0", "15", "30", "40"]


class Scorer:
    """Plain rules scorer: raw point counts, explicit set list."""

    def __init__(self, best_of, first_server):
        self.best_of = best_of
        self.sets_needed = (best_of + 1) // 2
        self.sets = [0, 0]
        self.set_scores = []
        self.games = [0, 0]
        self.points = [0, 0]
        self.tiebreak = False
        self.server = first_server
        self.tb_first = None
        self.tb_points = 0
        self.done = False
        self.winner = None

    def is_final_set(self):
        return self.sets[0] + self.sets[1] == self.best_of - 1

    def tb_target(self):
        return 10 if self.is_final_set() else 7

    def game_point_for(self, p):
        o = 1 - p
        if self.tiebreak:
            return self.points[p] + 1 >= self.tb_target() and self.points[p] + 1 - self.points[o] >= 2
        return self.points[p] + 1 >= 4 and self.points[p] + 1 - self.points[o] >= 2

    def score_text(self):
        if self.tiebreak:
            return "%d-%d" % tuple(self.points)
        a, b = self.points
        if a >= 3 and b >= 3:
            if a == b:
                return "40-40"
            return "AD-40" if a > b else "40-AD"
        return "%s-%s" % (POINT_NAMES[a], POINT_NAMES[b])

    def point(self, p):
        o = 1 - p
        self.points[p] += 1
        game_over = False
        if self.tiebreak:
            self.tb_points += 1
            if self.points[p] >= self.tb_target() and self.points[p] - self.points[o] >= 2:
                self.games[p] += 1
                game_over = True
            elif self.tb_points % 2 == 1:
                self.server = 1 - self.server
        elif self.points[p] >= 4 and self.points[p] - self.points[o] >= 2:
            self.games[p] += 1
            game_over = True
        if not game_over:
            return False
        was_tiebreak = self.tiebreak
        self.points = [0, 0]
        self.tiebreak = False
        g = self.games
        set_over = was_tiebreak or (g[p] >= 6 and g[p] - g[o] >= 2)
        if set_over:
            self.set_scores.append(list(g))
            self.sets[p] += 1
            self.games = [0, 0]
            if self.sets[p] == self.sets_needed:
                self.done = True
                self.winner = p
                return True
            if was_tiebreak:
                self.server = 1 - self.tb_first
                return True
        if g[0] == 6 and g[1] == 6:
            self.tiebreak = True
            self.tb_points = 0
            self.server = 1 - self.server
            self.tb_first = self.server
            return True
        self.server = 1 - self.server
        return True


def new_stats():
    return dict(aces=0, double_faults=0, first_serves_in=0, first_serves_total=0,
                first_serve_points_won=0, second_serve_points_won=0,
                second_serve_points_total=0, break_points_won=0, break_points_total=0,
                winners=0, unforced_errors=0, total_points_won=0, fastest_serve_kmh=0,
                service_games_won=0, service_games_played=0)


def stats_payload(stats, games_completed):
    players = []
    for s in stats:
        d = dict(s)
        d["first_serve_pct"] = round(100.0 * s["first_serves_in"] / s["first_serves_total"]) if s["first_serves_total"] else 0
        players.append(d)
    return {"games_completed": games_completed, "players": players}


def build(match_def):
    rng = random.Random(match_def["seed"])
    players = []
    for p in match_def["players"]:
        q = dict(p)
        q["name"] = p["first_name"] + " " + p["last_name"]
        q["tour"] = match_def["tour"]
        players.append(q)
    mid = match_def["match_id"]
    static = [
        ("PlayerStats", {"players": players}),
        ("HeadToHead", dict(players=[players[0]["id"], players[1]["id"]], **match_def["h2h"])),
        ("PowerIndex", {"values": list(match_def["power_index"]),
                        "rank": [1, 2] if match_def["power_index"][0] >= match_def["power_index"][1] else [2, 1]}),
        ("Draw", {"event": match_def["event"], "round": match_def["round"], "round_name": match_def["round_name"],
                  "players": [players[0]["id"], players[1]["id"]],
                  "next_round": "Final" if match_def["round"] == "SF" else "Semifinals",
                  "next_opponent": "Winner of the other half"}),
        ("MatchLogistics", {"court": match_def["court"], "scheduled_start": match_def["scheduled_start"],
                            "order_on_court": match_def["order_on_court"], "surface": match_def["surface"],
                            "best_of": match_def["best_of"], "final_set_rule": "extended_tiebreak",
                            "venue": "Desk Tennis Club", "gates_open": "10:30"}),
    ]
    events = []
    ts = BASE_TS
    for kind, payload in static:
        events.append({"kind": kind, "match_id": mid, "seq": 1, "ts_ms": ts, "payload": payload})
    sc = Scorer(match_def["best_of"], 0)
    stats = [new_stats(), new_stats()]
    slam_seq = 0
    mstats_seq = 0
    games_completed = 0
    while not sc.done:
        srv = sc.server
        rcv = 1 - srv
        set_no = sc.sets[0] + sc.sets[1] + 1
        game_no = sc.games[0] + sc.games[1] + 1
        point_no = sc.points[0] + sc.points[1] + 1
        break_point = (not sc.tiebreak) and sc.game_point_for(rcv)
        score_before = sc.score_text()
        first_in = rng.random() < 0.63
        p_srv = match_def["serve_win"][srv] + (0.06 if first_in else -0.1)
        ace = False
        df = False
        if not first_in and rng.random() < 0.09:
            df = True
            winner = rcv
        else:
            winner = srv if rng.random() < p_srv else rcv
            if winner == srv and first_in and rng.random() < 0.14:
                ace = True
        speed = int(rng.gauss(196 if srv == 0 else 189, 8)) if first_in else int(rng.gauss(158, 7))
        if match_def["tour"] == "WTA":
            speed -= 24
        rally = 1 if (ace or df) else max(2, int(rng.expovariate(1 / 4.5)) + 1)
        winner_shot = (not ace and not df) and rng.random() < 0.32
        unforced = (not ace and not df and not winner_shot) and rng.random() < 0.45
        # stats
        s = stats[srv]
        s["first_serves_total"] += 1
        if first_in:
            s["first_serves_in"] += 1
            if winner == srv:
                s["first_serve_points_won"] += 1
        else:
            s["second_serve_points_total"] += 1
            if winner == srv:
                s["second_serve_points_won"] += 1
        if ace:
            s["aces"] += 1
        if df:
            s["double_faults"] += 1
        s["fastest_serve_kmh"] = max(s["fastest_serve_kmh"], speed)
        if winner_shot:
            stats[winner]["winners"] += 1
        if unforced:
            stats[1 - winner]["unforced_errors"] += 1
        stats[winner]["total_points_won"] += 1
        if break_point:
            stats[rcv]["break_points_total"] += 1
            if winner == rcv:
                stats[rcv]["break_points_won"] += 1
        was_tb = sc.tiebreak
        ts += POINT_GAP_MS
        slam_seq += 1
        events.append({"kind": "SlamPointByPoint", "match_id": mid, "seq": slam_seq, "ts_ms": ts,
                       "payload": {"set": set_no, "game": game_no, "point": point_no,
                                   "server": srv + 1, "winner": winner + 1,
                                   "score_before": score_before, "tiebreak": was_tb,
                                   "break_point": break_point, "ace": ace, "double_fault": df,
                                   "winner_shot": winner_shot, "unforced_error": unforced,
                                   "serve_speed_kmh": speed, "rally_length": rally}})
        if sc.point(winner):
            games_completed += 1
            if not was_tb:
                stats[srv]["service_games_played"] += 1
                if winner == srv:
                    stats[srv]["service_games_won"] += 1
            mstats_seq += 1
            events.append({"kind": "MatchStats", "match_id": mid, "seq": mstats_seq, "ts_ms": ts,
                           "payload": stats_payload(stats, games_completed)})
    return events, sc


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data/replay"
    os.makedirs(out_dir, exist_ok=True)
    for match_def in MATCHES:
        events, sc = build(match_def)
        with open(os.path.join(out_dir, match_def["file"]), "w", encoding="utf-8") as f:
            for e in events:
                f.write(json.dumps(e, ensure_ascii=False, sort_keys=False, separators=(",", ":")) + "\n")
        points = sum(1 for e in events if e["kind"] == "SlamPointByPoint")
        print("%s: %d events, %d points, sets %s, winner P%d, set scores %s" % (
            match_def["match_id"], len(events), points, sc.sets, sc.winner + 1, sc.set_scores),
            file=sys.stderr)


if __name__ == "__main__":
    main()
