#!/usr/bin/env python3
"""Generates the gold question set from the replay fixtures.

Every gold answer is read straight off a feed payload, or counted from the
point-by-point stream (game winner = winner of the game's last point, set
score = games per set). Knowledge-base answers are copied from the FAQ file.
Nothing here calls the C++ engine.

    python3 tools/fixtures/make_gold.py data/replay data/kb/faq.json data/categories.json > data/eval/gold.ndjson
"""
import json
import os
import sys

FILES = ["m1_alcaraz_sinner_bo5.ndjson", "m2_sabalenka_swiatek_bo3.ndjson"]


def load(path):
    feeds = {}
    points = []
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["kind"] == "SlamPointByPoint":
                points.append(rec["payload"])
            else:
                feeds[rec["kind"]] = rec["payload"]
    return rec["match_id"], feeds, points


def set_scores(points):
    """[(games p1, games p2)] per set from game winners."""
    last = {}
    for p in points:
        last[(p["set"], p["game"])] = p["winner"]
    sets = {}
    for (s, _g), w in sorted(last.items()):
        sets.setdefault(s, [0, 0])[w - 1] += 1
    return [tuple(sets[s]) for s in sorted(sets)]


def how(point):
    if point["ace"]:
        return "with an ace"
    if point["double_fault"]:
        return "on a double fault"
    if point["winner_shot"]:
        return "with a winner"
    if point["unforced_error"]:
        return "on an unforced error"
    return "on a forced error"


def questions(match_id, feeds, points, subquestions):
    players = feeds["PlayerStats"]["players"]
    names = [p["name"] for p in players]
    last = [p["last_name"] for p in players]
    stats = feeds["MatchStats"]["players"]
    h2h = feeds["HeadToHead"]
    power = feeds["PowerIndex"]["values"]
    logistics = feeds["MatchLogistics"]
    draw = feeds["Draw"]
    out = []

    def add(qid, category, by, text, answer, sub=None):
        if sub:
            text = subquestions[sub]
        rec = {"id": f"{match_id}-{qid}", "match_id": match_id, "category": category, "answerable_by": by,
               "text": text, "gold_answer": answer}
        if sub:
            rec["subquestion_id"] = sub
        out.append(rec)

    # Match statistics: final cumulative stats per player.
    for i in (0, 1):
        s = stats[i]
        add(f"ms-aces-{i}", "MatchStatistics", "light", f"How many aces has {last[i]} hit?",
            f"{names[i]} has hit {s['aces']} aces.")
        add(f"ms-df-{i}", "MatchStatistics", "light", f"How many double faults has {last[i]} served?",
            f"{names[i]} has served {s['double_faults']} double faults.")
        add(f"ms-winners-{i}", "MatchStatistics", "light", f"How many winners has {last[i]} hit?",
            f"{names[i]} has hit {s['winners']} winners.")
        add(f"ms-ue-{i}", "MatchStatistics", "heavy", f"How many unforced errors for {last[i]}?",
            f"{names[i]} has made {s['unforced_errors']} unforced errors.")
        add(f"ms-bp-{i}", "MatchStatistics", "heavy", f"How many break points has {last[i]} converted?",
            f"{names[i]} has converted {s['break_points_won']} of {s['break_points_total']} break points.")
    add("ms-aces-sub", "MatchStatistics", "light", "",
        f"{names[0]} has hit {stats[0]['aces']} aces and {names[1]} has hit {stats[1]['aces']} aces.", "ms_aces")

    # Player statistics: PlayerStats and HeadToHead documents.
    for i in (0, 1):
        p = players[i]
        add(f"ps-rank-{i}", "PlayerStatistics", "light", f"What is {last[i]}'s ranking?",
            f"{names[i]} is ranked number {p['ranking']}.")
        add(f"ps-slams-{i}", "PlayerStatistics", "light", f"How many Grand Slam titles has {last[i]} won?",
            f"{names[i]} has won {p['slam_titles']} Grand Slam titles.")
        add(f"ps-record-{i}", "PlayerStatistics", "heavy", f"What is {last[i]}'s career record?",
            f"{names[i]} has a career record of {p['career_wins']} wins and {p['career_losses']} losses.")
    add("ps-h2h", "PlayerStatistics", "light", "What is the head to head record?",
        f"{names[0]} leads the head to head {h2h['wins'][0]}-{h2h['wins'][1]} over {h2h['matches']} matches."
        if h2h["wins"][0] >= h2h["wins"][1] else
        f"{names[1]} leads the head to head {h2h['wins'][1]}-{h2h['wins'][0]} over {h2h['matches']} matches.")
    add("ps-ranking-sub", "PlayerStatistics", "light", "",
        f"{names[0]} is ranked {players[0]['ranking']} and {names[1]} is ranked {players[1]['ranking']}.",
        "ps_ranking")

    # Predictions: PowerIndex document, and the favourite once the match is over.
    winner = points[-1]["winner"] - 1
    for i in (0, 1):
        add(f"pr-power-{i}", "Predictions", "light", f"What is {last[i]}'s power index?",
            f"{names[i]} has a power index of {power[i]}.")
    hi = 0 if power[0] >= power[1] else 1
    add("pr-power-higher", "Predictions", "heavy", "Who has the higher power index?",
        f"{names[hi]} has the higher power index, {power[hi]} against {power[1 - hi]}.")
    add("pr-favorite", "Predictions", "light", "Who is favored to win?", f"{names[winner]} is the favorite to win.")
    add("pr-comeback", "Predictions", "llm", f"Can {last[1 - winner]} still win this?",
        f"{names[1 - winner]} is the underdog; {names[winner]} is the favorite to win.")

    # Biographies: PlayerStats document.
    for i in (0, 1):
        p = players[i]
        add(f"bi-height-{i}", "Biographies", "light", f"How tall is {last[i]}?",
            f"{names[i]} is {p['height_cm']} cm tall.")
        add(f"bi-born-{i}", "Biographies", "light", f"Where was {last[i]} born?",
            f"{names[i]} was born in {p['birthplace']}.")
        add(f"bi-coach-{i}", "Biographies", "light", f"Who coaches {last[i]}?",
            f"{names[i]} is coached by {p['coach']}.")
        add(f"bi-age-{i}", "Biographies", "light", f"How old is {last[i]}?", f"{names[i]} is {p['age']} years old, born on {p['date_of_birth']}.")
    add("bi-plays-sub", "Biographies", "light", "",
        f"{names[0]} plays {players[0]['plays']} and {names[1]} plays {players[1]['plays']}.", "bi_hand")

    # Logistics: MatchLogistics and Draw documents.
    add("lo-court", "Logistics", "light", "What court is the match on?", f"The match is on {logistics['court']}.")
    add("lo-venue", "Logistics", "light", "Where is the match being played?",
        f"The match is played on {logistics['court']} at {logistics['venue']}.")
    add("lo-round", "Logistics", "light", "What round is this match?", f"This match is the {draw['round_name']} of the {draw['event']}.")
    add("lo-surface", "Logistics", "light", "What surface are they playing on?",
        f"The match is played on {logistics['surface']}.")
    add("lo-format", "Logistics", "light", "How many sets is the match?",
        f"The match is best of {logistics['best_of']} sets.")
    add("lo-next", "Logistics", "light", "Who does the winner play next?",
        f"The winner plays {draw['next_opponent']} in the {draw['next_round']}.")

    # Live point by point: counted from the point stream.
    sets = set_scores(points)
    set_wins = [sum(1 for a, b in sets if a > b), sum(1 for a, b in sets if b > a)]
    score = ", ".join(f"{a}-{b}" for a, b in sets)
    add("lp-score", "LivePointByPoint", "light", "What is the score?",
        f"{names[winner]} won the match {max(set_wins)} sets to {min(set_wins)}: {score}.")
    lp = points[-1]
    add("lp-last-point", "LivePointByPoint", "light", "Who won the last point?",
        f"{names[lp['winner'] - 1]} won the last point, {how(lp)}, after a {lp['rally_length']}-shot rally.")
    add("lp-rally", "LivePointByPoint", "light", "What was the longest rally?",
        f"The longest rally was {max(p['rally_length'] for p in points)} shots.")
    tiebreaks = len({p["set"] for p in points if p["tiebreak"]})
    add("lp-tiebreaks", "LivePointByPoint", "light", "How many tiebreaks have there been?",
        f"There have been {tiebreaks} tiebreaks.")
    game = [p for p in points if (p["set"], p["game"]) == (lp["set"], lp["game"])]
    kept = "a hold" if lp["winner"] == game[0]["server"] else "a break"
    add("lp-last-game-sub", "LivePointByPoint", "light", "",
        f"The last game, set {lp['set']} game {lp['game']}, went to {names[lp['winner'] - 1]}, {kept} over {len(game)} points.",
        "lp_last_game")
    return out


def kb_questions(faq):
    answers = {e["id"]: e["answer"] for e in faq["entries"]}
    asked = [
        ("parking", "Where can I park?"),
        ("gates", "When do the gates open?"),
        ("food", "Where can I get something to eat?"),
        ("tickets", "How do I buy tickets?"),
        ("weather", "What happens if it rains?"),
        ("bags", "Can I bring a backpack?"),
        ("restrooms", "Where are the restrooms?"),
        ("transport", "Is there a shuttle bus?"),
    ]
    out = []
    for kid, text in asked:
        if kid in answers:
            out.append({"id": f"KB-{kid}", "match_id": "M1", "category": None, "answerable_by": "kb",
                        "text": text, "gold_answer": answers[kid]})
    return out


def main():
    replay_dir, faq_path, categories_path = sys.argv[1], sys.argv[2], sys.argv[3]
    with open(categories_path) as f:
        subquestions = {q["id"]: q["text"] for t in json.load(f)["tiles"] for q in t["subquestions"]}
    records = []
    for name in FILES:
        records += questions(*load(os.path.join(replay_dir, name)), subquestions)
    with open(faq_path) as f:
        records += kb_questions(json.load(f))
    print("# Gold questions generated by tools/fixtures/make_gold.py; do not edit by hand.")
    for r in records:
        print(json.dumps(r, ensure_ascii=False))


if __name__ == "__main__":
    main()
