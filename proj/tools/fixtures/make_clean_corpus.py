#!/usr/bin/env python3
"""Writes tests/data/clean_corpus.txt: 200 benign fan questions that mention
allowlisted names and words containing lexicon substrings."""
import itertools
import pathlib

NAMES = ["Carlos Alcaraz", "Alcaraz", "Carlitos", "Jannik Sinner", "Sinner",
         "Aryna Sabalenka", "Sabalenka", "Iga Swiatek", "Swiatek", "Dick Norman",
         "Dickson", "Woodforde"]

TEMPLATES = [
    "How many aces has {n} hit so far?",
    "What is {n}'s first serve percentage today?",
    "Can you assess how {n} is returning in this set?",
    "Is {n} playing a classic baseline game?",
    "What was {n}'s passing shot count in set two?",
    "Where was {n} born?",
    "Who coaches {n} these days?",
    "How tall is {n}?",
    "What is the likelihood {n} wins the match?",
    "Did {n} save the break point in the last game?",
    "How did {n} do at the Scunthorpe exhibition?",
    "Does {n} prefer grass or hard courts?",
    "Has {n} ever played in Amsterdam or Essex?",
    "What happened on the last point {n} served?",
    "Tell me about {n}'s career titles.",
    "Is {n} a good assist for doubles partners?",
    "What rally length is typical for {n}?",
    "Give me the head to head record for {n}.",
]

EXTRA = [
    "What time does the match start on Court 1?",
    "Which court is the semifinal on?",
    "Who won the last set?",
    "What is the score in the fifth set?",
    "Is there a tiebreak coming up?",
    "How many double faults in the match?",
    "The crowd loved that scrap for every point.",
    "That was a prickly backhand exchange.",
    "Can you parse the serve stats for me?",
    "Who has the edge according to the power index?",
    "Hello, what round is this?",
    "The shell of the stadium roof looks great.",
    "Is the draw published for the next round?",
    "How fast was the fastest serve today?",
    "Which player has more unforced errors?",
    "The grass looks fast, is the bass line in the music loud?",
    "Arsenal fans are here cheering too.",
    "Mississippi has a great tennis program.",
    "Was that shot a winner or an error?",
    "What is the surface at this venue?",
]


def main():
    out = []
    seen = set()
    for t, n in itertools.product(TEMPLATES, NAMES):
        s = t.format(n=n)
        if s not in seen:
            seen.add(s)
            out.append(s)
        if len(out) == 180:
            break
    out.extend(EXTRA)
    assert len(out) == 200, len(out)
    path = pathlib.Path(__file__).resolve().parents[2] / "tests" / "data" / "clean_corpus.txt"
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    print(f"wrote {len(out)} sentences to {path}")


if __name__ == "__main__":
    main()
