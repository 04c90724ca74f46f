#!/usr/bin/env python3
"""Writes the bundled fixture corpus.

data/fixture/stories.jsonl   64 templated stories with hand-known counts
data/fixture/accident_story.jsonl   one hand-parsed story with three characters

Every context sentence has the shape "<Subj> <verb> the <obj> ." and is the
root clause with the subject as nsubj, so the experience count of a story's
ending character is exactly the number of context sentences it leads.
"""

import argparse
import json
from pathlib import Path

NAMES = ["Tom", "Anna", "Sam", "Lucy", "Ben", "Mia", "I"]
VERBS = ["bought", "lost", "broke", "found", "cooked", "painted"]
LEMMAS = {"bought": "buy", "lost": "lose", "broke": "break", "found": "find",
          "cooked": "cook", "painted": "paint", "loved": "love", "missed": "miss",
          "fixed": "fix", "kept": "keep", "ate": "eat", "sold": "sell"}
CONSEQUENCE = {"bought": "loved", "lost": "missed", "broke": "fixed", "found": "kept",
               "cooked": "ate", "painted": "sold"}
OBJECTS = ["car", "cake", "book", "lamp", "boat", "chair"]

CONTEXT_LEN = 4
SUFFICIENT = 56
SINGLE = 4   # ending character leads one context sentence
ABSENT = 4   # ending character never appears in the context


def token(i, form, lemma, upos, head, deprel):
    return [i, form, lemma, upos, head, deprel]


def clause(subj, verb, obj):
    pron = subj == "I"
    return [
        token(1, subj, subj, "PRON" if pron else "PROPN", 2, "nsubj"),
        token(2, verb, LEMMAS[verb], "VERB", 0, "root"),
        token(3, "the", "the", "DET", 4, "det"),
        token(4, obj, obj, "NOUN", 2, "obj"),
        token(5, ".", ".", "PUNCT", 2, "punct"),
    ]


def expected_count(i):
    if i < SUFFICIENT:
        return 2 + i % 3
    if i < SUFFICIENT + SINGLE:
        return 1
    return 0


def story(i):
    count = expected_count(i)
    hero = NAMES[i % len(NAMES)]
    others = [n for n in NAMES if n != hero]
    other = others[i % len(others)]
    # Leading sentences go to the other character, the rest to the hero.
    subjects = [other] * (CONTEXT_LEN - count) + [hero] * count
    if count == 0:
        subjects = [other, others[(i + 2) % len(others)]] * (CONTEXT_LEN // 2)
    context = []
    last = None
    for j, subj in enumerate(subjects):
        verb = VERBS[(i + j) % len(VERBS)]
        obj = OBJECTS[(2 * i + j) % len(OBJECTS)]
        context.append(clause(subj, verb, obj))
        if subj == hero or count == 0:
            last = (verb, obj)
    verb, obj = last
    ending = clause(hero, CONSEQUENCE[verb], obj)
    return {"id": f"fx-{i:03d}", "context": context, "ending": ending}, count


def accident():
    t = token
    context = [
        [t(1, "I", "I", "PRON", 2, "nsubj"), t(2, "ran", "run", "VERB", 0, "root"),
         t(3, "and", "and", "CCONJ", 4, "cc"), t(4, "climbed", "climb", "VERB", 2, "conj"),
         t(5, "over", "over", "ADP", 7, "case"), t(6, "the", "the", "DET", 7, "det"),
         t(7, "fence", "fence", "NOUN", 4, "obl"), t(8, ".", ".", "PUNCT", 2, "punct")],
        [t(1, "My", "my", "PRON", 2, "nmod:poss"), t(2, "son", "son", "NOUN", 4, "nsubj"),
         t(3, "was", "be", "AUX", 4, "aux"), t(4, "lying", "lie", "VERB", 0, "root"),
         t(5, "in", "in", "ADP", 8, "case"), t(6, "the", "the", "DET", 8, "det"),
         t(7, "pea", "pea", "NOUN", 8, "compound"), t(8, "gravel", "gravel", "NOUN", 4, "obl"),
         t(9, "on", "on", "ADP", 11, "case"), t(10, "the", "the", "DET", 11, "det"),
         t(11, "road", "road", "NOUN", 4, "obl"), t(12, ".", ".", "PUNCT", 4, "punct")],
        [t(1, "The", "the", "DET", 2, "det"), t(2, "car", "car", "NOUN", 4, "nsubj"),
         t(3, "had", "have", "AUX", 4, "aux"), t(4, "swerved", "swerve", "VERB", 0, "root"),
         t(5, "just", "just", "ADV", 7, "advmod"), t(6, "in", "in", "ADP", 7, "case"),
         t(7, "time", "time", "NOUN", 4, "obl"), t(8, ".", ".", "PUNCT", 4, "punct")],
        [t(1, "I", "I", "PRON", 2, "nsubj"), t(2, "raged", "rage", "VERB", 0, "root"),
         t(3, "at", "at", "ADP", 5, "case"), t(4, "the", "the", "DET", 5, "det"),
         t(5, "driver", "driver", "NOUN", 2, "obl"), t(6, "for", "for", "SCONJ", 9, "mark"),
         t(7, "not", "not", "PART", 9, "advmod"), t(8, "even", "even", "ADV", 9, "advmod"),
         t(9, "stopping", "stop", "VERB", 2, "advcl"), t(10, ".", ".", "PUNCT", 2, "punct")],
    ]
    ending = [t(1, "I", "I", "PRON", 2, "nsubj"), t(2, "called", "call", "VERB", 0, "root"),
              t(3, "911", "911", "NUM", 2, "obj"), t(4, "to", "to", "PART", 5, "mark"),
              t(5, "come", "come", "VERB", 2, "xcomp"), t(6, "get", "get", "VERB", 5, "xcomp"),
              t(7, "my", "my", "PRON", 8, "nmod:poss"), t(8, "child", "child", "NOUN", 6, "obj"),
              t(9, ".", ".", "PUNCT", 2, "punct")]
    return {"id": "accident", "context": context, "ending": ending}


def dump(path, records):
    with open(path, "w") as f:
        for r in records:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "fixture"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stories, counts = zip(*(story(i) for i in range(SUFFICIENT + SINGLE + ABSENT)))
    dump(out / "stories.jsonl", stories)
    dump(out / "accident_story.jsonl", [accident()])
    with open(out / "counts.tsv", "w") as f:
        f.write("story_id\texperience_count\n")
        for s, c in zip(stories, counts):
            f.write(f"{s['id']}\t{c}\n")


if __name__ == "__main__":
    main()
