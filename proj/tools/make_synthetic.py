#!/usr/bin/env python3
"""Writes the bundled synthetic dataset (deterministic for a given seed)."""
import argparse
import datetime
import pathlib
import random

ENTITIES = [
    "Aldoria", "Brevik", "Castellan", "Dunmore", "Elvaria", "Farrow", "Galen_Ministry",
    "Harrow_Council", "Istra", "Jorvik_Police", "Kessel", "Lumen_Party", "Marrow_Bank",
    "Norvale", "Ostrand", "Pellin_Citizens", "Quarry_Union", "Rothmere", "Sablewood",
    "Tamsin_Court", "Ulric_Press", "Varga", "Wendel_Army", "Xanthe_NGO",
]
BASE = ["Make_a_visit", "Host_a_visit", "Provide_aid", "Express_intent_to_cooperate",
        "Engage_in_negotiation", "Sign_formal_agreement", "Criticize_or_denounce", "Make_statement"]
EPOCH = datetime.date(2014, 1, 1)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic"))
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--days", type=int, default=90)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    facts = set()

    def add(s, r, o, t):
        if s != o and 0 <= t < args.days:
            facts.add((s, r, o, t))

    pairs = [(rng.choice(ENTITIES), rng.choice(ENTITIES)) for _ in range(40)]
    for _ in range(270):
        s, o = rng.choice(pairs)
        t = rng.randrange(args.days)
        kind = rng.random()
        if kind < 0.35:
            # a visit is hosted by the other side and tends to lead to negotiation
            add(s, "Make_a_visit", o, t)
            add(o, "Host_a_visit", s, t)
            if rng.random() < 0.7:
                add(s, "Engage_in_negotiation", o, t + rng.randint(1, 3))
        elif kind < 0.6:
            add(s, "Express_intent_to_cooperate", o, t)
            if rng.random() < 0.6:
                add(s, "Sign_formal_agreement", o, t + rng.randint(1, 4))
        elif kind < 0.75:
            # aid routed through an intermediary
            z = rng.choice(ENTITIES)
            add(s, "Provide_aid", z, t)
            if rng.random() < 0.6:
                add(z, "Provide_aid", o, t + rng.randint(0, 2))
                add(s, "Make_statement", o, t + rng.randint(3, 5))
        else:
            add(s, "Criticize_or_denounce", o, t)
            if rng.random() < 0.5:
                add(o, "Criticize_or_denounce", s, t + rng.randint(1, 2))

    rows = sorted(facts, key=lambda q: (q[3], q[0], q[1], q[2]))
    hist_end, cur_end = int(args.days * 0.6), int(args.days * 0.8)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    splits = {"historical.tsv": [], "current.tsv": [], "future.tsv": []}
    for s, r, o, t in rows:
        name = "historical.tsv" if t < hist_end else "current.tsv" if t < cur_end else "future.tsv"
        day = EPOCH + datetime.timedelta(days=t)
        splits[name].append(f"{s}\t{r.replace('_', ' ')}\t{o}\t{day.isoformat()}\n")
    for name, lines in splits.items():
        (out / name).write_text("".join(lines))
    print({k: len(v) for k, v in splits.items()})


if __name__ == "__main__":
    main()
