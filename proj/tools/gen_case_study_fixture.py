#!/usr/bin/env python3
"""Generate the 59-query case-study fixture and its judge adherence table.

Rows are built so that the relevance cascade decides every context by exact
substring, composite accuracy is decided by containment, and the adherence
scores served by the mock judge average 0.84.

Usage: gen_case_study_fixture.py OUT_DIR
"""

import json
import random
import sys
from pathlib import Path

ADJ = ["annual", "biennial", "quarterly", "monthly", "weekly", "daily", "routine", "targeted"]
NOUN = ["spirometry", "colonoscopy", "mammography", "audiometry",
        "dermoscopy", "tonometry", "ultrasonography", "densitometry"]
WRONG_ADJ = ["gentle", "herbal", "evening", "seasonal", "outdoor"]
WRONG_NOUN = ["stretching", "tea", "walks", "journaling", "gardening"]
COHORTS = ["adults", "adolescents", "smokers", "athletes", "teachers", "farmers", "retirees",
           "students", "pilots", "nurses", "drivers", "bakers"]
FILLER = [
    "The regional office updated parking permits and cafeteria hours.",
    "Staff meetings moved to the north wing conference room.",
    "Invoices are processed within ten business days of receipt.",
    "The newsletter archive lists holiday closures for every branch.",
    "Visitors should sign the lobby register before entering.",
    "Printer cartridges are stocked in the supply closet near reception.",
    "Elevator maintenance is scheduled for the second floor on Fridays.",
    "Volunteers coordinate the spring fundraising picnic each year.",
]

HIT_TEMPLATES = [
    "Current guidance for {cohort}: {gt} is advised. Review occurs at each visit.",
    "Clinic protocol lists {gt} for {cohort} as the default schedule.",
    "An earlier bulletin also mentioned {gt} when discussing {cohort}.",
]

# (hit pattern, number of rows) over ranks 1..3
PATTERNS = [
    ((1, 1, 0), 13),
    ((0, 1, 0), 4),
    ((1, 0, 0), 12),
    ((1, 0, 1), 3),
    ((0, 0, 1), 2),
    ((0, 0, 0), 25),
]


def build():
    rng = random.Random(20240601)
    truths = [f"{a} {n}" for a in ADJ for n in NOUN]
    rng.shuffle(truths)
    wrongs = [f"{a} {n}" for a in WRONG_ADJ for n in WRONG_NOUN]
    rng.shuffle(wrongs)

    rows = [p for p, n in PATTERNS for _ in range(n)]
    hit_rows = [i for i, p in enumerate(rows) if any(p)]
    miss_rows = [i for i, p in enumerate(rows) if not any(p)]

    # (correct, adherence) per row
    outcome = {}
    for j, i in enumerate(hit_rows):
        if j < 5:
            outcome[i] = (False, 0.40)   # found but not used
        elif j < 12:
            outcome[i] = (False, 0.95)   # found, adherent, still wrong
        else:
            outcome[i] = (True, 0.95)
    rejection = [0.32, 0.32, 0.32, 0.32, 0.33]
    for j, i in enumerate(miss_rows):
        outcome[i] = (True, 0.92) if j < 20 else (False, rejection[j - 20])

    order = list(range(len(rows)))
    rng.shuffle(order)

    records, adherence = [], {}
    wrong_iter = iter(wrongs)
    for qn, i in enumerate(order, start=1):
        gt = truths[qn - 1]
        cohort = COHORTS[qn % len(COHORTS)]
        correct, adh = outcome[i]
        answer = f"Current advice: {gt}." if correct else f"Try {next(wrong_iter)} instead."
        contexts = []
        for r, hit in enumerate(rows[i], start=1):
            if hit:
                text = HIT_TEMPLATES[r - 1].format(cohort=cohort, gt=gt)
            else:
                text = FILLER[(qn + r) % len(FILLER)]
            contexts.append({"rank": r, "text": text})
        records.append({
            "query_id": f"q{qn:03d}",
            "question": f"Which screening schedule is advised for {cohort} in case {qn}?",
            "ground_truth": gt,
            "answer": answer,
            "contexts": contexts,
            "task_type": "short_answer",
        })
        adherence[answer] = adh
    return records, adherence


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    out.mkdir(parents=True, exist_ok=True)
    records, adherence = build()
    with open(out / "case_study.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")
    with open(out / "case_study_adherence.json", "w") as f:
        json.dump(adherence, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
