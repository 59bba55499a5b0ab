"""Write fixtures/qa/failure_fixture.jsonl: 1000 explicit and 1000 implicit
answer records for occupation questions, with 13 explicit and 146 implicit
failures at seeded positions. Run from the crate root."""

import json
import random

rng = random.Random(146)
labels = [("television actor", "actor"), ("film actor", "actor"), ("stage actor", "actor"),
          ("film director", "director"), ("actor", None)]
explicit_fail = set(rng.sample(range(1000), 13))
implicit_fail = set(rng.sample(range(1000), 146))
refusals = ["I cannot determine this from the text.", "Unknown.", "", "The text does not mention it."]

rows = []
for i in range(1000):
    eid = f"Q{800000000 + i}"
    label, hyper = labels[i % len(labels)]
    question = f"What's Person {i}'s occupation?"
    for cond, failed in (("explicit", i in explicit_fail), ("implicit", i in implicit_fail)):
        if failed:
            raw = refusals[rng.randrange(len(refusals))]
            rows.append(dict(schema="answer/1", entity_id=eid, condition=cond, predicate_id="P106",
                             question_text=question, raw_answer=raw or None, normalized_answer=None,
                             score=0.0, is_failure=True, semantic_distance=None))
            continue
        if cond == "implicit" and hyper and rng.random() < 0.4:
            answer, score = hyper, 0.5
            sim = round(2 * 1 / (1 + len(label.split())), 6)
        else:
            answer, score, sim = label, 1.0, 1.0
        rows.append(dict(schema="answer/1", entity_id=eid, condition=cond, predicate_id="P106",
                         question_text=question, raw_answer=answer.capitalize(), normalized_answer=answer,
                         score=score, is_failure=False, semantic_distance=sim))

with open("fixtures/qa/failure_fixture.jsonl", "w") as f:
    for r in rows:
        f.write(json.dumps(r, separators=(",", ":")) + "\n")
