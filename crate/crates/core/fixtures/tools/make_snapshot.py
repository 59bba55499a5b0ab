#!/usr/bin/env python3
"""Regenerate fixtures/snapshot: a small offline Wikidata snapshot in the
layout read by `FixtureSource`.

Contains Vincent Rodriguez III (Q21931962) with his biographical statements
plus identifier/media/url noise, 119 synthetic humans (ids Q900000001+),
four non-human candidates and one human carrying only bookkeeping claims.
Output is deterministic.
"""
import json
import os
import random
import shutil

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "snapshot")

PROPS = {
    "P18": ("image", "commons-media"),
    "P19": ("place of birth", "wikibase-item"),
    "P21": ("sex or gender", "wikibase-item"),
    "P27": ("country of citizenship", "wikibase-item"),
    "P31": ("instance of", "wikibase-item"),
    "P69": ("educated at", "wikibase-item"),
    "P91": ("sexual orientation", "wikibase-item"),
    "P103": ("native language", "wikibase-item"),
    "P106": ("occupation", "wikibase-item"),
    "P345": ("IMDb ID", "external-id"),
    "P373": ("Commons category", "string"),
    "P551": ("residence", "wikibase-item"),
    "P569": ("date of birth", "time"),
    "P646": ("Freebase ID", "external-id"),
    "P734": ("family name", "wikibase-item"),
    "P735": ("given name", "wikibase-item"),
    "P856": ("official website", "url"),
    "P1412": ("languages spoken, written or signed", "wikibase-item"),
    "P2002": ("X username", "external-id"),
    "P6886": ("writing language", "wikibase-item"),
}

LABELS = {p: v[0] for p, v in PROPS.items()}


def item(pid, qid, label):
    LABELS[qid] = label
    return (pid, {"type": "wikibase-entityid",
                  "value": {"entity-type": "item", "numeric-id": int(qid[1:]), "id": qid}})


def time(pid, iso):
    return (pid, {"type": "time", "value": {"time": iso, "timezone": 0, "before": 0, "after": 0,
                                            "precision": 11,
                                            "calendarmodel": "http://www.wikidata.org/entity/Q1985727"}})


def string(pid, s):
    return (pid, {"type": "string", "value": s})


def payload(qid, label, claims):
    out = {}
    for pid, dv in claims:
        out.setdefault(pid, []).append({
            "mainsnak": {"snaktype": "value", "property": pid, "datatype": PROPS[pid][1], "datavalue": dv},
            "type": "statement",
            "rank": "normal",
        })
    return {"entities": {qid: {"type": "item", "id": qid,
                               "labels": {"en": {"language": "en", "value": label}},
                               "claims": out}}}


def vincent():
    return payload("Q21931962", "Vincent Rodriguez III", [
        item("P31", "Q5", "human"),
        item("P19", "Q62", "San Francisco"),
        item("P21", "Q6581097", "male"),
        item("P735", "Q18057751", "Vincent"),
        item("P106", "Q33999", "actor"),
        item("P106", "Q10798782", "television actor"),
        item("P27", "Q30", "United States"),
        item("P91", "Q6636", "homosexuality"),
        time("P569", "+1982-08-10T00:00:00Z"),
        item("P69", "Q7122847", "Pacific Conservatory of the Performing Arts"),
        item("P69", "Q7989124", "Westmoor High School"),
        item("P734", "Q1384556", "Rodriguez"),
        item("P551", "Q370465", "Daly City"),
        item("P551", "Q60", "New York City"),
        item("P551", "Q1145483", "North Hollywood"),
        item("P1412", "Q1860", "English"),
        item("P103", "Q1860", "English"),
        item("P6886", "Q1860", "English"),
        string("P18", "Vincent Rodriguez III 2019.jpg"),
        string("P345", "nm1234567"),
        string("P646", "/m/0abc12"),
        string("P2002", "vincentrodriguez3"),
        string("P373", "Vincent Rodriguez III"),
        string("P856", "https://example.org/vincent"),
    ])


GIVEN = [("Alma", "F"), ("Bruno", "M"), ("Carla", "F"), ("Dario", "M"), ("Elena", "F"),
         ("Felix", "M"), ("Greta", "F"), ("Hugo", "M"), ("Ines", "F"), ("Jonas", "M"),
         ("Klara", "F"), ("Leon", "M"), ("Marta", "F"), ("Nico", "M"), ("Olga", "F"),
         ("Pavel", "M"), ("Rosa", "F"), ("Sven", "M"), ("Tilda", "F"), ("Umberto", "M")]
FAMILY = ["Abarca", "Brandt", "Castell", "Dorn", "Esposito", "Falk", "Grimaldi", "Hartmann",
          "Ibarra", "Jansen", "Kovac", "Lindqvist", "Moreau", "Novak", "Ortega", "Petrov",
          "Quist", "Rinaldi", "Sandoval", "Thorne", "Ulrich", "Varga", "Weber", "Yilmaz"]
TOP_OCC = [("Q33999", "actor"), ("Q10800557", "film actor"), ("Q10798782", "television actor"),
           ("Q2259451", "stage actor"), ("Q2526255", "film director")]
OTHER_OCC = [("Q177220", "singer"), ("Q1028181", "painter"), ("Q82955", "politician"),
             ("Q1930187", "journalist"), ("Q49757", "poet")]
CITIES = [("Q62", "San Francisco"), ("Q60", "New York City"), ("Q90", "Paris"), ("Q84", "London"),
          ("Q64", "Berlin"), ("Q220", "Rome"), ("Q1490", "Tokyo"), ("Q1492", "Barcelona"),
          ("Q65", "Los Angeles"), ("Q1297", "Chicago")]


def synthetic(rng, n):
    qid = f"Q{900000000 + n}"
    given, sex = GIVEN[rng.randrange(len(GIVEN))]
    family = FAMILY[rng.randrange(len(FAMILY))]
    label = f"{given} {family}"
    claims = [item("P31", "Q5", "human"),
              item("P21", "Q6581072" if sex == "F" else "Q6581097", "female" if sex == "F" else "male"),
              item("P735", f"Q{800000000 + GIVEN.index((given, sex))}", given),
              item("P734", f"Q{810000000 + FAMILY.index(family)}", family)]
    if rng.random() < 0.85:
        occ = TOP_OCC[rng.randrange(len(TOP_OCC))]
    else:
        occ = OTHER_OCC[rng.randrange(len(OTHER_OCC))]
    if occ[1] in ("film actor", "television actor", "stage actor") and rng.random() < 0.2:
        claims.append(item("P106", "Q33999", "actor"))
    claims.append(item("P106", *occ))
    if rng.random() < 0.5:
        y, m, d = rng.randrange(1900, 2000), rng.randrange(1, 13), rng.randrange(1, 29)
        claims.append(time("P569", f"+{y:04d}-{m:02d}-{d:02d}T00:00:00Z"))
    if rng.random() < 0.3:
        claims.append(item("P19", *CITIES[rng.randrange(len(CITIES))]))
    if rng.random() < 0.5:
        claims.append(string("P18", f"{label}.jpg"))
    if rng.random() < 0.6:
        claims.append(string("P345", f"nm{rng.randrange(10**6, 10**7)}"))
    if rng.random() < 0.4:
        claims.append(string("P646", f"/m/0{rng.randrange(10**4, 10**5)}"))
    if rng.random() < 0.3:
        claims.append(string("P373", label))
    if rng.random() < 0.2:
        claims.append(string("P856", f"https://example.org/{qid}"))
    return qid, payload(qid, label, claims)


def non_human(qid, label, cls, cls_label):
    return qid, payload(qid, label, [item("P31", cls, cls_label)])


def main():
    rng = random.Random(2024)
    entities = {"Q21931962": vincent()}
    for n in range(1, 120):
        qid, p = synthetic(rng, n)
        entities[qid] = p
    for qid, label, cls, cls_label in [("Q900000901", "Harbor Bridge", "Q12280", "bridge"),
                                       ("Q900000902", "Moonlight Sonata Tribute", "Q7725634", "literary work"),
                                       ("Q900000903", "Blue Ridge Hotel", "Q27686", "hotel"),
                                       ("Q900000904", "Comet Tail", "Q3559", "comet")]:
        entities[qid] = non_human(qid, label, cls, cls_label)[1]
    entities["Q900000905"] = payload("Q900000905", "Only Identifiers", [
        item("P31", "Q5", "human"), string("P345", "nm7654321"), string("P18", "x.jpg"),
        string("P646", "/m/0zzz")])

    ids = sorted(entities)
    rng.shuffle(ids)
    if os.path.isdir(OUT):
        shutil.rmtree(OUT)
    os.makedirs(os.path.join(OUT, "entities"))
    for qid, p in entities.items():
        with open(os.path.join(OUT, "entities", f"{qid}.json"), "w") as f:
            json.dump(p, f, indent=1, sort_keys=True)
            f.write("\n")
    with open(os.path.join(OUT, "candidates.json"), "w") as f:
        json.dump({"pool_size": len(ids), "by_offset": {str(i): q for i, q in enumerate(ids)}}, f, indent=1)
        f.write("\n")
    with open(os.path.join(OUT, "labels.json"), "w") as f:
        json.dump(LABELS, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
