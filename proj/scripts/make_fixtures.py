#!/usr/bin/env python3
"""Generates the synthetic fixtures under data/fixtures.

Every dataset gets train/val/test files in its native export format. Text is
built from label-specific cue words mixed with shared filler, so a small model
can learn the task but not trivially. Output is deterministic for a seed.
"""

import argparse
import json
import random
from pathlib import Path

CUES = {
    0: ["confirmed", "verified", "accurate", "official", "documented", "genuine", "correct", "backed"],
    1: ["hoax", "fabricated", "debunked", "bogus", "misleading", "doctored", "falsified", "fake"],
    2: ["unclear", "unverified", "rumored", "pending", "disputed", "uncertain", "inconclusive", "murky"],
}
FILLER = (
    "the a report says people city new study health vaccine election police video photo post "
    "shows government school water price market senator mayor doctor court week year local online "
    "claims viral image team river storm power energy bill law market company workers data science"
).split()
UKR = ["ukraine", "russia", "kyiv", "kremlin", "zelensky", "invasion"]

SIZES = {"train": 90, "val": 30, "test": 60}


def sentence(rng, label, n=10, cue_rate=0.35):
    words = []
    for _ in range(n):
        if rng.random() < cue_rate:
            words.append(rng.choice(CUES[label]))
        else:
            words.append(rng.choice(FILLER))
    words.append(rng.choice(CUES[label]))
    rng.shuffle(words)
    return " ".join(words)


def tsv_escape(s):
    return str(s).replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def write_tsv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(header) + "\n")
        for r in rows:
            f.write("\t".join(tsv_escape(r[h]) for h in header) + "\n")


def write_jsonl(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=False) + "\n")


def labels_for(rng, n, classes):
    out = [classes[i % len(classes)] for i in range(n)]
    rng.shuffle(out)
    return out


# Native label value for each unified code.
NATIVE = {
    "fak": {0: "1", 1: "0"},
    "moc": {0: "supported", 1: "refuted", 2: "NEI"},
    "ph": {0: "true", 1: "false", 2: "mixture"},
    "fv": {0: "SUPPORTS", 1: "REFUTES", 2: "NOT ENOUGH INFO"},
    "vc": {0: "SUPPORTS", 1: "REFUTES", 2: "NOT ENOUGH INFO"},
    "ngt": {0: "reliable", 1: "unreliable"},
    "mrf": {0: "real", 1: "misinfo"},
    "ham": {0: 0, 1: 1},
    "mmh": {0: "NotHate", 1: "Racist"},
    "hax": {0: "normal", 1: "hatespeech"},
    "tox": {0: "benign", 1: "toxic"},
    "pst": {0: "FAVOR", 1: "AGAINST"},
}
TERNARY = {"moc", "ph", "fv", "vc"}


def native_rows(rng, key, split, n):
    classes = [0, 1, 2] if key in TERNARY else [0, 1]
    rows = []
    for i, lab in enumerate(labels_for(rng, n, classes)):
        rid = f"{key}-{split}-{i:04d}"
        value = NATIVE[key][lab]
        claim = sentence(rng, lab)
        evid = sentence(rng, lab, n=14)
        if key == "fak":
            rows.append({"id": rid, "clean_title": claim, "image_path": f"images/{rid}.jpg", "2_way_label": value})
        elif key == "moc":
            imgs = ";".join(f"images/{rid}_{j}.jpg" for j in range(rng.randint(0, 2)))
            rows.append({"claim_id": rid, "Claim": claim, "Evidence": evid, "image_paths": imgs,
                         "cleaned_truthfulness": value})
        elif key == "ph":
            if lab == 2 and rng.random() < 0.5:
                value = "unproven"
            rows.append({"claim_id": rid, "claim": claim, "main_text": evid, "label": value})
        elif key == "fv":
            ev = [sentence(rng, lab, n=8) for _ in range(rng.randint(1, 2))]
            rows.append({"id": rid, "claim": claim, "evidence": ev, "label": value})
        elif key == "vc":
            rows.append({"unique_id": rid, "claim": claim, "evidence": evid, "label": value})
        elif key == "mrf":
            rows.append({"id": rid, "headline": claim, "gold_label": value})
        elif key == "ham":
            rows.append({"id": rid, "img": f"img/{rid}.png", "text": claim, "label": value})
        elif key == "mmh":
            if lab == 1:
                value = rng.choice(["Racist", "Sexist", "Homophobe", "Religion", "OtherHate"])
            rows.append({"id": rid, "tweet_text": claim, "img_path": f"img/{rid}.jpg", "label": value})
        elif key == "hax":
            if lab == 1:
                value = rng.choice(["offensive", "hatespeech"])
            rows.append({"post_id": rid, "post_tokens": claim.split(), "label": value})
        elif key == "tox":
            rows.append({"id": rid, "text": claim, "label": value})
        elif key == "pst":
            rows.append({"id": rid, "tweet": claim, "target": rng.choice(["Trump", "Biden", "Sanders"]),
                         "label": value})
        else:
            raise ValueError(key)
    return rows


def random_date(rng, year_lo, year_hi, before=None):
    while True:
        y = rng.randint(year_lo, year_hi)
        m = rng.randint(1, 12)
        d = rng.randint(1, 28)
        if before is None or (y, m, d) < before:
            return f"{y:04d}-{m:02d}-{d:02d}"


def ngt_rows(rng, split, n):
    rows = []
    for i, lab in enumerate(labels_for(rng, n, [0, 1])):
        rid = f"ngt-{split}-{i:04d}"
        period = i % 3
        title = sentence(rng, lab)
        if period == 0:
            date = random_date(rng, 2020, 2020, before=(2020, 12, 1))
        elif period == 1:
            date = random_date(rng, 2021, 2021)
        else:
            date = random_date(rng, 2022, 2022)
            if rng.random() < 0.8:
                words = title.split()
                words.insert(rng.randrange(len(words) + 1), rng.choice(UKR).capitalize())
                title = " ".join(words)
        rows.append({"id": rid, "title": title, "date": date, "source": "fixture", "label": NATIVE["ngt"][lab]})
    return rows


def unified(rid, claim, evidence, label, dataset, split, domain="misinformation", timestamp=None):
    return {
        "id": rid,
        "claim": claim,
        "evidence": [{"kind": "text", "content": e, "silver": False} for e in evidence],
        "label": label,
        "dataset": dataset,
        "domain": domain,
        "split": split,
        "timestamp": timestamp,
    }


def separable(rng, n=600):
    splits = ["train"] * 400 + ["val"] * 100 + ["test"] * 100
    labels = labels_for(rng, n, [0, 1, 2])
    rows = []
    for i, (split, lab) in enumerate(zip(splits, labels)):
        claim = sentence(rng, lab, n=8, cue_rate=0.5)
        evid = sentence(rng, lab, n=10, cue_rate=0.5)
        rows.append(unified(f"sep-{i:04d}", claim, [evid], lab, "moc", split))
    return rows


def scenario_claims(rng, n=500):
    labels = labels_for(rng, n, [0, 1, 2])
    return [unified(f"scn-{i:04d}", sentence(rng, lab), [sentence(rng, lab, n=12)], lab, "moc", "train")
            for i, lab in enumerate(labels)]


def annotation_rows(rng, items=36, raters=5):
    """Five participants rate each explanation; the last one answers at random."""
    q5_word = {0: "true", 1: "false", 2: "unprovable"}
    rows = []
    for gen, quality in (("gpt-4o", 4), ("gpt-3.5-turbo", 3)):
        for i in range(items):
            item = f"anno-{i:03d}"
            label = i % 3
            score = max(1, min(5, quality + rng.choice([-1, 0, 0, 1])))
            for r in range(raters):
                rater = f"p{r + 1}"
                noisy = r == raters - 1
                for q in range(1, 5):
                    yes = rng.random() < (0.5 if noisy else 0.85)
                    rows.append((item, gen, rater, f"Q{q}", "Yes" if yes else "No", label))
                if noisy:
                    q5 = rng.choice(["true", "false", "unprovable", "no"])
                elif rng.random() < 0.8:
                    q5 = q5_word[label]
                else:
                    q5 = "no"
                q5 = q5 if q5 == "no" else f"The label is {q5}"
                rows.append((item, gen, rater, "Q5", q5, label))
                q6 = rng.randint(1, 5) if noisy else max(1, min(5, score + rng.choice([0, 0, 0, 1, -1])))
                rows.append((item, gen, rater, "Q6", str(q6), label))
    words = {0: "supported", 1: "refuted", 2: "nei"}
    return [{"item_id": a, "generator": b, "annotator_id": c, "question": d, "response": e, "label": words[f]}
            for a, b, c, d, e, f in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "fixtures"))
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    out = Path(args.out)
    rng = random.Random(args.seed)

    tsv_headers = {
        "fak": ["id", "clean_title", "image_path", "2_way_label"],
        "moc": ["claim_id", "Claim", "Evidence", "image_paths", "cleaned_truthfulness"],
        "ph": ["claim_id", "claim", "main_text", "label"],
        "mrf": ["id", "headline", "gold_label"],
        "mmh": ["id", "tweet_text", "img_path", "label"],
        "tox": ["id", "text", "label"],
        "pst": ["id", "tweet", "target", "label"],
    }
    for key in ["fak", "ham", "hax", "mmh", "moc", "mrf", "pst", "ph", "tox", "fv", "vc"]:
        for split, n in SIZES.items():
            rows = native_rows(rng, key, split, n)
            if key in tsv_headers:
                write_tsv(out / "native" / key / f"{split}.tsv", tsv_headers[key], rows)
            else:
                write_jsonl(out / "native" / key / f"{split}.jsonl", rows)
    for split, n in {"train": 90, "val": 30, "test": 450}.items():
        write_jsonl(out / "native" / "ngt" / f"{split}.jsonl", ngt_rows(rng, split, n))

    write_jsonl(out / "separable" / "moc.jsonl", separable(rng))
    write_jsonl(out / "scenario" / "claims.jsonl", scenario_claims(rng))
    write_tsv(out / "anno" / "annotations.tsv",
              ["item_id", "generator", "annotator_id", "question", "response", "label"],
              annotation_rows(random.Random(args.seed + 1)))


if __name__ == "__main__":
    main()
