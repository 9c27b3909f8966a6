#!/usr/bin/env python3
"""Independent scoring oracle for the eval fixture.

Recomputes the matching and all scheme scores for
data/fixtures/eval/three_record_fixture.json from first principles (quadratic
LCS, greedy per-gold assignment, MUC-style counting) and checks the result
against data/fixtures/eval/expected.json. Shares no code with the C++
implementation on purpose.
"""

import json
import pathlib
import sys

DATASET_LABELS = {"dataset_direct_link", "dataset_landing_page"}


def lcs_len(a: str, b: str) -> int:
    best = 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
                best = max(best, cur[j])
        prev = cur
    return best


def greedy_match(pred_urls, gold_urls, min_ratio=0.0):
    taken = set()
    pairs = []
    for gi, gold in enumerate(gold_urls):
        best_ratio, best_pi = 0.0, None
        for pi, pred in enumerate(pred_urls):
            if pi in taken:
                continue
            ratio = lcs_len(pred, gold) / len(gold)
            if ratio > best_ratio:
                best_ratio, best_pi = ratio, pi
        if best_pi is not None and best_ratio > 0.0 and best_ratio >= min_ratio:
            taken.add(best_pi)
            pairs.append((gi, best_pi, best_ratio))
    missing = [gi for gi in range(len(gold_urls)) if gi not in {p[0] for p in pairs}]
    spurious = [pi for pi in range(len(pred_urls)) if pi not in taken]
    return pairs, missing, spurious


def collapse(label, binary):
    if not binary:
        return label
    return "dataset" if label in DATASET_LABELS else "non-dataset"


def score(records, scheme, binary):
    counts = dict.fromkeys(("correct", "incorrect", "partial", "missing", "spurious"), 0)
    for rec in records:
        gold_urls = [g["url"] for g in rec["golds"]]
        pred_urls = [p["url"] for p in rec["preds"]]
        pairs, missing, spurious = greedy_match(pred_urls, gold_urls)
        counts["missing"] += len(missing)
        counts["spurious"] += len(spurious)
        for gi, pi, ratio in pairs:
            gold, pred = rec["golds"][gi], rec["preds"][pi]
            url_eq = gold["url"] == pred["url"]
            label_eq = collapse(gold["label"], binary) == collapse(pred["label"], binary)
            if scheme == "strict":
                verdict = "correct" if (url_eq and label_eq) else "incorrect"
            elif scheme == "exact":
                verdict = "correct" if url_eq else "incorrect"
            elif scheme == "partial":
                verdict = "correct" if url_eq else "partial"
            elif scheme == "type":
                verdict = "correct" if label_eq else "incorrect"
            counts[verdict] += 1
    hit = counts["correct"] + 0.5 * counts["partial"]
    matched = counts["correct"] + counts["incorrect"] + counts["partial"]
    p_den = matched + counts["spurious"]
    r_den = matched + counts["missing"]
    precision = hit / p_den if p_den else 0.0
    recall = hit / r_den if r_den else 0.0
    return counts, precision, recall


def main() -> int:
    root = pathlib.Path(__file__).resolve().parent.parent
    fixture = json.loads((root / "data/fixtures/eval/three_record_fixture.json").read_text())
    expected = json.loads((root / "data/fixtures/eval/expected.json").read_text())

    failures = 0
    for mode, binary in (("multiclass", False), ("binary", True)):
        for scheme in ("strict", "exact", "partial", "type"):
            counts, precision, recall = score(fixture["records"], scheme, binary)
            want = expected[mode][scheme]
            ok = (
                counts == want["counts"]
                and precision == want["precision"]
                and recall == want["recall"]
            )
            status = "ok" if ok else "MISMATCH"
            print(f"{mode}/{scheme}: P={precision} R={recall} counts={counts} [{status}]")
            if not ok:
                print(f"  expected: {want}")
                failures += 1
    if failures:
        print(f"{failures} mismatches", file=sys.stderr)
        return 1
    print("all frozen values confirmed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
