"""Brute-force reference values for the caption metric golden suite."""
import json
import math
import string
from collections import Counter
from itertools import combinations

PUNCT = set(string.punctuation)


def tok(s):
    out = []
    for w in s.lower().split():
        w = "".join(c for c in w if c not in PUNCT)
        if w:
            out.append(w)
    return out


def grams(t, n):
    return Counter(tuple(t[i:i + n]) for i in range(len(t) - n + 1))


def bleu(c, refs):
    c = tok(c)
    rs = [tok(r) for r in refs]
    if not c:
        return 0.0
    logs = 0.0
    for n in range(1, 5):
        cg = grams(c, n)
        total = sum(cg.values())
        clipped = sum(min(v, max(grams(r, n)[g] for r in rs)) for g, v in cg.items())
        p = clipped / total if total and clipped else 1e-9
        logs += math.log(p)
    closest = min((abs(len(r) - len(c)), len(r)) for r in rs)[1]
    bp = 1.0 if len(c) > closest else math.exp(1 - closest / len(c))
    return bp * math.exp(logs / 4)


def lcs_brute(a, b):
    # longest common subsequence by exhaustive search over subsequences of the shorter side
    if len(a) > len(b):
        a, b = b, a
    for k in range(len(a), 0, -1):
        for idx in combinations(range(len(a)), k):
            sub = [a[i] for i in idx]
            j = 0
            for w in b:
                if j < k and w == sub[j]:
                    j += 1
            if j == k:
                return k
    return 0


def rouge(c, refs):
    c = tok(c)
    best = 0.0
    for r in refs:
        r = tok(r)
        l = lcs_brute(c, r)
        if l == 0:
            continue
        p, rec = l / len(c), l / len(r)
        b2 = 1.44
        best = max(best, (1 + b2) * p * rec / (rec + b2 * p))
    return best


def meteor(c, refs):
    c = tok(c)
    best = 0.0
    for r in refs:
        r = tok(r)
        used = [False] * len(r)
        align = []
        for i, w in enumerate(c):
            for j, x in enumerate(r):
                if not used[j] and x == w:
                    used[j] = True
                    align.append((i, j))
                    break
        m = len(align)
        if m == 0:
            continue
        chunks = 1 + sum(1 for k in range(1, m)
                         if not (align[k][0] == align[k - 1][0] + 1 and align[k][1] == align[k - 1][1] + 1))
        p, rec = m / len(c), m / len(r)
        f = p * rec / (0.9 * p + 0.1 * rec)
        best = max(best, f * (1 - 0.5 * (chunks / m) ** 3))
    return best


def cider(cands, refs):
    N = len(refs)
    df = Counter()
    for img, rl in refs.items():
        seen = set()
        for r in rl:
            t = tok(r)
            for n in range(1, 5):
                seen.update(grams(t, n).keys())
        df.update(seen)

    def vec(t, n):
        return {g: v * (math.log(N) - math.log(max(1, df[g]))) for g, v in grams(t, n).items()}

    out = {}
    for img, rl in refs.items():
        c = tok(cands[img])
        s = 0.0
        for n in range(1, 5):
            cv = vec(c, n)
            cn = math.sqrt(sum(x * x for x in cv.values()))
            for r in rl:
                rv = vec(tok(r), n)
                rn = math.sqrt(sum(x * x for x in rv.values()))
                if cn == 0 or rn == 0:
                    continue
                s += sum(v * rv.get(g, 0.0) for g, v in cv.items()) / (cn * rn)
        out[img] = 10 * s / (4 * len(rl))
    return out


CASES = [
    ("the cat sat on the mat", ["the cat sat on a mat"]),
    ("a b c d", ["a c d"]),
    ("Heavy rain reduces visibility on the highway.", ["Heavy rain on the highway reduces visibility.",
                                                         "Rain makes the highway hard to see."]),
    ("glare from the low sun hides the traffic light", ["the low sun causes glare that hides a traffic light",
                                                        "sun glare hides the light"]),
    ("fog", ["dense fog on a rural road"]),
    ("a pedestrian crosses the wet street at night near parked cars",
     ["a pedestrian crossing a wet street at night", "parked cars near a crosswalk at night"]),
    ("snow covers the lane markings", ["lane markings are covered by snow", "snow covers the road"]),
    ("the truck ahead blocks the view of the intersection",
     ["a truck blocks the view ahead", "the intersection is hidden behind a truck",
      "view of the intersection is blocked"]),
    ("cyclist cyclist cyclist on the road", ["a cyclist rides on the road"]),
    ("headlight reflections on wet asphalt confuse the camera",
     ["reflections from headlights on the wet asphalt confuse the perception camera"]),
]


def main():
    cases = []
    for cand, refs in CASES:
        cases.append({"candidate": cand, "references": refs, "bleu4": bleu(cand, refs),
                      "rouge_l": rouge(cand, refs), "meteor_lite": meteor(cand, refs)})
    cands = {f"img{i}": c for i, (c, _) in enumerate(CASES)}
    refs = {f"img{i}": r for i, (_, r) in enumerate(CASES)}
    toy_c = {"a": "a car on the road", "b": "rain on the windshield", "c": "a dark tunnel entrance"}
    toy_r = {"a": ["a car on a wet road"], "b": ["heavy rain on the windshield", "rain drops"],
             "c": ["the tunnel entrance is dark"]}
    json.dump({"cases": cases,
               "cider_suite": {"candidates": cands, "references": refs, "scores": cider(cands, refs)},
               "cider_toy": {"candidates": toy_c, "references": toy_r, "scores": cider(toy_c, toy_r)}},
              open(__file__.replace("gen_metric_golden.py", "metric_golden.json"), "w"), indent=1)


if __name__ == "__main__":
    main()
