#!/usr/bin/env python3
"""Train the repository's standard 48,894-merge BPE table.

Frequency-based byte-level BPE over lowercase words harvested from the
Python sources installed on the build machine, with a hand-curated
vocabulary of scene/object words injected at high count so that common
segmentation-prompt nouns and attributes merge into single tokens.
Output format: '#version: 0.2' header plus one "left right" pair per
line, gzip-compressed. 512 base units + 48,894 merges + 2 specials
gives a vocabulary of exactly 49,408 ids.

Run once; the result is committed at src/anatomy/data/bpe_merges_48894.txt.gz.
"""

import argparse
import collections
import glob
import gzip
import heapq
import re
import sys
import time

TARGET_MERGES = 48894
WORD_END = "</w>"

DOMAIN_WORDS = """
person man woman child boy girl people baby adult lady guy kid
dog cat bird horse cow sheep elephant bear zebra giraffe monkey lion tiger
rabbit mouse deer fox wolf pig chicken duck goose fish shark whale dolphin
car truck bus train bicycle motorcycle boat ship airplane helicopter van
skateboard scooter wagon tractor trailer ambulance taxi jeep
white black red blue green yellow orange purple pink brown gray grey
golden silver dark light pale bright striped spotted plaid checkered
shirt pants jacket coat dress skirt hat cap helmet shoe boot glove scarf
tie suit uniform jeans shorts sweater hoodie sock belt glasses sunglasses
table chair sofa couch bed desk shelf cabinet drawer lamp mirror rug
window door wall floor ceiling roof stairs fence gate bench counter sink
bottle cup glass plate bowl fork knife spoon pot pan mug jar can box bag
backpack basket bucket umbrella towel pillow blanket curtain
tree flower grass bush plant leaf branch rock stone mountain hill river
lake ocean sea beach sand snow ice cloud sky sun moon star rain
road street sidewalk path bridge building house tower wall sign pole
light traffic signal crosswalk parking lot driveway garage
ball bat racket frisbee kite surfboard ski snowboard skateboard net goal
book phone laptop computer keyboard mouse screen monitor television remote
camera clock watch toy doll kite balloon
apple banana orange grape strawberry pizza sandwich burger cake donut
bread cheese egg meat chicken salad soup drink coffee tea juice wine beer
left right top bottom front back middle center corner side edge near far
standing sitting walking running jumping holding wearing riding eating
drinking playing sleeping lying carrying pushing pulling looking smiling
large small big little tiny huge tall short long wide narrow thin thick
old young new broken shiny wet dry dirty clean open closed empty full
hand arm leg foot head face hair eye ear nose mouth neck shoulder finger
the a an of in on at with and or by for to from behind above below under
over between next beside inside outside his her its their this that
""".split()


def harvest_words(roots, limit_files=0):
    counts = collections.Counter()
    files = []
    for root in roots:
        files.extend(sorted(glob.glob(root + "/**/*.py", recursive=True)))
    if limit_files:
        files = files[:limit_files]
    word_re = re.compile(r"[a-z]+")
    for path in files:
        try:
            with open(path, encoding="utf-8", errors="ignore") as fh:
                counts.update(word_re.findall(fh.read().lower()))
        except OSError:
            continue
    return counts


def train(counts, target):
    words = []
    wcount = []
    for word, cnt in sorted(counts.items()):
        syms = list(word[:-1]) + [word[-1] + WORD_END]
        words.append(syms)
        wcount.append(cnt)

    pair_count = collections.Counter()
    pair_words = collections.defaultdict(set)
    for wi, syms in enumerate(words):
        c = wcount[wi]
        for a, b in zip(syms, syms[1:]):
            pair_count[(a, b)] += c
            pair_words[(a, b)].add(wi)

    heap = [(-c, p) for p, c in pair_count.items()]
    heapq.heapify(heap)

    existing = set()
    for wordsyms in words:
        existing.update(wordsyms)
    existing.update(chr(c) for c in range(33, 127))
    banned = set()

    merges = []
    t0 = time.time()
    while len(merges) < target and heap:
        negc, pair = heapq.heappop(heap)
        cur = pair_count.get(pair, 0)
        if cur == 0 or -negc != cur or pair in banned:
            continue
        new_sym = pair[0] + pair[1]
        if new_sym in existing:
            banned.add(pair)
            continue
        existing.add(new_sym)
        merges.append(pair)

        affected = list(pair_words.get(pair, ()))
        touched = collections.Counter()
        for wi in affected:
            syms = words[wi]
            c = wcount[wi]
            old_pairs = list(zip(syms, syms[1:]))
            out = []
            i = 0
            n = len(syms)
            while i < n:
                if i < n - 1 and syms[i] == pair[0] and syms[i + 1] == pair[1]:
                    out.append(new_sym)
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            words[wi] = out
            new_pairs = list(zip(out, out[1:]))
            for p in old_pairs:
                pair_count[p] -= c
                touched[p] += 1
            for p in new_pairs:
                pair_count[p] += c
                touched[p] += 1
            old_set = set(old_pairs)
            new_set = set(new_pairs)
            for p in old_set - new_set:
                pair_words[p].discard(wi)
            for p in new_set - old_set:
                pair_words[p].add(wi)
        for p in touched:
            c = pair_count.get(p, 0)
            if c <= 0:
                pair_count.pop(p, None)
            else:
                heapq.heappush(heap, (-c, p))
        if len(merges) % 5000 == 0:
            print(f"  {len(merges)} merges, {time.time() - t0:.0f}s", file=sys.stderr)
    return merges


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--target", type=int, default=TARGET_MERGES)
    ap.add_argument("--limit-files", type=int, default=0)
    args = ap.parse_args()

    counts = harvest_words(
        ["/usr/lib/python3.10", "/usr/local/lib/python3.10/dist-packages"],
        limit_files=args.limit_files,
    )
    for w in DOMAIN_WORDS:
        counts[w] += 20000
    print(f"{len(counts)} unique words", file=sys.stderr)

    merges = train(counts, args.target)
    if len(merges) < args.target:
        print(f"WARNING: saturated at {len(merges)} merges", file=sys.stderr)

    body = "#version: 0.2\n" + "\n".join(f"{a} {b}" for a, b in merges) + "\n"
    with open(args.out, "wb") as raw:
        with gzip.GzipFile(fileobj=raw, mode="wb", compresslevel=9, mtime=0) as fh:
            fh.write(body.encode("utf-8"))
    print(f"wrote {len(merges)} merges to {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
