"""Regenerate the JSON/CoNLL fixture corpora under fixtures/.

Sentences are written as ``form/POS/head/deprel`` (1-based heads, 0 = root)
with frames keyed by 1-based predicate position.
"""

import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures")

TRAIN = [
    ("The/DT/2/NMOD cat/NN/3/SBJ chased/VBD/0/ROOT the/DT/5/NMOD dog/NN/3/OBJ ./././3/P",
     {3: [(2, "A0"), (5, "A1")]}),
    ("John/NNP/2/SBJ gave/VBD/0/ROOT Mary/NNP/2/IOBJ a/DT/5/NMOD book/NN/2/OBJ yesterday/NN/2/TMP ./././2/P",
     {2: [(1, "A0"), (3, "A2"), (5, "A1"), (6, "AM-TMP")]}),
    ("When/WRB/3/ADV victims/NNS/3/SBJ stay/VBP/7/TMP silent/JJ/3/PRD ,/,/7/P nothing/NN/7/SBJ changes/VBZ/0/ROOT ./././7/P",
     {3: [(2, "A1"), (4, "A3")], 7: [(3, "AM-TMP"), (6, "A1")]}),
    ("The/DT/2/NMOD company/NN/3/SBJ reported/VBD/0/ROOT strong/JJ/5/NMOD profits/NNS/3/OBJ last/JJ/7/NMOD year/NN/3/TMP ./././3/P",
     {3: [(2, "A0"), (5, "A1"), (7, "AM-TMP")]}),
    ("She/PRP/2/SBJ said/VBD/0/ROOT that/IN/2/OBJ prices/NNS/5/SBJ rose/VBD/3/SUB sharply/RB/5/MNR ./././2/P",
     {2: [(1, "A0"), (3, "A1")], 5: [(4, "A1"), (6, "AM-MNR")]}),
    ("Investors/NNS/2/SBJ sold/VBD/0/ROOT shares/NNS/2/OBJ because/IN/2/PRP markets/NNS/6/SBJ fell/VBD/4/SUB ./././2/P",
     {2: [(1, "A0"), (3, "A1"), (4, "AM-CAU")], 6: [(5, "A1")]}),
    ("The/DT/2/NMOD man/NN/6/SBJ who/WP/4/SBJ left/VBD/2/NMOD early/RB/4/TMP called/VBD/0/ROOT his/PRP$/8/NMOD mother/NN/6/OBJ ./././6/P",
     {4: [(2, "A0"), (3, "R-A0"), (5, "AM-TMP")], 6: [(2, "A0"), (8, "A1")]}),
    ("Children/NNS/2/SBJ play/VBP/0/ROOT in/IN/2/LOC the/DT/5/NMOD park/NN/3/PMOD every/DT/7/NMOD day/NN/2/TMP ./././2/P",
     {2: [(1, "A0"), (3, "AM-LOC"), (7, "AM-TMP")]}),
    ("The/DT/2/NMOD board/NN/3/SBJ approved/VBD/0/ROOT the/DT/5/NMOD plan/NN/3/OBJ and/CC/3/COORD hired/VBD/6/CONJ a/DT/10/NMOD new/JJ/10/NMOD director/NN/7/OBJ ./././3/P",
     {3: [(2, "A0"), (5, "A1")], 7: [(2, "A0"), (10, "A1")]}),
    ("Prices/NNS/2/SBJ will/MD/0/ROOT increase/VB/2/VC next/JJ/5/NMOD month/NN/3/TMP ./././2/P",
     {3: [(1, "A1"), (2, "AM-MOD"), (5, "AM-TMP")]}),
    ("The/DT/2/NMOD teacher/NN/3/SBJ asked/VBD/0/ROOT the/DT/5/NMOD students/NNS/3/OBJ to/TO/3/OPRD read/VB/6/IM the/DT/9/NMOD book/NN/7/OBJ ./././3/P",
     {3: [(2, "A0"), (5, "A2"), (6, "A1")], 7: [(5, "A0"), (9, "A1")]}),
    ("Nobody/NN/2/SBJ expected/VBD/0/ROOT the/DT/4/NMOD storm/NN/2/OBJ ./././2/P",
     {2: [(1, "A0"), (4, "A1")]}),
    ("The/DT/2/NMOD bank/NN/8/SBJ ,/,/2/P which/WDT/5/SBJ lost/VBD/2/NMOD money/NN/5/OBJ ,/,/2/P closed/VBD/0/ROOT its/PRP$/10/NMOD branches/NNS/8/OBJ ./././8/P",
     {5: [(2, "A0"), (4, "R-A0"), (6, "A1")], 8: [(2, "A0"), (10, "A1")]}),
    ("He/PRP/3/SBJ quickly/RB/3/MNR opened/VBD/0/ROOT the/DT/5/NMOD door/NN/3/OBJ ./././3/P",
     {3: [(1, "A0"), (2, "AM-MNR"), (5, "A1")]}),
    ("The/DT/2/NMOD results/NNS/3/SBJ were/VBD/0/ROOT published/VBN/3/VC in/IN/4/TMP March/NNP/5/PMOD ./././3/P",
     {4: [(2, "A1"), (5, "AM-TMP")]}),
    ("We/PRP/2/SBJ will/MD/0/ROOT not/RB/2/ADV accept/VB/2/VC the/DT/6/NMOD offer/NN/4/OBJ ./././2/P",
     {4: [(1, "A0"), (2, "AM-MOD"), (3, "AM-NEG"), (6, "A1")]}),
    ("The/DT/2/NMOD dog/NN/3/SBJ barked/VBD/0/ROOT ./././3/P",
     {3: [(2, "A0")]}),
    ("A/DT/2/NMOD report/NN/5/SBJ released/VBN/2/APPO today/NN/3/TMP shows/VBZ/0/ROOT that/IN/5/OBJ sales/NNS/8/SBJ grew/VBD/6/SUB ./././5/P",
     {3: [(2, "A1"), (4, "AM-TMP")], 5: [(2, "A0"), (6, "A1")], 8: [(7, "A1")]}),
    ("The/DT/3/NMOD old/JJ/3/NMOD house/NN/0/ROOT on/IN/3/LOC the/DT/6/NMOD hill/NN/4/PMOD ./././3/P",
     {}),
    ("Analysts/NNS/2/SBJ believe/VBP/0/ROOT the/DT/4/NMOD economy/NN/5/SBJ will/MD/2/OBJ recover/VB/5/VC soon/RB/6/TMP ./././2/P",
     {2: [(1, "A0"), (5, "A1")], 6: [(4, "A1"), (5, "AM-MOD"), (7, "AM-TMP")]}),
]

DEV = [
    ("The/DT/2/NMOD girl/NN/3/SBJ chased/VBD/0/ROOT the/DT/5/NMOD cat/NN/3/OBJ ./././3/P",
     {3: [(2, "A0"), (5, "A1")]}),
    ("Mary/NNP/2/SBJ gave/VBD/0/ROOT John/NNP/2/IOBJ a/DT/5/NMOD letter/NN/2/OBJ today/NN/2/TMP ./././2/P",
     {2: [(1, "A0"), (3, "A2"), (5, "A1"), (6, "AM-TMP")]}),
    ("The/DT/2/NMOD firm/NN/3/SBJ reported/VBD/0/ROOT weak/JJ/5/NMOD sales/NNS/3/OBJ last/JJ/7/NMOD month/NN/3/TMP ./././3/P",
     {3: [(2, "A0"), (5, "A1"), (7, "AM-TMP")]}),
    ("He/PRP/2/SBJ said/VBD/0/ROOT that/IN/2/OBJ profits/NNS/5/SBJ fell/VBD/3/SUB ./././2/P",
     {2: [(1, "A0"), (3, "A1")], 5: [(4, "A1")]}),
    ("The/DT/2/NMOD cat/NN/3/SBJ barked/VBD/0/ROOT ./././3/P",
     {3: [(2, "A0")]}),
    ("Children/NNS/2/SBJ play/VBP/0/ROOT in/IN/2/LOC the/DT/5/NMOD garden/NN/3/PMOD ./././2/P",
     {2: [(1, "A0"), (3, "AM-LOC")]}),
    ("We/PRP/2/SBJ will/MD/0/ROOT not/RB/2/ADV accept/VB/2/VC the/DT/6/NMOD plan/NN/4/OBJ ./././2/P",
     {4: [(1, "A0"), (2, "AM-MOD"), (3, "AM-NEG"), (6, "A1")]}),
    ("The/DT/3/NMOD old/JJ/3/NMOD house/NN/0/ROOT on/IN/3/LOC the/DT/6/NMOD hill/NN/4/PMOD ./././3/P",
     {}),
]

TINY = [
    ("Cats/NNS/2/SBJ chase/VBP/0/ROOT mice/NNS/2/OBJ", {2: [(1, "A0"), (3, "A1")]}),
    ("When/WRB/4/ADV witnesses/NNS/3/NMOD victims/NNS/4/SBJ stay/VBP/8/TMP silent/JJ/4/PRD ,/,/8/P nothing/NN/8/SBJ changes/VBZ/0/ROOT",
     {4: [(3, "A1"), (5, "A3")], 8: [(4, "A-TMP"), (7, "A1")]}),
    ("The/DT/3/NMOD old/JJ/3/NMOD house/NN/0/ROOT ./././3/P", {}),
]

# Role-consistency fixture; the per-frame comments give the hand count (U, C, R).
VIOLATIONS = [
    # A0 three times (U 2), A1 twice (U 1)
    ("a/DT/2/NMOD b/NN/4/SBJ c/NN/4/OBJ d/VBD/0/ROOT e/RB/4/ADV f/NN/4/OBJ g/NN/4/OBJ h/./4/P",
     {4: [(1, "A0"), (2, "A0"), (3, "A1"), (6, "A1"), (7, "A0")]}),
    # pred 3: C-A1 before any A1 (C 1), later C-A1 is fine, R-A0 without A0 (R 1)
    # pred 5: R-A2 with A2 present is fine, C-A2 precedes its A2 (C 1)
    ("a/NN/3/SBJ b/NN/3/OBJ c/VBD/0/ROOT d/NN/5/SBJ e/VBD/3/OBJ f/NN/5/OBJ",
     {3: [(1, "C-A1"), (2, "A1"), (5, "C-A1"), (6, "R-A0")], 5: [(1, "R-A2"), (4, "C-A2"), (6, "A2")]}),
    # pred 1: adjuncts may repeat, AA twice (U 1); pred 3: nothing violated
    ("a/VB/0/ROOT b/RB/1/TMP c/RB/1/TMP d/VB/1/OBJ e/NN/4/OBJ",
     {1: [(2, "AM-TMP"), (3, "AM-TMP"), (4, "AA"), (5, "AA")], 4: [(1, "AM-LOC"), (2, "C-AM-LOC"), (5, "A1")]}),
]
VIOLATION_COUNTS = (4, 2, 1)


def parse(text, frames, sid):
    toks = []
    for item in text.split():
        # "./././3/P" is the period token; split from the right
        form, pos, head, rel = item.rsplit("/", 3)
        form = form.split("/")[0] or "/"
        toks.append((form, pos, int(head), rel))
    triplets = sorted([p - 1, a - 1, r] for p, args in frames.items() for a, r in args)
    return {
        "id": sid,
        "tokens": [t[0] for t in toks],
        "lemmas": [t[0].lower() for t in toks],
        "pos": [t[1] for t in toks],
        "heads": [t[2] - 1 for t in toks],
        "deprels": [t[3] for t in toks],
        "predicates": sorted(p - 1 for p in frames),
        "triplets": triplets,
    }


def conll_block(obj):
    preds = obj["predicates"]
    roles = {(p, a): r for p, a, r in obj["triplets"]}
    lines = []
    for i, form in enumerate(obj["tokens"]):
        head = str(obj["heads"][i] + 1)
        is_pred = i in preds
        cols = [str(i + 1), form, obj["lemmas"][i], obj["lemmas"][i], obj["pos"][i], obj["pos"][i], "_", "_",
                head, head, obj["deprels"][i], obj["deprels"][i], "Y" if is_pred else "_",
                f"{obj['lemmas'][i]}.01" if is_pred else "_"]
        cols += [roles.get((p, i), "_") for p in preds]
        lines.append("\t".join(cols))
    return "\n".join(lines) + "\n"


def dump(name, items, prefix):
    objs = [parse(s, f, f"{prefix}{i}") for i, (s, f) in enumerate(items)]
    with open(os.path.join(OUT, name + ".json"), "w") as fh:
        json.dump(objs, fh, indent=1)
        fh.write("\n")
    return objs


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    train = dump("train", TRAIN, "train-")
    dump("dev", DEV, "dev-")
    dump("tiny", TINY, "tiny-")
    dump("violations", VIOLATIONS, "viol-")
    with open(os.path.join(OUT, "fixture10.conll09"), "w") as fh:
        fh.write("\n".join(conll_block(o) for o in train[:10]))
