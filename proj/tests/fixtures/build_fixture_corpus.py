#!/usr/bin/env python3
"""Builds the fixture transcript corpus and its answer key.

Entities, media and platform crossings are planted from a seeded RNG and the
expected report is computed from what was planted, not by scanning text.
Rerunning with the same seed reproduces both files byte for byte.
"""
import json
import random
import statistics
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

SEED = 2025
OUT = Path(__file__).resolve().parent

FILLER_SCAMMER = [
    "How was your day today?",
    "I just finished cooking dinner, what about you?",
    "You seem like a kind person.",
    "I love walking by the river in the evening.",
    "Do you like traveling?",
    "My mother always told me to be honest.",
    "What kind of music do you listen to?",
    "I hope you are having a wonderful morning.",
    "Work was busy but I am fine now.",
    "Tell me more about your family.",
]
FILLER_PERSONA = [
    "Hi, doing well, how about you?",
    "That sounds lovely.",
    "I had a quiet day at home.",
    "I like old movies and gardening.",
    "Sorry for the late reply, I was busy.",
    "Where did you grow up?",
    "Haha that is funny.",
    "I am not sure about that.",
]
HANDLES = ["luna_rose88", "david.wen", "mia_trades", "sofia_lee21", "kevin_brooks", "amy.chen.official",
           "jack_miller_fx", "grace_wu", "nina_star", "leo_walker7"]
MENTIONED = ["crypto_mia", "mentor_frank", "coach.lily", "helen_invest"]
DOMAINS = ["coinflexpro-app.example", "btc-yield.example", "goldtrade-hub.example", "safewallet.example"]
EMAIL_USERS = ["support.desk", "ben.help", "grace.invest", "vip.service"]
EMAIL_DOMAINS = ["example.com", "mail.example.org"]
ORIGIN_MESSENGERS = ["WhatsApp", "Telegram", "Signal"]
WA_MESSENGERS = ["Telegram", "Signal", "WeChat"]

IMAGE_CAPTIONS = {
    "selfie": [
        "A woman taking a mirror selfie in a bright bedroom",
        "Close-up headshot of a smiling man against a plain background",
        "A man sitting in a car seat looking at the camera",
    ],
    "social_engineering": [
        "A plate of pasta and a glass of wine on a restaurant table",
        "A golden retriever lying on a beach at sunset",
        "A man in a military uniform standing beside a helicopter",
    ],
    "ttp": [
        "Screenshot of a crypto trading app showing a deposit confirmation",
        "A QR code for payment printed on a white card",
        "A bank transfer receipt listing IBAN details",
    ],
}
VIDEO_CAPTIONS = {
    "selfie": ["A woman waving at the camera in a close-up selfie video"],
    "social_engineering": ["A video of fireworks over a city skyline"],
}
AUDIO_TRANSCRIPTS = ["good night dear, sleep well", "I miss talking to you"]

HEX = "0123456789abcdef"
BECH32 = "qpzry9x8gf2tvdw0s3jn54khce6mua7l"
BASE58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"


def crypto_value(rng):
    kind = rng.choice(["hex", "bech32", "base58"])
    if kind == "hex":
        return "0x" + "".join(rng.choice(HEX) for _ in range(40))
    if kind == "bech32":
        return "bc1q" + "".join(rng.choice(BECH32) for _ in range(38))
    while True:
        body = "".join(rng.choice(BASE58) for _ in range(33))
        v = rng.choice("13") + body
        if any(c.isupper() for c in v) and any(c.islower() for c in v) and not any(
            v[i:i + 10].isdigit() for i in range(len(v) - 9)
        ):
            return v


def phone_value(rng):
    a, b = rng.randint(200, 989), rng.randint(0, 99)
    digits = "1%03d555%04d" % (a, 100 + b)
    fmt = rng.choice(["+1 {a} 555 {c}", "({a}) 555-{c}", "+1-{a}-555-{c}", "{a}.555.{c}"])
    text = fmt.format(a="%03d" % a, c="%04d" % (100 + b))
    return text, digits


def fmt_utc(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def build(seed=SEED):
    rng = random.Random(seed)
    categories = (["TS only"] * 8 + ["BS only"] * 5 + ["TS->WA"] * 7 + ["BS->WA"] * 5)
    rng.shuffle(categories)
    short = set(rng.sample(range(25), 3))
    convs = []
    for ci, cat in enumerate(categories):
        cid = "conv-%02d" % (ci + 1)
        n = rng.randint(5, 9) if ci in short else rng.randint(12, 80)
        origin = "TS_like" if cat.startswith("TS") else "BS_like"
        crossed = "WA" in cat
        cross_at = rng.randint(max(4, int(n * 0.3)), max(5, int(n * 0.6))) if crossed else None

        roles = ["scammer"]
        for i in range(2, n + 1):
            roles.append(roles[-1] if rng.random() < 0.25 else ("persona" if roles[-1] == "scammer" else "scammer"))
        if crossed:
            roles[cross_at - 2] = "scammer"
            roles[cross_at - 1] = "persona"
        platforms = [origin if (not crossed or i < cross_at) else "WA_like" for i in range(1, n + 1)]

        handle = HANDLES[ci % len(HANDLES)]
        wa_text, wa_digits = phone_value(rng)
        start = datetime(2025, 3, 1, 9, tzinfo=timezone.utc) + timedelta(days=rng.randint(0, 60))
        at = [start]
        for _ in range(n - 1):
            at.append(at[-1] + timedelta(minutes=rng.choice([2, 5, 15, 45, 120, 300, 900, 1440])))

        msgs = []
        for i in range(1, n + 1):
            role = roles[i - 1]
            plat = platforms[i - 1]
            text = rng.choice(FILLER_SCAMMER if role == "scammer" else FILLER_PERSONA)
            m = {"conversation_id": cid, "index": i, "role": role, "platform": plat, "at": fmt_utc(at[i - 1]),
                 "text": text}
            if role == "scammer":
                m["sender"] = wa_text if plat == "WA_like" else handle
            msgs.append({"record": m, "plants": [], "media": []})

        def add(i, kind, value, phrase):
            msgs[i - 1]["record"]["text"] += " " + phrase
            msgs[i - 1]["plants"].append({"kind": kind, "value": value})

        scammer_idx = [i for i in range(1, n + 1) if roles[i - 1] == "scammer"]
        origin_scammer = [i for i in scammer_idx if platforms[i - 1] != "WA_like"]
        wa_scammer = [i for i in scammer_idx if platforms[i - 1] == "WA_like"]
        pick = lambda pool: rng.choice(pool) if pool else None

        if crossed:
            add(cross_at - 1, "platform_name", "WhatsApp", "Add me on WhatsApp please,")
            add(cross_at - 1, "phone", wa_digits, "my number is " + wa_text)
            msgs[cross_at - 1]["record"]["text"] = "hi, it's Jordan, we were talking before"
        if rng.random() < 0.35:
            i = pick(scammer_idx)
            v = crypto_value(rng)
            add(i, "crypto", v, "my wallet address is " + v + " for the transfer")
        if rng.random() < 0.5:
            i = pick(scammer_idx)
            dom = rng.choice(DOMAINS)
            v = rng.choice(["https://" + dom + "/signup", "www." + dom, "http://" + dom + "/app?ref=vip"])
            add(i, "url", v, "check " + v + rng.choice(["", ".", " now"]))
        if rng.random() < 0.25:
            i = pick(scammer_idx)
            v = rng.choice(EMAIL_USERS) + "@" + rng.choice(EMAIL_DOMAINS)
            add(i, "email", v, "write to " + v + " for help")
        if rng.random() < 0.2:
            i = pick(scammer_idx)
            v = "$" + rng.choice(["luckyBen", "MiaCash", "goldLily"]) + str(rng.randint(1, 99))
            add(i, "cashapp", v, "send $50 to " + v + " on the app")
        if not crossed and origin_scammer and rng.random() < 0.4:
            i = pick(origin_scammer)
            v = rng.choice(ORIGIN_MESSENGERS)
            add(i, "platform_name", v, "do you use " + v + "?")
        if not crossed and origin_scammer and rng.random() < 0.15:
            t, d = phone_value(rng)
            add(pick(origin_scammer), "phone", d, "text me at " + t)
        if crossed and wa_scammer and rng.random() < 0.35:
            t, d = phone_value(rng)
            add(pick(wa_scammer), "phone", d, "my manager's number is " + t)
        if crossed and wa_scammer and rng.random() < 0.2:
            v = rng.choice(WA_MESSENGERS)
            add(pick(wa_scammer), "platform_name", v, "my friend is on " + v)
        if rng.random() < 0.25:
            i = pick(scammer_idx)
            h = rng.choice(MENTIONED)
            msgs[i - 1]["record"]["text"] += " follow my friend @" + h
            msgs[i - 1]["mentions"] = msgs[i - 1].get("mentions", []) + [h]
        if rng.random() < 0.15:
            persona_idx = [i for i in range(1, n + 1) if roles[i - 1] == "persona" and not (crossed and i == cross_at)]
            if persona_idx:
                v = "www.cooking-daily.example"
                add(rng.choice(persona_idx), "url", v, "I found a recipe on " + v)

        if rng.random() < 0.5:
            for _ in range(rng.randint(1, 4)):
                kind = rng.choice(["image", "image", "image", "video", "audio"])
                if kind == "image":
                    cls = rng.choice(list(IMAGE_CAPTIONS))
                    cap = rng.choice(IMAGE_CAPTIONS[cls])
                    marker = "[**Image Caption**: " + cap + "]"
                elif kind == "video":
                    cls = rng.choice(list(VIDEO_CAPTIONS))
                    cap = rng.choice(VIDEO_CAPTIONS[cls])
                    marker = "[**Image Caption**: " + cap + "]"
                else:
                    cls = None
                    cap = rng.choice(AUDIO_TRANSCRIPTS)
                    marker = "[**Audio Transcript**: " + cap + "]"
                i = pick(scammer_idx)
                msgs[i - 1]["media"].append({"kind": kind, "marker": marker, "class": cls, "caption": cap})
        for m in msgs:
            if m["media"]:
                m["record"]["media"] = [{"kind": x["kind"], "marker": x["marker"]} for x in m["media"]]
        convs.append({"id": cid, "category": cat, "n": n, "crossed": crossed, "handle": handle,
                      "wa_sender": wa_text if crossed else None, "msgs": msgs})
    return convs


def median(v):
    return statistics.median(v) if v else None


def expected(convs, min_turns=10):
    kept = [c for c in convs if c["n"] >= min_turns]
    rep = {"min_turns": min_turns, "conversations": len(kept), "excluded": len(convs) - len(kept),
           "crossed": sum(c["crossed"] for c in kept)}
    lengths = [c["n"] for c in kept]
    durations = []
    for c in kept:
        a = datetime.strptime(c["msgs"][0]["record"]["at"], "%Y-%m-%dT%H:%M:%SZ")
        b = datetime.strptime(c["msgs"][-1]["record"]["at"], "%Y-%m-%dT%H:%M:%SZ")
        durations.append((b - a).total_seconds() / 86400.0)
    rep["messages"] = {"mean": sum(lengths) / len(lengths), "median": median(lengths), "max": max(lengths)}
    rep["duration_days"] = {"mean": sum(durations) / len(durations), "median": median(durations),
                            "max": max(durations)}
    totals = {}
    for c in kept:
        for m in c["msgs"]:
            r = m["record"]
            totals.setdefault(r["role"], {}).setdefault(r["platform"], 0)
            totals[r["role"]][r["platform"]] += 1
            totals[r["role"]].setdefault("all", 0)
            totals[r["role"]]["all"] += 1
    rep["role_platform_totals"] = totals

    rows = []
    for cat in ["TS only", "BS only", "TS->WA", "BS->WA"]:
        v = [c["n"] for c in kept if c["category"] == cat]
        rows.append({"category": cat, "count": len(v), "percent": 100.0 * len(v) / len(kept),
                     "median": median(v), "mean": (sum(v) / len(v)) if v else None})
    rep["crossings"] = rows
    rep["crossing_aggregates"] = {
        "origin-only": sum(1 for c in kept if not c["crossed"]),
        "origin->WA": sum(1 for c in kept if c["crossed"]),
    }

    def firsts(c):
        f = {}

        def note(k, i):
            f[k] = min(f.get(k, i), i)

        for m in c["msgs"]:
            r = m["record"]
            if r["role"] != "scammer":
                continue
            for p in m["plants"]:
                k = p["kind"]
                if k == "platform_name":
                    own = {"TS_like": "TruthSocial", "BS_like": "Bluesky", "WA_like": "WhatsApp"}[r["platform"]]
                    if p["value"] != own:
                        note(k, r["index"])
                    continue
                note(k, r["index"])
                if k == "phone" and r["platform"] == "WA_like":
                    note("non_cross_phone", r["index"])
            for x in m["media"]:
                if x["kind"] == "image" and x["class"] == "ttp":
                    note("image", r["index"])
        return f

    fs = [(c, firsts(c)) for c in kept]
    ttp = ["crypto", "url", "email", "cashapp", "image", "non_cross_phone"]
    prev = []
    for k in ttp:
        hits = [(c, f[k]) for c, f in fs if k in f]
        crossed_hits = [c for c, _ in hits if c["crossed"]]
        prev.append({"entity": k, "conversations": len(hits), "percent_all": 100.0 * len(hits) / len(kept),
                     "crossed_conversations": len(crossed_hits),
                     "percent_crossed": 100.0 * len(crossed_hits) / rep["crossed"] if rep["crossed"] else 0.0,
                     "median_steps": None if k == "non_cross_phone" else median([s for _, s in hits])})
    anyh = [c for c, f in fs if any(k in f for k in ttp)]
    prev.append({"entity": "any_ttp", "conversations": len(anyh), "percent_all": 100.0 * len(anyh) / len(kept),
                 "crossed_conversations": sum(c["crossed"] for c in anyh),
                 "percent_crossed": 100.0 * sum(c["crossed"] for c in anyh) / rep["crossed"] if rep["crossed"] else 0.0,
                 "median_steps": None})
    rep["prevalence"] = prev

    first = []
    for k in ["crypto", "url", "email", "cashapp", "phone", "platform_name", "image"]:
        steps = sorted(f[k] for _, f in fs if k in f)
        cdf = []
        for j, s in enumerate(steps):
            if j + 1 == len(steps) or steps[j + 1] != s:
                cdf.append([s, (j + 1) / len(steps)])
        first.append({"entity": k, "conversations": len(steps), "median_steps": median(steps), "cdf": cdf})
    rep["first_appearance"] = first

    files = []
    img = aud = vid = 0
    img_cls = {"selfie": 0, "social_engineering": 0, "ttp": 0}
    vid_cls = {"selfie": 0, "social_engineering": 0, "ttp": 0}
    for c in kept:
        media = [x for m in c["msgs"] if m["record"]["role"] == "scammer" for x in m["media"]]
        if media:
            files.append(len(media))
        img += any(x["kind"] == "image" for x in media)
        aud += any(x["kind"] == "audio" for x in media)
        vid += any(x["kind"] == "video" for x in media)
        for x in media:
            if x["kind"] == "image":
                img_cls[x["class"]] += 1
            elif x["kind"] == "video":
                vid_cls[x["class"]] += 1
    ni, nv = sum(img_cls.values()), sum(vid_cls.values())
    rep["media"] = {
        "percent_with_media": 100.0 * len(files) / len(kept),
        "percent_with_images": 100.0 * img / len(kept),
        "percent_with_audio": 100.0 * aud / len(kept),
        "percent_with_video": 100.0 * vid / len(kept),
        "mean_files": sum(files) / len(files) if files else 0.0,
        "max_files": max(files) if files else 0,
        "image_classes": {k: (100.0 * v / ni if ni else 0.0) for k, v in img_cls.items()},
        "video_classes": {k: (100.0 * v / nv if nv else 0.0) for k, v in vid_cls.items()},
    }
    return rep


def main():
    convs = build()
    lines = [json.dumps(m["record"], sort_keys=True) for c in convs for m in c["msgs"]]
    (OUT / "corpus").mkdir(exist_ok=True)
    (OUT / "corpus" / "fixture.jsonl").write_text("\n".join(lines) + "\n")
    key = {
        "seed": SEED,
        "report": expected(convs),
        "report_min_turns_0": expected(convs, 0),
        "entities": [
            {"conversation_id": c["id"], "index": m["record"]["index"], "role": m["record"]["role"],
             "entities": sorted(m["plants"], key=lambda p: (p["kind"], p["value"]))}
            for c in convs for m in c["msgs"]
        ],
        "media": [{"kind": x["kind"], "caption": x["caption"], "class": x["class"]}
                  for c in convs for m in c["msgs"] for x in m["media"] if x["class"]],
        "handles": sorted({c["handle"] for c in convs} |
                          {h for c in convs for m in c["msgs"] for h in m.get("mentions", [])}),
        "phones": sorted({p["value"] for c in convs for m in c["msgs"] for p in m["plants"] if p["kind"] == "phone"}),
    }
    (OUT / "answer_key.json").write_text(json.dumps(key, indent=1, sort_keys=True) + "\n")
    print("wrote %d records for %d conversations" % (len(lines), len(convs)), file=sys.stderr)


if __name__ == "__main__":
    main()
