#!/usr/bin/env python3
"""Regenerate the bundled report fixtures and their manifest.

Everything is derived from file indexes (no randomness), so reruns are
byte-identical.  The table1 corpus pins known family/country counts; the
multifam corpus constructs one file reported twice under two different
family signatures.

Usage: python3 tools/make_fixtures.py [--out fixtures]
"""

import argparse
import hashlib
import json
from datetime import datetime, timedelta
from pathlib import Path

UC3_SHA256 = "21d178e0688af591964ae00b71263d2e086706017ebc98d7488d57771144d337"

FAMILY_PLAN = [("AbereBot", 8), ("Anubis", 21), ("SharkBot", 26), (None, 16)]
COUNTRY_PLAN = [("US", 25), ("CN", 18), ("RU", 12), ("DE", 9), ("FR", 7)]
REPORTERS = ["abuse_ch", "malware_hunter", "nightowl", "labscan", "tracker_one", "redteam_k9"]
GENERIC_TAGS = ["banker", "android", "apk", "trojan", "spyware"]
FILE_TYPES = ["apk", "dex", "jar"]
BASE_TIME = datetime(2021, 6, 1, 8, 0, 0)

VENDORS = [
    ("ReversingLabs", "malicious", "Android.Banker.Generic"),
    ("DrWeb", "malware", "Android.HiddenAds.612"),
    ("Cyble", "suspicious", None),
    ("SecureBrain", "clean", None),
]

YARA_RULES = [
    {
        "rule_name": "apk_banker_overlay",
        "author": "ktx",
        "description": "Detects overlay-based Android bankers",
        "reference": "https://yara.example.org/apk_banker_overlay",
    },
    {
        "rule_name": "sms_stealer_strings",
        "author": "mwlab",
        "description": "SMS exfiltration string artifacts",
    },
    {
        "rule_name": "dropper_dex_loader",
        "reference": "https://yara.example.org/dropper_dex_loader",
    },
]


def hexdigest(seed, algo, length):
    raw = hashlib.sha512(seed.encode()).hexdigest()
    while len(raw) < length:
        raw += hashlib.sha512(raw.encode()).hexdigest()
    if algo == "sha256":
        return hashlib.sha256(seed.encode()).hexdigest()
    if algo == "sha1":
        return hashlib.sha1(seed.encode()).hexdigest()
    if algo == "md5":
        return hashlib.md5(seed.encode()).hexdigest()
    return raw[:length]


def timestamp(i, offset_hours=0):
    return (BASE_TIME + timedelta(hours=i * 7 + offset_hours)).strftime("%Y-%m-%d %H:%M:%S")


def vendor_intel_for(i, family):
    name, verdict, detection = VENDORS[i % len(VENDORS)]
    entry = {"verdict": verdict, "link": f"https://intel.example.org/scan/{i}", "date": timestamp(i, 30)}
    if detection:
        entry["threat_name" if i % 2 else "detection"] = detection
    elif family:
        entry["malware_family"] = family
    if i % 2 == 0:
        intel = {name: entry}
        if i % 6 == 0:
            intel["vhash"] = {"hash": f"v{i:04d}simhash"}
        if i % 4 == 0:
            extra_name, extra_verdict, _ = VENDORS[(i + 1) % len(VENDORS)]
            intel[extra_name] = [{"status": extra_verdict, "date": timestamp(i, 31)}]
        return intel
    return [dict(entry, vendor=name)]


def code_sign_for(i):
    if i % 2 == 0:
        return {
            "thumbprint_algorithm": "SHA256",
            "serial_number": f"{i:06x}aa",
            "issuer": "CN=Dev Cert Authority",
        }
    return [{"algorithm": "SHA1", "issuer_cn": "CN=Self Signed"}]


def table1_report(i, family, country):
    seed = f"andmalkg-table1-{i}"
    sha256 = UC3_SHA256 if i == 0 else hexdigest(seed, "sha256", 64)
    tags = []
    if family:
        tags.append(family if i % 3 else family.lower())  # mixed case, normalizes to one tag
    tags.append(GENERIC_TAGS[i % len(GENERIC_TAGS)])
    report = {
        "sha256_hash": sha256,
        "sha1_hash": hexdigest(seed + "-sha1", "sha1", 40),
        "md5_hash": hexdigest(seed + "-md5", "md5", 32),
        "file_name": f"sample_{i:03d}.{FILE_TYPES[i % len(FILE_TYPES)]}",
        "file_size": 150000 + i * 3517,
        "file_type": FILE_TYPES[i % len(FILE_TYPES)],
        "first_seen": timestamp(i),
        "last_seen": timestamp(i, 26),
        "signature": family if family else ("n/a" if i % 2 else None),
        "reporter": REPORTERS[i % len(REPORTERS)],
        "origin_country": country,
        "tags": tags,
        "ssdeep": f"3072:{hexdigest(seed + '-ss1', 'x', 16)}:{hexdigest(seed + '-ss2', 'x', 12)}",
    }
    if i % 2 == 0:
        report["tlsh"] = "T1" + hexdigest(seed + "-tlsh", "x", 70).upper()
    if i % 5 == 0:
        report["vhash"] = f"vh_{hexdigest(seed + '-vh', 'x', 10)}"
    if i % 7 == 0:
        report["imphash"] = hexdigest(seed + "-imp", "md5", 32)
    if i % 11 == 0:
        report["telfhash"] = hexdigest(seed + "-telf", "x", 70)
    if i % 13 == 0:
        report["gimphash"] = hexdigest(seed + "-gimp", "x", 64)
    if i % 3 == 0:
        report["vendor_intel"] = vendor_intel_for(i, family)
    if i % 4 == 0:
        report["yara_rules"] = [YARA_RULES[i % len(YARA_RULES)]]
        if i % 8 == 0:
            report["yara_rules"].append(YARA_RULES[(i + 1) % len(YARA_RULES)])
    if i % 5 == 0:
        report["code_sign"] = code_sign_for(i)
    return report


def build_table1(out_dir):
    families = [name for name, n in FAMILY_PLAN for _ in range(n)]
    countries = [code for code, n in COUNTRY_PLAN for _ in range(n)]
    assert len(families) == len(countries)
    reports = []
    for i, (family, country) in enumerate(zip(families, countries)):
        report = table1_report(i, family, country)
        reports.append(report)
        path = out_dir / f"report_{i:03d}.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return reports


MULTIFAM_SINGLES = ["Cerberus", "Joker", "FluBot", "Alien", "Hydra"]


def multifam_report(seed, sha256, file_name, family, i):
    return {
        "sha256_hash": sha256,
        "md5_hash": hexdigest(seed + "-md5", "md5", 32),
        "file_name": file_name,
        "file_size": 90000 + i * 1111,
        "file_type": "apk",
        "first_seen": timestamp(200 + i),
        "last_seen": timestamp(200 + i, 12),
        "signature": family,
        "reporter": REPORTERS[i % len(REPORTERS)],
        "origin_country": "US",
        "tags": [family.lower()],
    }


def build_multifam(out_dir):
    dual_sha = hexdigest("andmalkg-multifam-dual", "sha256", 64)
    reports = {
        "dual_a.json": multifam_report("andmalkg-mf-a", dual_sha, "dual_payload.apk", "FluBot", 0),
        "dual_b.json": multifam_report("andmalkg-mf-b", dual_sha, "dual_payload.apk", "Hydra", 1),
    }
    for k, family in enumerate(MULTIFAM_SINGLES):
        seed = f"andmalkg-multifam-{k}"
        sha = hexdigest(seed, "sha256", 64)
        reports[f"single_{k}.json"] = multifam_report(seed, sha, f"single_{k}.apk", family, 2 + k)
    for name, report in reports.items():
        (out_dir / name).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return dual_sha


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures", help="output directory")
    args = parser.parse_args()
    root = Path(args.out)
    table1_dir = root / "table1"
    multifam_dir = root / "multifam"
    table1_dir.mkdir(parents=True, exist_ok=True)
    multifam_dir.mkdir(parents=True, exist_ok=True)

    build_table1(table1_dir)
    dual_sha = build_multifam(multifam_dir)

    manifest = {
        "table1": {
            "reports": sum(n for _, n in FAMILY_PLAN),
            "families": {name: n for name, n in FAMILY_PLAN if name},
            "na": next(n for name, n in FAMILY_PLAN if name is None),
            "countries": dict(COUNTRY_PLAN),
            "uc6_threshold": 10,
            "uc6_expected": [[code, n] for code, n in COUNTRY_PLAN if n > 10],
            "uc1_family_iri_local": "family_aberebot",
            "uc1_count": 8,
            "uc2_tag_iri_local": "tag_aberebot",
            "uc2_count": 8,
            "uc3_sha256": UC3_SHA256,
        },
        "multifam": {
            "reports": 2 + len(MULTIFAM_SINGLES),
            "total_files": 1 + len(MULTIFAM_SINGLES),
            "dual_sha256": dual_sha,
            "dual_file_name": "dual_payload.apk",
            "dual_family_count": 2,
        },
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {sum(n for _, n in FAMILY_PLAN)} table1 + {2 + len(MULTIFAM_SINGLES)} multifam fixtures")


if __name__ == "__main__":
    main()
