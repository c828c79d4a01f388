#!/usr/bin/env python3
"""Validate example scenarios and every emitted report against the schemas in docs/."""
import argparse
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--koforge", required=True)
    ap.add_argument("--docs", required=True, type=pathlib.Path)
    ap.add_argument("--scenarios", required=True, type=pathlib.Path)
    ap.add_argument("--work", required=True, type=pathlib.Path)
    args = ap.parse_args()

    scenario_schema = load(args.docs / "scenario.schema.json")
    report_schema = load(args.docs / "report.schema.json")
    cls = jsonschema.Draft202012Validator
    cls.check_schema(scenario_schema)
    cls.check_schema(report_schema)
    scen = cls(scenario_schema)
    rep = cls(report_schema)

    shutil.rmtree(args.work, ignore_errors=True)
    args.work.mkdir(parents=True)
    failures = []

    def check(validator, doc, label):
        errs = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
        for e in errs[:5]:
            failures.append(f"{label}: {'/'.join(map(str, e.absolute_path))}: {e.message[:200]}")
        return not errs

    reports = []
    for path in sorted(args.scenarios.glob("*.json")):
        check(scen, load(path), path.name)
        out = args.work / path.stem
        subprocess.run([args.koforge, "run", str(path), "--out", str(out)], stdout=subprocess.DEVNULL)
        if not (out / "report.json").exists():
            failures.append(f"{path.name}: no report written")
            continue
        reports.append(out / "report.json")

    demo = args.work / "demos"
    subprocess.run([args.koforge, "demo", "all", "--out", str(demo)], stdout=subprocess.DEVNULL)
    reports += sorted(demo.rglob("report.json"))
    if len(reports) < 10:
        failures.append(f"only {len(reports)} reports found")

    supersolution_searches = 0
    for path in reports:
        doc = load(path)
        check(rep, doc, str(path.relative_to(args.work)))
        for task in doc["tasks"]:
            data = task.get("data", {})
            if "csv" in data and not (path.parent / data["csv"]).exists():
                failures.append(f"{path}: missing {data['csv']}")
            if task["name"] == "supersolution" and "probes" in data:
                supersolution_searches += 1
    if supersolution_searches == 0:
        failures.append("no report carries a sigma probe trace")

    for f in failures:
        print("FAIL", f)
    print(f"checked {len(reports)} reports, {len(failures)} problem(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
