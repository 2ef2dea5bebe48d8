"""Validates committed fixtures and documents captured from a live service run
against the published JSON Schemas (draft 2020-12)."""

import argparse
import json
import sys
from pathlib import Path

from jsonschema import Draft202012Validator
from referencing import Registry, Resource


def load_registry(schema_dir: Path):
    schemas = {}
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        schemas[path.name] = doc
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return schemas, Registry().with_resources(resources)


def validator(schemas, registry, name, pointer=None):
    root = schemas[name]
    schema = {"$ref": root["$id"] + (f"#/$defs/{pointer}" if pointer else "")}
    return Draft202012Validator(schema, registry=registry)


def check(v, doc, label, failures):
    errors = sorted(v.iter_errors(doc), key=lambda e: list(e.path))
    for e in errors:
        failures.append(f"{label}: {'/'.join(map(str, e.path)) or '<root>'}: {e.message}")
    return not errors


def jsonl(path: Path):
    for n, line in enumerate(path.read_text().splitlines(), 1):
        if line.strip():
            yield n, json.loads(line)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--schemas", type=Path, required=True)
    ap.add_argument("--fixtures", type=Path, required=True)
    ap.add_argument("--samples", type=Path, required=True)
    args = ap.parse_args()

    schemas, registry = load_registry(args.schemas)
    for name, doc in schemas.items():
        Draft202012Validator.check_schema(doc)

    failures = []
    counted = 0
    config_v = validator(schemas, registry, "config.schema.json")
    for path in sorted(args.fixtures.glob("config_*.json")):
        check(config_v, json.loads(path.read_text()), path.name, failures)
        counted += 1

    # The validators must reject what the library rejects at the schema level.
    minimal = json.loads((args.fixtures / "config_minimal.json").read_text())
    for label, bad in [
        ("unknown key", {**minimal, "gird": {}}),
        ("missing grid", {k: v for k, v in minimal.items() if k != "grid"}),
        ("bad metric", {**minimal, "grid": {**minimal["grid"], "distance_metrics": ["manhattan"]}}),
    ]:
        if config_v.is_valid(bad):
            failures.append(f"negative case accepted: {label}")

    samples = sorted(args.samples.glob("*__*.json"))
    if not samples:
        failures.append(f"no API samples in {args.samples}")
    api_defs = set(schemas["api.schema.json"]["$defs"])
    seen_defs = set()
    for path in samples:
        definition = path.name.split("__", 1)[0]
        if definition not in api_defs:
            failures.append(f"{path.name}: no $defs/{definition} in api.schema.json")
            continue
        seen_defs.add(definition)
        check(validator(schemas, registry, "api.schema.json", definition), json.loads(path.read_text()),
              path.name, failures)
        counted += 1
    for missing in sorted(api_defs - seen_defs):
        failures.append(f"no sample exercised $defs/{missing}")

    trial_v = validator(schemas, registry, "trial.schema.json")
    history_v = validator(schemas, registry, "history.schema.json")
    for name, v in [("trials.jsonl", trial_v), ("history.jsonl", history_v)]:
        path = args.samples / name
        if not path.exists():
            failures.append(f"missing {name}")
            continue
        for n, doc in jsonl(path):
            check(v, doc, f"{name}:{n}", failures)
            counted += 1
    snapshot = args.samples / "history.snapshot.json"
    if snapshot.exists():
        check(history_v, json.loads(snapshot.read_text()), snapshot.name, failures)
        counted += 1

    for f in failures:
        print("FAIL", f)
    print(f"{counted} documents checked, {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
