"""Run `ndde check --json -` on every preset and validate the report."""

import json
import pathlib
import subprocess
import sys

import jsonschema


def main() -> int:
    cli, presets, schemas = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    schema = json.loads((schemas / "criteria-report.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for cfg in sorted(presets.glob("*.cfg")):
        run = subprocess.run([cli, "check", str(cfg), "--tmax", "1000", "--json", "-"],
                             capture_output=True, text=True)
        if run.returncode not in (0, 2, 3):
            print(f"FAIL {cfg.name}: exit {run.returncode}: {run.stderr.strip()}")
            failures += 1
            continue
        report = json.loads(run.stdout)
        errors = list(validator.iter_errors(report))
        if report.get("exit_code") != run.returncode:
            errors.append(f"exit_code {report.get('exit_code')} but process exited {run.returncode}")
        for e in errors:
            print(f"FAIL {cfg.name}: {getattr(e, 'message', e)}")
        failures += bool(errors)
        if not errors:
            print(f"ok   {cfg.name}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
