"""Runs the CLI on small inputs and validates every JSON artifact against docs/schemas."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
schemas = {p.name: json.loads(p.read_text()) for p in (root / "docs" / "schemas").glob("*.schema.json")}
registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in schemas.items())


def check(doc, schema_name, label):
    validator = jsonschema.Draft202012Validator(schemas[schema_name], registry=registry)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
    for e in errors:
        print(f"FAIL {label}: {list(e.path)}: {e.message}")
    if not errors:
        print(f"ok   {label}")
    return not errors


def run(args, expect):
    r = subprocess.run([cli, *args], capture_output=True, text=True)
    if r.returncode != expect:
        print(f"FAIL {' '.join(args)}: exit {r.returncode}, expected {expect}\n{r.stderr}")
        return False
    return True


ok = True
with tempfile.TemporaryDirectory() as tmp:
    out = pathlib.Path(tmp)
    data = root / "data"
    runs = [
        (["capacity", "--domain", "ellipsoid:1,2", "--out", str(out / "cap_e")], 0, "cap_e/capacity.json", "capacity"),
        (["capacity", "--domain", str(data / "radial_domain.json"), "--samples", "100000", "--out", str(out / "cap_r")],
         0, "cap_r/capacity.json", "capacity"),
        (["construct", "--a", "3.141592653589793", "--analytic", "quadratic", "--check", "sandwich,volume,graph",
          "--out", str(out / "con_q")], 0, "con_q/certificate.json", "certificate"),
        (["construct", "--input", str(data / "dented_domain.json"), "--out", str(out / "con_d")],
         0, "con_d/certificate.json", "certificate"),
        (["positivity", "--demo", "twist", "--grid", "65x128", "--steps", "16", "--out", str(out / "pos")],
         0, "pos/H_report.json", "H_report"),
        (["positivity", "--demo", "negative", "--grid", "33x64", "--out", str(out / "neg")],
         3, "neg/H_report.json", "H_report"),
    ]
    for args, code, artifact, schema in runs:
        if run(args, code):
            ok &= check(json.loads((out / artifact).read_text()), f"{schema}.schema.json", artifact)
        else:
            ok = False
    for f in ["ellipsoid.json", "radial_domain.json"]:
        ok &= check(json.loads((data / f).read_text()), "domain.schema.json", f)
    for f in ["bump_domain.json", "dented_domain.json", "grid_domain.json"]:
        ok &= check(json.loads((data / f).read_text()), "hamiltonian.schema.json", f)

sys.exit(0 if ok else 1)
