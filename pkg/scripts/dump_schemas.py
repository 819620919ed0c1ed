"""Write the JSON schemas of the command-line configs to docs/schemas/."""
import json
from pathlib import Path

from wsign.schemas import SCHEMAS

out = Path(__file__).resolve().parent.parent / "docs" / "schemas"
out.mkdir(parents=True, exist_ok=True)
for command, schema in SCHEMAS.items():
    doc = {"$schema": "https://json-schema.org/draft/2020-12/schema", "title": f"wsign {command} config", **schema}
    (out / f"{command}.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(out / f"{command}.json")
