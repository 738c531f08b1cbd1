"""Record the scenario walkthrough against the real service.

Produces frontend/tests/fixtures/scenario.json: the ordered list of
request/response pairs the UI performs during the scripted walkthrough.
Run from the repository root:  python3 frontend/scripts/record_fixture.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from hybridmon.service import build_registry, create_app

EVENTS = [
    {"name": "HPte", "attrs": {}},
    {"name": "HPev", "attrs": {"result": "pos"}},
    {"name": "IntD", "attrs": {"type": "anticoag"}},
    {"name": "WT", "attrs": {}},
    {"name": "AT", "attrs": {}},
    {"name": "PUev", "attrs": {}},
]


def main() -> None:
    client = TestClient(create_app(build_registry("models/scenario.json"), ttl_secs=3600))
    script = []

    def record(method: str, path: str, body=None):
        if method == "GET":
            response = client.get(path)
        elif method == "POST":
            response = client.post(path, json=body)
        else:
            raise ValueError(method)
        script.append(
            {
                "method": method,
                "path": path,
                "body": body,
                "status": response.status_code,
                "response": response.json(),
            }
        )
        return response.json()

    record("GET", "/api/v1/models")
    record("GET", "/api/v1/models/scenario/structure")
    created = record("POST", "/api/v1/sessions", {"model": "scenario"})
    sid = created["session"]
    record("GET", f"/api/v1/sessions/{sid}/recommendations")
    for index, event in enumerate(EVENTS):
        record("POST", f"/api/v1/sessions/{sid}/events", event)
        record("GET", f"/api/v1/sessions/{sid}/recommendations")
        if index == 2:
            # The operator explores warfarin at the conflict state first.
            record("POST", f"/api/v1/sessions/{sid}/what-if", {"name": "WT", "attrs": {}})
    out = Path("frontend/tests/fixtures/scenario.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(script, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} ({len(script)} exchanges)")


if __name__ == "__main__":
    main()
