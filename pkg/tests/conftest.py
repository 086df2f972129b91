from __future__ import annotations

from pathlib import Path

import pytest

from olcvar import parse_lifecycle_bundle, parse_model, parse_sd

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def order_composite():
    return parse_lifecycle_bundle(fixture_text("order_fulfillment_olcs.json"))


@pytest.fixture(scope="session")
def order_olcs(order_composite):
    return {c.object_id: c for c in order_composite.components}


@pytest.fixture(scope="session")
def base_model():
    return parse_model(fixture_text("order_fulfillment_base.json"))


@pytest.fixture(scope="session")
def order_sd():
    return parse_sd(fixture_text("order_fulfillment_sd.json"))
