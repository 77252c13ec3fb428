import json

import pytest

from apportion.propcon import Instance


@pytest.fixture
def clean_env(monkeypatch):
    for var in ("PROPCON_TIE", "PROPCON_LOG", "PROPCON_JOBS"):
        monkeypatch.delenv(var, raising=False)


@pytest.fixture
def nis_eight():
    return Instance.create([1000, 965, 965, 965, 965, 965, 625, 550])


@pytest.fixture
def nis_five():
    return Instance.create([14375, 9350, 5425, 5425, 5425])


@pytest.fixture
def quotatone_stationary():
    return Instance.create([48569, 41012, 8200, 1115, 1095])


@pytest.fixture
def quotatone_hill():
    return Instance.create([57535, 56825, 4027, 3318, 3295])


@pytest.fixture
def fixed_signpost():
    return Instance.create([4600, 2500, 1000])


@pytest.fixture
def instance_file(tmp_path):
    def write(populations, house, **kwargs):
        fname = tmp_path / "instance.json"
        dct = dict(populations=list(populations), house=house, **kwargs)
        fname.write_text(json.dumps(dct))
        return fname

    return write
