import os
import subprocess
import sys

import pytest

from fujita_lab import io
from fujita_lab._accel import worker_count


@pytest.mark.parametrize("x,text", [
    (None, ""), (True, "true"), (3, "3"), ("abc", "abc"), (0.1, "0.10000000000000001"), (float("inf"), "inf"),
])
def test_fmt(x, text):
    assert io.fmt(x) == text


def test_atomic_csv(tmp_path):
    path = tmp_path / "sub" / "x.csv"
    io.atomic_csv(path, ("a", "b"), [(1, 0.5), (2, None)])
    assert path.read_bytes() == b"a,b\n1,0.5\n2,\n"
    assert [p.name for p in path.parent.iterdir()] == ["x.csv"]


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("1", "numba")])
def test_numba_flag(flag, expected):
    env = dict(os.environ, FUJITA_LAB_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", "from fujita_lab import kernels; print(kernels.active.name)"],
                         env=env, capture_output=True, text=True, check=True)
    assert res.stdout.strip() == expected


def test_worker_count(monkeypatch):
    monkeypatch.setenv("FUJITA_LAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("FUJITA_LAB_THREADS", "zero")
    assert worker_count() >= 1
