import io
import json

import pytest

from lamcl.generate import random_term
from lamcl.normalize import normalize_traced, reduce_simple
from lamcl.syntax import parse_term
from lamcl.trace import KEYS, ReplayError, read_trace, replay, to_record, write_trace

from conftest import CORPUS_FILES, load_source


def test_empty_trace_writes_empty_file(tmp_path):
    out = tmp_path / "t.jsonl"
    assert write_trace([], out) == 0
    assert out.read_text() == ""
    assert read_trace(out) == []


def test_single_beta_record():
    result = normalize_traced({}, parse_term(r"(\x:top. x) tt"))
    buf = io.StringIO()
    write_trace(result.trace, buf)
    [line] = buf.getvalue().splitlines()
    obj = json.loads(line)
    assert list(obj) == list(KEYS)
    assert obj["rule"] == "Beta" and obj["path"] == [] and obj["term_after"] == "tt"
    assert obj["step"] == 0


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_traces_replay(path, tmp_path):
    src = load_source(path)
    result = normalize_traced(src.ctx, src.term)
    out = tmp_path / "trace.jsonl"
    write_trace(result.trace, out)
    end = replay(src.ctx, src.term, read_trace(out))
    assert end == result.term


def test_replay_detects_tampering():
    result = normalize_traced({}, parse_term(r"(\x:top & top. <x p0, x p1>) <tt, tt>"))
    records = [to_record(e) for e in result.trace]
    bad = records[0].__class__(**{**records[0].__dict__, "term_after": "tt"})
    with pytest.raises(ReplayError):
        replay({}, parse_term(r"(\x:top & top. <x p0, x p1>) <tt, tt>"), [bad, *records[1:]])


def test_malformed_trace_line_is_located():
    with pytest.raises(ValueError, match="line 2"):
        read_trace(io.StringIO('{"step":0,"rule":"Beta","path":[],"sender":null,"child":null,'
                               '"measure":null,"complexity":null,"term_after":"tt"}\nnot json\n'))


def dump(result):
    buf = io.StringIO()
    write_trace(result.trace, buf)
    return buf.getvalue()


@pytest.mark.parametrize("path", CORPUS_FILES[:6], ids=lambda p: p.stem)
def test_master_traces_are_byte_identical(path):
    src = load_source(path)
    assert dump(normalize_traced(src.ctx, src.term)) == dump(normalize_traced(src.ctx, src.term))


@pytest.mark.parametrize("seed", range(20))
def test_random_strategy_traces_depend_only_on_seed(seed):
    s = random_term(seed, max_depth=4)
    first = dump(reduce_simple(s.ctx, s.term, "random", seed=seed, max_steps=2000))
    assert first == dump(reduce_simple(s.ctx, s.term, "random", seed=seed, max_steps=2000))
