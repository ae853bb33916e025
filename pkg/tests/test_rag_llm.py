from __future__ import annotations

import json
import math

import httpx
import pytest
from conftest import fixture_path
from hypothesis import given, settings
from hypothesis import strategies as st

from aptattrib.dataset import parse_unknown_csv
from aptattrib.errors import NetworkError, UsageError
from aptattrib.intel_model import ActorName
from aptattrib.rag_llm import (
    ATTRIBUTION_INSTRUCTION,
    AliasTable,
    AuthError,
    Document,
    EmptyCorpus,
    EndpointConfig,
    NoEntriesFound,
    ProtocolError,
    build_prompt,
    call_llm,
    index_corpus,
    load_corpus_dir,
    parse_llm_response,
    request_body,
    retrieve,
)
from aptattrib.rag_llm.corpus import tokenize

ATTACK = parse_unknown_csv("kind,value\ntechnique,T1105\nmalware,WhisperGate\n", "mini")


@pytest.fixture(scope="module")
def corpus():
    return index_corpus(load_corpus_dir(fixture_path("corpus")))


# -- corpus and retrieval -----------------------------------------------------


def test_tokenizer_rules():
    assert tokenize("SaintBot, a-B c2 X") == ["saintbot", "c2"]


def test_single_document_corpus():
    c = index_corpus([Document("d", "t", "alpha beta beta")])
    assert c.idf == {"alpha": math.log(2), "beta": math.log(2)}
    norm = math.sqrt(1 + 4)
    assert c.vectors[0] == pytest.approx({"alpha": 1 / norm, "beta": 2 / norm}, abs=1e-12)


def test_idf_never_zero():
    c = index_corpus([("a", "", "common x1"), ("b", "", "common y1"), ("c", "", "common z1")])
    assert c.idf["common"] == pytest.approx(math.log(2))
    assert retrieve(c, "common", 3)[0][1] > 0


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        index_corpus([])
    with pytest.raises(EmptyCorpus):
        index_corpus([("a", "t", "x y z")])


def test_vectors_are_unit_norm(corpus):
    for v in corpus.vectors:
        assert abs(math.sqrt(sum(x * x for x in v.values())) - 1) < 1e-9
    assert all(w >= 0 for w in corpus.idf.values())


def test_self_retrieval(corpus):
    assert len(corpus.documents) == 10
    for d in corpus.documents:
        hits = retrieve(corpus, d.body, 1)
        assert hits[0][0] == d.doc_id
        assert abs(hits[0][1] - 1.0) < 1e-9


def test_emberbear_query(corpus):
    hits = retrieve(corpus, "SaintBot GrimPlant GraphSteel WhisperGate Discord CDN", 3)
    assert hits[0][0] == "emberbear.txt"
    hits = retrieve(corpus, "SaintBot GrimPlant GraphSteel Discord CDN", 3)
    assert hits[0][0] == "emberbear.txt"


def test_degenerate_queries(corpus):
    assert retrieve(corpus, "a b c d", 5) == []
    assert retrieve(corpus, "", 5) == []
    assert retrieve(corpus, "zzzunseenterm", 5) == []


@settings(max_examples=200)
@given(st.lists(st.sampled_from(["discord", "wiper", "phishing", "gru", "svr", "ransomware", "ukraine", "qq", "x"]), max_size=8), st.integers(1, 12))
def test_score_bounds_and_order(corpus, words, k):
    hits = retrieve(corpus, " ".join(words), k)
    assert len(hits) <= k
    assert all(0 <= s <= 1 + 1e-9 for _, s in hits)
    assert hits == sorted(hits, key=lambda h: (-h[1], h[0]))


# -- prompt -------------------------------------------------------------------


def test_plain_prompt():
    b = build_prompt(ATTACK)
    assert b.context_blocks == ()
    assert ATTRIBUTION_INSTRUCTION in b.user_prompt
    assert "technique,T1105\nmalware,whispergate\n" in b.user_prompt
    assert b.messages()[0]["role"] == "system"
    assert b.messages()[1]["content"] == b.user_prompt


def test_rag_prompt_differs_only_in_context_region():
    plain = build_prompt(ATTACK)
    rag = build_prompt(ATTACK, [("d1", "one"), ("d2", "two two"), ("d3", "three")], budget=10_000)
    assert rag.context_blocks == ("[source: d1]\none", "[source: d2]\ntwo two", "[source: d3]\nthree")
    assert rag.user_prompt == plain.user_prompt
    assert rag.user_content() == rag.context_text() + plain.user_content()
    assert rag.user_content().index("[source: d1]") < rag.user_content().index(ATTRIBUTION_INSTRUCTION)


def test_budget_drops_whole_excerpts():
    assert build_prompt(ATTACK, [("d1", "x" * 50)], budget=20).context_blocks == ()
    b = build_prompt(ATTACK, [("a", "x" * 10), ("b", "y" * 100), ("c", "z")], budget=40)
    assert [blk.split("]")[0] for blk in b.context_blocks] == ["[source: a"]
    assert sum(len(blk) for blk in b.context_blocks) <= 40


# -- client -------------------------------------------------------------------


def _client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def _ok(text="canned reply"):
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


CFG = EndpointConfig(url="https://llm.invalid/v1/chat/completions", api_key="k", model="m")


def test_echo_and_request_shape():
    seen = []

    def handler(request):
        seen.append(request)
        return _ok("Ember Bear, 85%")

    bundle = build_prompt(ATTACK)
    assert call_llm(bundle, CFG, client=_client(handler)) == "Ember Bear, 85%"
    body = json.loads(seen[0].content)
    assert body == request_body(bundle, CFG)
    assert set(body) == {"model", "messages", "temperature"} and body["temperature"] == 0.0
    assert seen[0].headers["authorization"] == "Bearer k"


def test_auth_error_no_retry():
    calls, sleeps = [], []

    def handler(request):
        calls.append(1)
        return httpx.Response(401)

    with pytest.raises(AuthError):
        call_llm(build_prompt(ATTACK), CFG, client=_client(handler), sleep=sleeps.append)
    assert len(calls) == 1 and sleeps == []


def test_two_timeouts_then_success():
    calls, sleeps = [], []

    def handler(request):
        calls.append(1)
        if len(calls) <= 2:
            raise httpx.ReadTimeout("slow", request=request)
        return _ok()

    assert call_llm(build_prompt(ATTACK), CFG, client=_client(handler), sleep=sleeps.append) == "canned reply"
    assert len(calls) == 3 and sleeps == [1.0, 2.0]


def test_persistent_5xx_gives_up():
    sleeps = []
    with pytest.raises(NetworkError):
        call_llm(build_prompt(ATTACK), CFG, client=_client(lambda r: httpx.Response(503)), sleep=sleeps.append)
    assert sleeps == [1.0, 2.0, 4.0]


def test_429_retried_but_400_not():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(429) if len(calls) == 1 else _ok()

    assert call_llm(build_prompt(ATTACK), CFG, client=_client(handler), sleep=lambda s: None) == "canned reply"
    with pytest.raises(NetworkError):
        call_llm(build_prompt(ATTACK), CFG, client=_client(lambda r: httpx.Response(400)), sleep=lambda s: None)


def test_protocol_error():
    with pytest.raises(ProtocolError):
        call_llm(build_prompt(ATTACK), CFG, client=_client(lambda r: httpx.Response(200, json={"nope": 1})))
    with pytest.raises(ProtocolError):
        call_llm(build_prompt(ATTACK), CFG, client=_client(lambda r: httpx.Response(200, text="not json")))


def test_missing_key(monkeypatch):
    monkeypatch.delenv("LLM_API_KEY", raising=False)
    with pytest.raises(UsageError):
        EndpointConfig().resolved_key()
    monkeypatch.setenv("LLM_API_KEY", "from-env")
    assert EndpointConfig().resolved_key() == "from-env"


# -- response parsing ---------------------------------------------------------


def _transcript(name):
    return fixture_path(name).read_text(encoding="utf-8")


def test_plain_transcript():
    r = parse_llm_response(_transcript("gpt_plain_response.txt"))
    assert r.likelihoods() == [80, 70, 65, 60, 55]
    assert r.entries[0].actor_canonical == ActorName.of("Sandworm")
    assert r.entries[-1].actor_canonical is None
    assert "Lazarus" in r.entries[-1].actor_raw
    assert any("330" in n for n in r.notes)


def test_rag_transcript():
    r = parse_llm_response(_transcript("gpt_rag_response.txt"))
    assert r.likelihoods() == [85, 75, 65, 60, 55]
    assert [e.actor_canonical.display for e in r.entries] == ["EmberBear", "Sandworm", "APT29", "WizardSpider", "Gamaredon"]
    assert r.top().likelihood_pct == 85
    assert any("ambiguous" in n for n in r.notes)


def test_no_entries():
    with pytest.raises(NoEntriesFound):
        parse_llm_response("no likelihoods here")


def test_out_of_range_dropped():
    r = parse_llm_response("1. APT28\nLikelihood: 140%\n2. Turla\nLikelihood: 40%\n")
    assert [(e.actor_raw, e.likelihood_pct) for e in r.entries] == [("Turla", 40.0)]
    assert any("outside" in n for n in r.notes)


def test_inline_and_bullets():
    r = parse_llm_response("Ranking:\n- Fancy Bear: 60%\n- **VOODOO BEAR** (30%)\n")
    assert [(e.actor_canonical.display, e.likelihood_pct) for e in r.entries] == [("APT28", 60.0), ("Sandworm", 30.0)]


def test_alias_table():
    t = AliasTable.bundled()
    assert t.lookup("cozy bear") == ActorName.of("APT29")
    assert t.lookup("SaintBear") == ActorName.of("EmberBear")
    actor, note = t.canonicalize("Sandworm (APT28/Fancy Bear)")
    assert actor == ActorName.of("Sandworm") and "ambiguous" in note
    assert t.canonicalize("Lazarus Group") == (None, None)


_TEMPLATE = """Based on the indicators:

1. {a}Ember Bear (SaintBear){a}
   - {b}Likelihood{b}: {c}85%{c}
   - Reasoning: Discord CDN staging.

2. {a}Sandworm{a}
   - {b}Likelihood{b}: {c}75%{c}

3. {a}APT29{a}
   - {b}Likelihood{b}: {c}65%{c}
"""


@settings(max_examples=100)
@given(st.sampled_from(["", "*", "**", "_", "__", "***"]), st.sampled_from(["", "*", "**", "_"]), st.sampled_from(["", "*", "**", "_"]))
def test_emphasis_does_not_change_entries(a, b, c):
    base = parse_llm_response(_TEMPLATE.format(a="", b="", c=""))
    got = parse_llm_response(_TEMPLATE.format(a=a, b=b, c=c))
    assert got.entries == base.entries
    assert [e.likelihood_pct for e in got.entries] == [85, 75, 65]
