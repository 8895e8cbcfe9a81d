"""Shared fixtures: the two-API SMS corpus, the synthetic request log,
and the 50-pair toy training corpus."""

from __future__ import annotations

import json
from itertools import product

import pytest

from paramdoc import seq2seq
from paramdoc.corpus import load_corpus
from paramdoc.index import build_index

SENDSMS_DOC = {
    "api_id": "sms.SendSms",
    "api_name": "SendSms",
    "product": "Sms",
    "category": "Messaging",
    "parameters": [
        {"name": "PhoneNumbers", "type": "String", "required": True,
         "description": "Phone Numbers", "example": "[186****9602]", "direction": "Input"},
        {"name": "SignName", "type": "String", "required": True,
         "description": "Signature Name", "example": "Aliyun", "direction": "Input"},
        {"name": "TemplateCode", "type": "String", "required": True,
         "description": "Message Template ID", "example": "SMS_123456", "direction": "Input"},
        {"name": "TemplateParam", "type": "String", "required": False,
         "description": "Template Parameter", "example": "{\"code\":\"1234\"}", "direction": "Input"},
        {"name": "OutId", "type": "String", "required": False,
         "description": "Extension Field", "example": "abc", "direction": "Input"},
        {"name": "Code", "type": "String", "required": False,
         "description": "Status Code", "example": "OK", "direction": "Output"},
        {"name": "Message", "type": "String", "required": False,
         "description": "Status Message", "example": "OK", "direction": "Output"},
        {"name": "BizId", "type": "String", "required": False,
         "description": "Business ID", "example": "900619746936498440^0", "direction": "Output"},
        {"name": "RequestId", "type": "String", "required": False,
         "description": "Request ID", "example": "F655A8D5-B967-440B-8683", "direction": "Output"},
    ],
}

# AddSmsSign with its description/example cells still blank: the shape the
# recommendation flow fills in. Together with SendSms this corpus has 13
# parameter occurrences over 10 distinct names.
ADDSMSSIGN_DOC = {
    "api_id": "sms.AddSmsSign",
    "api_name": "AddSmsSign",
    "product": "Sms",
    "category": "Messaging",
    "parameters": [
        {"name": "SignName", "type": "String", "required": True,
         "description": "", "example": "", "direction": "Input"},
        {"name": "Remark", "type": "String", "required": True,
         "description": "Approval remark", "example": "corporate sign", "direction": "Input"},
        {"name": "Code", "type": "String", "required": False,
         "description": "", "example": "", "direction": "Output"},
        {"name": "SignName", "type": "String", "required": False,
         "description": "", "example": "", "direction": "Output"},
    ],
}


def tables_corpus_docs() -> list[str]:
    return [json.dumps(SENDSMS_DOC), json.dumps(ADDSMSSIGN_DOC)]


@pytest.fixture()
def tables_corpus():
    return load_corpus(tables_corpus_docs())


@pytest.fixture()
def tables_index(tables_corpus):
    return build_index(tables_corpus)


def sms_log_values() -> list[str]:
    """994 values of the form SMS_<8 digits> plus 6 letter-only outliers."""
    values = [f"SMS_{10000000 + i * 90621}" for i in range(994)]
    values += ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
    return values


def sms_log_lines() -> list[str]:
    return [f"SendSms\tTemplateCode\t{v}" for v in sms_log_values()]


def toy_triples() -> list[tuple[str, str, str]]:
    """50 distinct (api, param, description) triples over the SMS-domain
    vocabulary; includes the canonical SignName/PhoneNumbers pairs."""
    apis = ["SendSms", "AddSmsSign", "QuerySendDetails", "SendBatchSms", "DeleteSmsSign"]
    words = ["Phone", "Numbers", "Sign", "Name", "Template", "Code", "Param",
             "Message", "Biz", "Id", "Request", "Out", "Remark", "File", "List",
             "Status", "Extension", "Field", "Detail", "Batch"]
    triples = [
        ("SendSms", "SignName", "Signature Name"),
        ("SendSms", "PhoneNumbers", "Phone Numbers"),
        ("SendSms", "TemplateCode", "Message Template ID"),
        ("SendSms", "OutId", "Extension Field"),
    ]
    combos = [(a, b) for a, b in product(words, words) if a != b]
    i = 0
    for w1, w2 in combos:
        if len(triples) >= 50:
            break
        api = apis[i % len(apis)]
        i += 1
        param = w1 + w2
        if any(t[0] == api and t[1] == param for t in triples):
            continue
        triples.append((api, param, w1 + " " + w2))
    return triples


@pytest.fixture(scope="session")
def trained_toy():
    """Train the translator on the 50-pair toy corpus until memorized
    (capped at 2000 epochs). Shared across the session: training is the
    slow part of the suite."""
    triples = toy_triples()
    vocab = seq2seq.build_vocab([text for triple in triples for text in triple])
    pairs = seq2seq.encode_pairs(triples, vocab)
    model = seq2seq.init_model(vocab, hidden_dim=64, input_dim=32, seed=0)
    initial_loss = seq2seq.corpus_loss(model, pairs)

    def exact_matches(m):
        hits = 0
        for (src, _), (_, _, description) in zip(pairs, triples):
            context = seq2seq.encoder_forward(m, src)
            decoded = vocab.decode_ids(seq2seq.decode_greedy(m, context, 80))
            hits += decoded == description
        return hits

    lr = 0.1
    epochs_run = 0
    losses = []
    while epochs_run < 2000:
        result = seq2seq.train(model, pairs, epochs=100, learning_rate=lr)
        model, lr = result.model, result.final_learning_rate
        losses.extend(result.losses)
        epochs_run += 100
        if exact_matches(model) >= 50:
            break
    return {
        "model": model,
        "vocab": vocab,
        "pairs": pairs,
        "triples": triples,
        "initial_loss": initial_loss,
        "losses": losses,
        "epochs_run": epochs_run,
        "exact_matches": exact_matches(model),
    }
