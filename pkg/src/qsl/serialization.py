"""JSON encoding of keys, messages and signatures.

Cells are two-character strings ("+Z", "-Z", "+X", "-X"), labels are
"0", "1", "+", "-".  Arrays nest as [a][k][c] (signatures as [a][c]).
"""

from __future__ import annotations

import json

from .protocol import Message, PrivateKey, PublicKeyDescription, Signature
from .qubit import Bb84Label, KeyCell

_LABEL_BY_SYMBOL = {label.symbol: label for label in Bb84Label}


def _label_from_symbol(s: str) -> Bb84Label:
    try:
        return _LABEL_BY_SYMBOL[s]
    except KeyError:
        raise ValueError(f"bad label symbol {s!r}") from None


def private_key_to_obj(sk: PrivateKey) -> dict:
    return {
        "type": "private_key",
        "lambda": sk.lam,
        "l": sk.l,
        "cells": [[[cell.code for cell in branch] for branch in pair] for pair in sk.cells],
    }


def private_key_from_obj(obj: dict) -> PrivateKey:
    _expect(obj, "private_key")
    sk = PrivateKey(tuple(tuple(tuple(KeyCell.from_code(s) for s in branch) for branch in pair)
                          for pair in obj["cells"]))
    _check_dims(obj, sk.lam, sk.l)
    return sk


def public_key_to_obj(pk: PublicKeyDescription) -> dict:
    return {
        "type": "public_key",
        "lambda": pk.lam,
        "l": pk.l,
        "labels": [[[label.symbol for label in branch] for branch in pair] for pair in pk.labels],
    }


def public_key_from_obj(obj: dict) -> PublicKeyDescription:
    _expect(obj, "public_key")
    pk = PublicKeyDescription(tuple(tuple(tuple(_label_from_symbol(s) for s in branch)
                                          for branch in pair) for pair in obj["labels"]))
    _check_dims(obj, pk.lam, pk.l)
    return pk


def message_to_obj(m: Message) -> dict:
    return {"type": "message", "l": len(m), "bits": list(m.bits)}


def message_from_obj(obj: dict) -> Message:
    _expect(obj, "message")
    m = Message(tuple(obj["bits"]))
    if "l" in obj and obj["l"] != len(m):
        raise ValueError("message length field disagrees with bits")
    return m


def signature_to_obj(sig: Signature) -> dict:
    return {
        "type": "signature",
        "lambda": sig.lam,
        "l": sig.l,
        "blocks": [[cell.code for cell in block] for block in sig.blocks],
    }


def signature_from_obj(obj: dict) -> Signature:
    _expect(obj, "signature")
    sig = Signature(tuple(tuple(KeyCell.from_code(s) for s in block) for block in obj["blocks"]))
    _check_dims(obj, sig.lam, sig.l)
    return sig


def _expect(obj: dict, kind: str) -> None:
    if obj.get("type", kind) != kind:
        raise ValueError(f"expected a {kind} document, got {obj.get('type')!r}")


def _check_dims(obj: dict, lam: int, l: int) -> None:
    if obj.get("lambda", lam) != lam or obj.get("l", l) != l:
        raise ValueError("dimension fields disagree with array shape")


_ENCODERS = {
    PrivateKey: private_key_to_obj,
    PublicKeyDescription: public_key_to_obj,
    Message: message_to_obj,
    Signature: signature_to_obj,
}
_DECODERS = {
    "private_key": private_key_from_obj,
    "public_key": public_key_from_obj,
    "message": message_from_obj,
    "signature": signature_from_obj,
}


def dumps(value) -> str:
    return json.dumps(_ENCODERS[type(value)](value), separators=(",", ":"))


def loads(text: str):
    obj = json.loads(text)
    try:
        decode = _DECODERS[obj["type"]]
    except (KeyError, TypeError):
        raise ValueError("document has no recognised 'type' field") from None
    return decode(obj)
