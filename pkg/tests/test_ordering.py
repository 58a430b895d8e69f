from __future__ import annotations

import random
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from datemin import Store, context_key, next_count
from datemin.errors import CounterOverflow, EmptyLabel, StoreIO
from datemin.ordering import MAX_PERSISTED_COUNT, current_count


def reference_sha256(data: bytes) -> str:
    """Plain FIPS 180-4 SHA-256, independent of hashlib."""
    def rotr(x, n):
        return ((x >> n) | (x << (32 - n))) & 0xFFFFFFFF

    primes = [p for p in range(2, 312) if all(p % d for d in range(2, int(p**0.5) + 1))][:64]
    k = [int((p ** (1 / 3) % 1) * 2**32) for p in primes]
    h = [int((p ** 0.5 % 1) * 2**32) for p in primes[:8]]
    msg = data + b"\x80" + b"\x00" * ((55 - len(data)) % 64) + struct.pack(">Q", len(data) * 8)
    for off in range(0, len(msg), 64):
        w = list(struct.unpack(">16I", msg[off:off + 64]))
        for i in range(16, 64):
            s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3)
            s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10)
            w.append((w[i - 16] + s0 + w[i - 7] + s1) & 0xFFFFFFFF)
        a, b, c, d, e, f, g, hh = h
        for i in range(64):
            t1 = (hh + (rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25)) + ((e & f) ^ (~e & g)) + k[i] + w[i]) & 0xFFFFFFFF
            t2 = ((rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22)) + ((a & b) ^ (a & c) ^ (b & c))) & 0xFFFFFFFF
            a, b, c, d, e, f, g, hh = (t1 + t2) & 0xFFFFFFFF, a, b, c, (d + t1) & 0xFFFFFFFF, e, f, g
        h = [(x + y) & 0xFFFFFFFF for x, y in zip(h, [a, b, c, d, e, f, g, hh])]
    return "".join(f"{x:08x}" for x in h)


def test_reference_hash_matches_published_vector():
    assert reference_sha256(b"abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_context_key_of_a_matches_reference():
    key = context_key("a")
    assert len(bytes.fromhex(key)) == 32
    assert key == reference_sha256(b"a")


@given(st.text(min_size=1, max_size=80))
def test_context_key_matches_reference_for_any_label(label):
    assert context_key(label) == reference_sha256(label.encode("utf-8"))


def test_context_key_is_deterministic_and_distinguishes_labels():
    assert context_key("attachment:project42") == context_key("attachment:project42")
    assert context_key("user:alice") != context_key("user:bob")


def test_empty_label_rejected(store):
    with pytest.raises(EmptyLabel):
        context_key("")
    with pytest.raises(EmptyLabel):
        next_count(store, "")


def test_first_and_sequential_counts(store):
    assert next_count(store, "watched:42") == 1
    assert [next_count(store, "seq") for _ in range(3)] == [1, 2, 3]
    assert current_count(store, "seq") == 3


def test_store_holds_keys_not_labels(store):
    next_count(store, "user:alice")
    assert "user:alice" not in store.dumps()
    assert context_key("user:alice") in store.contexts


def test_interleavings_match_scalar_counter_oracle(store):
    rng = random.Random(5)
    labels = ["u:alice", "u:bob", "u:carol"]
    oracle = {label: 0 for label in labels}
    issued = {label: [] for label in labels}
    for _ in range(600):
        label = rng.choice(labels)
        oracle[label] += 1
        got = next_count(store, label)
        assert got == oracle[label]
        issued[label].append(got)
    for label in labels:
        assert issued[label] == list(range(1, len(issued[label]) + 1))


def test_counter_persists_and_reloads(tmp_path):
    path = tmp_path / "s.json"
    with Store.open(path) as s:
        for _ in range(4):
            next_count(s, "ctx")
    with Store.open(path) as s:
        assert next_count(s, "ctx") == 5


def test_persistence_failure_does_not_issue_count(tmp_path, monkeypatch):
    path = tmp_path / "s.json"
    with Store.open(path) as s:
        next_count(s, "ctx")

        def broken(*args, **kwargs):
            raise OSError("disk full")

        monkeypatch.setattr("datemin.store.os.replace", broken)
        with pytest.raises(StoreIO):
            next_count(s, "ctx")
        monkeypatch.undo()
        assert current_count(s, "ctx") == 1
        assert next_count(s, "ctx") == 2


def test_32_bit_overflow_is_an_error(store):
    store.contexts[context_key("busy")] = MAX_PERSISTED_COUNT
    with pytest.raises(CounterOverflow):
        next_count(store, "busy")
    assert store.contexts[context_key("busy")] == MAX_PERSISTED_COUNT
