"""Partitioned log bus: ordering, delivery, commits, consumer groups."""

import hashlib
import random

import pytest

from hatescope.errors import (
    InvalidCommit,
    TopicExists,
    UnknownGroup,
    UnknownTopic,
)
from hatescope.streaming.bus import MessageBus, now_ms, partition_for


def reference_partition(key, n):
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % n


class TestPartitionFor:
    def test_matches_reference(self):
        for key in ["a", "comment-17", "\U0001f600", ""]:
            for n in [1, 2, 4, 7, 16]:
                assert partition_for(key, n) == reference_partition(key, n)

    def test_stable_across_calls(self):
        assert partition_for("k", 8) == partition_for("k", 8)

    def test_range(self):
        for i in range(500):
            assert 0 <= partition_for(f"key{i}", 4) < 4

    def test_single_partition(self):
        for i in range(20):
            assert partition_for(f"key{i}", 1) == 0

    def test_spreads_keys(self):
        # Not a uniformity proof, just a sanity floor: 1000 keys over 4
        # partitions should never leave one empty.
        counts = [0] * 4
        for i in range(1000):
            counts[partition_for(f"key{i}", 4)] += 1
        assert min(counts) > 0


class TestTopics:
    def test_create_and_duplicate(self):
        bus = MessageBus()
        handle = bus.create_topic("t", 4)
        assert handle.partitions == 4
        with pytest.raises(TopicExists):
            bus.create_topic("t", 4)

    def test_bad_partition_count(self):
        with pytest.raises(ValueError):
            MessageBus().create_topic("t", 0)

    def test_unknown_topic(self):
        bus = MessageBus()
        with pytest.raises(UnknownTopic):
            bus.publish("ghost", "k", {})
        with pytest.raises(UnknownTopic):
            bus.subscribe("g", "ghost")


class TestPublish:
    def test_same_key_same_partition_consecutive_offsets(self):
        bus = MessageBus()
        bus.create_topic("t", 4)
        p1, o1 = bus.publish("t", "alpha", {"n": 1})
        p2, o2 = bus.publish("t", "alpha", {"n": 2})
        assert p1 == p2 == partition_for("alpha", 4)
        assert (o1, o2) == (0, 1)

    def test_offsets_gapless_from_zero(self):
        bus = MessageBus()
        bus.create_topic("t", 4)
        for i in range(1000):
            bus.publish("t", f"key{i}", i)
        for p in range(4):
            offsets = [m.offset for m in bus.messages("t", p)]
            assert offsets == list(range(len(offsets)))
        assert sum(bus.end_offsets("t")) == 1000

    def test_explicit_ingest_ts_preserved(self):
        bus = MessageBus()
        bus.create_topic("t", 1)
        bus.publish("t", "k", {}, ingest_ts=12345)
        assert bus.messages("t", 0)[0].ingest_ts == 12345

    def test_default_ingest_ts_is_current(self):
        bus = MessageBus()
        bus.create_topic("t", 1)
        before = now_ms()
        bus.publish("t", "k", {})
        after = now_ms()
        assert before <= bus.messages("t", 0)[0].ingest_ts <= after


class TestPollCommit:
    def make(self):
        bus = MessageBus()
        bus.create_topic("t", 2)
        bus.subscribe("g", "t")
        return bus

    def test_poll_unknown_group(self):
        bus = MessageBus()
        bus.create_topic("t", 1)
        with pytest.raises(UnknownGroup):
            bus.poll("nobody", "t")

    def test_redelivery_without_commit(self):
        bus = self.make()
        bus.publish("t", "a", 1)
        first = bus.poll("g", "t")
        second = bus.poll("g", "t")
        assert [m.payload for m in first] == [m.payload for m in second] == [1]

    def test_commit_advances_poll(self):
        bus = self.make()
        for i in range(5):
            bus.publish("t", "same-key", i)
        messages = bus.poll("g", "t")
        assert [m.payload for m in messages] == [0, 1, 2, 3, 4]
        partition = messages[0].partition
        bus.commit("g", "t", partition, 2)
        again = bus.poll("g", "t")
        assert [m.payload for m in again] == [3, 4]

    def test_group_isolation(self):
        bus = self.make()
        bus.subscribe("h", "t")
        bus.publish("t", "a", "x")
        got = bus.poll("g", "t")
        bus.commit("g", "t", got[0].partition, got[0].offset)
        assert bus.poll("g", "t") == []
        assert [m.payload for m in bus.poll("h", "t")] == ["x"]

    def test_commit_undelivered_offset_rejected(self):
        bus = self.make()
        for i in range(3):
            bus.publish("t", "same-key", i)
        delivered = bus.poll("g", "t", max_messages=2)
        partition = delivered[0].partition
        with pytest.raises(InvalidCommit):
            bus.commit("g", "t", partition, 10)
        # Offset 2 exists in the log but was never delivered to the group.
        with pytest.raises(InvalidCommit):
            bus.commit("g", "t", partition, 2)

    def test_commit_negative_rejected(self):
        bus = self.make()
        bus.publish("t", "a", 1)
        bus.poll("g", "t")
        with pytest.raises(InvalidCommit):
            bus.commit("g", "t", 0, -1)

    def test_commit_bad_partition_rejected(self):
        bus = self.make()
        bus.publish("t", "a", 1)
        bus.poll("g", "t")
        with pytest.raises(InvalidCommit):
            bus.commit("g", "t", 9, 0)

    def test_commit_is_monotone(self):
        bus = self.make()
        for i in range(4):
            bus.publish("t", "same-key", i)
        messages = bus.poll("g", "t")
        partition = messages[0].partition
        bus.commit("g", "t", partition, 3)
        bus.commit("g", "t", partition, 1)  # lower commit must not regress
        assert bus.committed_offsets("g", "t")[partition] == 3

    def test_max_messages_cap(self):
        bus = self.make()
        for i in range(10):
            bus.publish("t", "same-key", i)
        assert len(bus.poll("g", "t", max_messages=4)) == 4

    def test_partition_restriction(self):
        bus = MessageBus()
        bus.create_topic("t", 4)
        bus.subscribe("g", "t")
        for i in range(40):
            bus.publish("t", f"key{i}", i)
        only = bus.poll("g", "t", max_messages=1000, partitions=[2])
        assert only == bus.messages("t", 2)

    def test_resubscribe_keeps_state(self):
        bus = self.make()
        bus.publish("t", "a", 1)
        got = bus.poll("g", "t")
        bus.commit("g", "t", got[0].partition, got[0].offset)
        bus.subscribe("g", "t")  # idempotent; must not reset the commit
        assert bus.poll("g", "t") == []


def test_randomized_order_preservation():
    """10k random publishes over 8 partitions: per-partition poll order
    equals publish order, and per-key order is total."""
    rng = random.Random(2025)
    bus = MessageBus()
    bus.create_topic("t", 8)
    bus.subscribe("g", "t")
    published_by_partition = {p: [] for p in range(8)}
    published_by_key = {}
    for i in range(10_000):
        key = f"key{rng.randrange(200)}"
        partition, offset = bus.publish("t", key, i)
        published_by_partition[partition].append((offset, i))
        published_by_key.setdefault(key, []).append(i)

    consumed_by_partition = {p: [] for p in range(8)}
    consumed_by_key = {}
    while True:
        batch = bus.poll("g", "t", max_messages=rng.randrange(1, 500))
        if not batch:
            break
        for m in batch:
            consumed_by_partition[m.partition].append((m.offset, m.payload))
            consumed_by_key.setdefault(m.key, []).append(m.payload)
        # Commit the highest delivered offset per partition in this batch.
        highest = {}
        for m in batch:
            highest[m.partition] = max(highest.get(m.partition, -1), m.offset)
        for partition, offset in highest.items():
            bus.commit("g", "t", partition, offset)

    assert consumed_by_partition == published_by_partition
    assert consumed_by_key == published_by_key
    total = sum(len(v) for v in consumed_by_partition.values())
    assert total == 10_000
