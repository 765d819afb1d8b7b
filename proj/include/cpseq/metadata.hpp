#pragma once
// Per-asset metadata bundle: an append-only, hash-chained provenance log
// plus a current-state snapshot, composable with an identity into the
// full sequence record that gets anchored on the ledger.

#include "cpseq/digest.hpp"
#include "cpseq/errors.hpp"
#include "cpseq/identification.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpseq::meta {

enum class EventKind { acquisition, modification, maintenance, custody_transfer, condition_trigger };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]
};

struct SensorMetadata {
    std::string sensor_details;
    std::string device_variant;
    std::string clock_info;
    std::optional<GeoPoint> geospatial;
};

using Payload = std::map<std::string, std::string>;

struct ProvenanceEvent {
    std::uint64_t event_id = 0;  // 1-based, strictly increasing within a bundle
    EventKind kind = EventKind::acquisition;
    Tick logical_timestamp = 0;
    std::string actor_id;
    std::optional<SensorMetadata> sensor_metadata;
    Payload payload;
    Digest prev_digest;  // zero digest for the first event
    Digest digest;       // over every field above
};

// Recomputes the digest an event should carry given its other fields.
Digest event_digest(const ProvenanceEvent& event);

enum class SnapshotSource { proxy_estimate, direct_observation };

std::string_view to_string(SnapshotSource source);
std::optional<SnapshotSource> parse_snapshot_source(std::string_view text);

struct StateVar {
    double value = 0.0;
    std::string unit;
};

struct StateSnapshot {
    std::map<std::string, StateVar> state;
    Tick as_of = 0;
    SnapshotSource source = SnapshotSource::direct_observation;
};

struct VerifyResult {
    // Empty when the whole chain verifies; otherwise the 1-based position
    // of the first event whose id, back-link, or digest fails.
    std::optional<std::uint64_t> broken_at;
    bool valid() const { return !broken_at.has_value(); }
};

// Append-only bundle. Single writer per asset; use BundleStore when
// several call sites share assets.
class MetadataBundle {
public:
    MetadataBundle() = default;

    // Appends the next event, linking it to the current head. Refuses to
    // extend a chain that no longer verifies.
    const ProvenanceEvent& append(EventKind kind, Tick logical_timestamp, std::string actor_id,
                                  std::optional<SensorMetadata> sensor_metadata, Payload payload);

    // Replaces the snapshot; as_of must not go backwards.
    void update_state(StateSnapshot snapshot);

    VerifyResult verify() const;

    const std::vector<ProvenanceEvent>& provenance() const { return events_; }
    const StateSnapshot& current_state() const { return state_; }
    std::size_t size() const { return events_.size(); }
    Digest head_digest() const;  // digest of the last event, zero when empty

    // Wraps raw records without recomputing digests, so imported or
    // tampered data can still be run through verify().
    static MetadataBundle from_events(std::vector<ProvenanceEvent> events, StateSnapshot state);

    // Line-delimited export: one JSON record per event, then one for the
    // snapshot. Import preserves digests as stored.
    std::string to_jsonl() const;
    static MetadataBundle from_jsonl(const std::string& text);

private:
    std::vector<ProvenanceEvent> events_;
    StateSnapshot state_;
};

// Hierarchical composite of who the asset is (identity), what happened
// to it (bundle), and where live estimates come from (proxy locator).
struct CPSSequence {
    ident::Identity identity;
    MetadataBundle bundle;
    std::string proxy_locator;
    Digest digest;  // over (identity digest, bundle head digest, locator)
};

Digest sequence_digest(const ident::Identity& identity, const MetadataBundle& bundle,
                       const std::string& proxy_locator);

// Fails with an integrity error when the bundle does not verify.
CPSSequence compose_sequence(ident::Identity identity, MetadataBundle bundle,
                             std::string proxy_locator);

// Owning store with serialized appends across assets.
class BundleStore {
public:
    MetadataBundle& open(const std::string& identity_id);
    const MetadataBundle* find(const std::string& identity_id) const;
    std::vector<std::string> identity_ids() const;

    const ProvenanceEvent& append(const std::string& identity_id, EventKind kind,
                                  Tick logical_timestamp, std::string actor_id,
                                  std::optional<SensorMetadata> sensor_metadata, Payload payload);

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::unique_ptr<MetadataBundle>> bundles_;
};

}  // namespace cpseq::meta
