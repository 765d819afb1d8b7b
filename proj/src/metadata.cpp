#include "cpseq/metadata.hpp"

#include "json.hpp"

#include <bit>
#include <sstream>

namespace cpseq::meta {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::acquisition: return "Acquisition";
        case EventKind::modification: return "Modification";
        case EventKind::maintenance: return "Maintenance";
        case EventKind::custody_transfer: return "CustodyTransfer";
        case EventKind::condition_trigger: return "ConditionTrigger";
    }
    return "Acquisition";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
    if (text == "Acquisition") return EventKind::acquisition;
    if (text == "Modification") return EventKind::modification;
    if (text == "Maintenance") return EventKind::maintenance;
    if (text == "CustodyTransfer") return EventKind::custody_transfer;
    if (text == "ConditionTrigger") return EventKind::condition_trigger;
    return std::nullopt;
}

std::string_view to_string(SnapshotSource source) {
    switch (source) {
        case SnapshotSource::proxy_estimate: return "ProxyEstimate";
        case SnapshotSource::direct_observation: return "DirectObservation";
    }
    return "DirectObservation";
}

std::optional<SnapshotSource> parse_snapshot_source(std::string_view text) {
    if (text == "ProxyEstimate") return SnapshotSource::proxy_estimate;
    if (text == "DirectObservation") return SnapshotSource::direct_observation;
    return std::nullopt;
}

namespace {

void check_sensor(const SensorMetadata& sensor) {
    if (!sensor.geospatial) return;
    const auto& geo = *sensor.geospatial;
    if (!(geo.lat >= -90.0 && geo.lat <= 90.0)) {
        fail(Errc::validation, "latitude " + std::to_string(geo.lat) + " outside [-90, 90]");
    }
    if (!(geo.lon >= -180.0 && geo.lon <= 180.0)) {
        fail(Errc::validation, "longitude " + std::to_string(geo.lon) + " outside [-180, 180]");
    }
}

// Doubles enter digests via their IEEE bit pattern so the encoding is
// exact and platform-stable.
std::uint64_t double_bits(double v) { return std::bit_cast<std::uint64_t>(v); }

}  // namespace

Digest event_digest(const ProvenanceEvent& event) {
    FieldWriter writer;
    writer.field_u64(event.event_id)
        .field(to_string(event.kind))
        .field_u64(event.logical_timestamp)
        .field(event.actor_id);
    writer.field_u64(event.sensor_metadata ? 1 : 0);
    if (event.sensor_metadata) {
        const auto& s = *event.sensor_metadata;
        writer.field(s.sensor_details).field(s.device_variant).field(s.clock_info);
        writer.field_u64(s.geospatial ? 1 : 0);
        if (s.geospatial) {
            writer.field_u64(double_bits(s.geospatial->lat));
            writer.field_u64(double_bits(s.geospatial->lon));
        }
    }
    writer.field_u64(event.payload.size());
    for (const auto& [key, value] : event.payload) {
        writer.field(key).field(value);
    }
    writer.field_digest(event.prev_digest);
    return writer.digest();
}

const ProvenanceEvent& MetadataBundle::append(EventKind kind, Tick logical_timestamp,
                                              std::string actor_id,
                                              std::optional<SensorMetadata> sensor_metadata,
                                              Payload payload) {
    auto state = verify();
    if (!state.valid()) {
        fail(Errc::integrity,
             "refusing to append: chain broken at event " + std::to_string(*state.broken_at));
    }
    if (sensor_metadata) check_sensor(*sensor_metadata);

    ProvenanceEvent event;
    event.event_id = events_.size() + 1;
    event.kind = kind;
    event.logical_timestamp = logical_timestamp;
    event.actor_id = std::move(actor_id);
    event.sensor_metadata = std::move(sensor_metadata);
    event.payload = std::move(payload);
    event.prev_digest = head_digest();
    event.digest = event_digest(event);
    events_.push_back(std::move(event));
    return events_.back();
}

void MetadataBundle::update_state(StateSnapshot snapshot) {
    if (snapshot.as_of < state_.as_of) {
        fail(Errc::validation, "state snapshot as_of " + std::to_string(snapshot.as_of) +
                                   " precedes current " + std::to_string(state_.as_of));
    }
    state_ = std::move(snapshot);
}

VerifyResult MetadataBundle::verify() const {
    Digest prev = Digest::zero();
    for (std::size_t i = 0; i < events_.size(); ++i) {
        const auto& event = events_[i];
        const std::uint64_t position = i + 1;
        if (event.event_id != position || event.prev_digest != prev ||
            event.digest != event_digest(event)) {
            return {position};
        }
        prev = event.digest;
    }
    return {};
}

Digest MetadataBundle::head_digest() const {
    return events_.empty() ? Digest::zero() : events_.back().digest;
}

MetadataBundle MetadataBundle::from_events(std::vector<ProvenanceEvent> events,
                                           StateSnapshot state) {
    MetadataBundle bundle;
    bundle.events_ = std::move(events);
    bundle.state_ = std::move(state);
    return bundle;
}

std::string MetadataBundle::to_jsonl() const {
    std::ostringstream out;
    for (const auto& event : events_) {
        nlohmann::ordered_json record;
        record["record"] = "event";
        record["event_id"] = event.event_id;
        record["kind"] = to_string(event.kind);
        record["logical_timestamp"] = event.logical_timestamp;
        record["actor_id"] = event.actor_id;
        if (event.sensor_metadata) {
            const auto& s = *event.sensor_metadata;
            nlohmann::ordered_json sensor;
            sensor["sensor_details"] = s.sensor_details;
            sensor["device_variant"] = s.device_variant;
            sensor["clock_info"] = s.clock_info;
            if (s.geospatial) sensor["geospatial"] = {s.geospatial->lat, s.geospatial->lon};
            record["sensor_metadata"] = std::move(sensor);
        }
        record["payload"] = event.payload;
        record["prev_digest"] = event.prev_digest.hex();
        record["digest"] = event.digest.hex();
        out << record.dump() << "\n";
    }
    nlohmann::ordered_json snapshot;
    snapshot["record"] = "state";
    snapshot["as_of"] = state_.as_of;
    snapshot["source"] = to_string(state_.source);
    nlohmann::ordered_json vars = nlohmann::ordered_json::object();
    for (const auto& [name, var] : state_.state) {
        vars[name] = {{"value", var.value}, {"unit", var.unit}};
    }
    snapshot["state"] = std::move(vars);
    out << snapshot.dump() << "\n";
    return out.str();
}

MetadataBundle MetadataBundle::from_jsonl(const std::string& text) {
    std::vector<ProvenanceEvent> events;
    StateSnapshot state;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
            const std::string type = record.at("record").get<std::string>();
            if (type == "event") {
                ProvenanceEvent event;
                event.event_id = record.at("event_id").get<std::uint64_t>();
                auto kind = parse_event_kind(record.at("kind").get<std::string>());
                if (!kind) fail(Errc::validation, "unknown event kind");
                event.kind = *kind;
                event.logical_timestamp = record.at("logical_timestamp").get<Tick>();
                event.actor_id = record.at("actor_id").get<std::string>();
                if (record.contains("sensor_metadata")) {
                    const auto& s = record.at("sensor_metadata");
                    SensorMetadata sensor;
                    sensor.sensor_details = s.at("sensor_details").get<std::string>();
                    sensor.device_variant = s.at("device_variant").get<std::string>();
                    sensor.clock_info = s.at("clock_info").get<std::string>();
                    if (s.contains("geospatial")) {
                        sensor.geospatial =
                            GeoPoint{s.at("geospatial").at(0).get<double>(),
                                     s.at("geospatial").at(1).get<double>()};
                    }
                    event.sensor_metadata = std::move(sensor);
                }
                event.payload = record.at("payload").get<Payload>();
                auto prev = Digest::from_hex(record.at("prev_digest").get<std::string>());
                auto dig = Digest::from_hex(record.at("digest").get<std::string>());
                if (!prev || !dig) fail(Errc::validation, "malformed digest hex");
                event.prev_digest = *prev;
                event.digest = *dig;
                events.push_back(std::move(event));
            } else if (type == "state") {
                state.as_of = record.at("as_of").get<Tick>();
                auto source = parse_snapshot_source(record.at("source").get<std::string>());
                if (!source) fail(Errc::validation, "unknown snapshot source");
                state.source = *source;
                state.state.clear();
                for (const auto& [name, var] : record.at("state").items()) {
                    state.state[name] = {var.at("value").get<double>(),
                                         var.at("unit").get<std::string>()};
                }
            } else {
                fail(Errc::validation, "unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::validation,
                 "bundle line " + std::to_string(line_no) + ": " + std::string(e.what()));
        }
    }
    return from_events(std::move(events), std::move(state));
}

Digest sequence_digest(const ident::Identity& identity, const MetadataBundle& bundle,
                       const std::string& proxy_locator) {
    FieldWriter writer;
    writer.field_digest(ident::identity_digest(identity))
        .field_digest(bundle.head_digest())
        .field(proxy_locator);
    return writer.digest();
}

CPSSequence compose_sequence(ident::Identity identity, MetadataBundle bundle,
                             std::string proxy_locator) {
    auto state = bundle.verify();
    if (!state.valid()) {
        fail(Errc::integrity,
             "bundle chain broken at event " + std::to_string(*state.broken_at));
    }
    CPSSequence seq;
    seq.digest = sequence_digest(identity, bundle, proxy_locator);
    seq.identity = std::move(identity);
    seq.bundle = std::move(bundle);
    seq.proxy_locator = std::move(proxy_locator);
    return seq;
}

MetadataBundle& BundleStore::open(const std::string& identity_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = bundles_[identity_id];
    if (!slot) slot = std::make_unique<MetadataBundle>();
    return *slot;
}

const MetadataBundle* BundleStore::find(const std::string& identity_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = bundles_.find(identity_id);
    return it == bundles_.end() ? nullptr : it->second.get();
}

std::vector<std::string> BundleStore::identity_ids() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<std::string> out;
    out.reserve(bundles_.size());
    for (const auto& [id, bundle] : bundles_) out.push_back(id);
    return out;
}

const ProvenanceEvent& BundleStore::append(const std::string& identity_id, EventKind kind,
                                           Tick logical_timestamp, std::string actor_id,
                                           std::optional<SensorMetadata> sensor_metadata,
                                           Payload payload) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = bundles_[identity_id];
    if (!slot) slot = std::make_unique<MetadataBundle>();
    return slot->append(kind, logical_timestamp, std::move(actor_id), std::move(sensor_metadata),
                        std::move(payload));
}

}  // namespace cpseq::meta
