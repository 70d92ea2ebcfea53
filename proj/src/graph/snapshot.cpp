#include "polyg/graph/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace polyg::graph {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'G', 'S'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_string(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

void put_scalar(std::string& out, const Scalar& s) {
    if (std::holds_alternative<std::int64_t>(s)) {
        out.push_back(0);
        put_u64(out, static_cast<std::uint64_t>(std::get<std::int64_t>(s)));
    } else if (std::holds_alternative<double>(s)) {
        out.push_back(1);
        std::uint64_t bits = 0;
        double d = std::get<double>(s);
        std::memcpy(&bits, &d, sizeof bits);
        put_u64(out, bits);
    } else {
        out.push_back(2);
        put_string(out, std::get<std::string>(s));
    }
}

void put_attrs(std::string& out, const AttrMap& attrs) {
    put_u32(out, static_cast<std::uint32_t>(attrs.size()));
    for (const auto& [k, v] : attrs) {
        put_string(out, k);
        put_scalar(out, v);
    }
}

// Reader with offset-tagged failures.
class Cursor {
public:
    Cursor(const std::string& data) : data_(data) {}

    bool failed() const { return failed_; }
    std::size_t offset() const { return pos_; }

    std::uint8_t u8() {
        if (!need(1)) return 0;
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32() {
        if (!need(4)) return 0;
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        if (!need(8)) return 0;
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::string str() {
        std::uint32_t n = u32();
        if (!need(n)) return {};
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    Scalar scalar() {
        switch (u8()) {
            case 0: return static_cast<std::int64_t>(u64());
            case 1: {
                std::uint64_t bits = u64();
                double d = 0;
                std::memcpy(&d, &bits, sizeof d);
                return d;
            }
            case 2: return str();
            default: failed_ = true; return std::int64_t{0};
        }
    }
    AttrMap attrs() {
        AttrMap out;
        std::uint32_t n = u32();
        for (std::uint32_t i = 0; i < n && !failed_; ++i) {
            std::string k = str();
            out[k] = scalar();
        }
        return out;
    }

private:
    bool need(std::size_t n) {
        if (failed_ || pos_ + n > data_.size()) {
            failed_ = true;
            return false;
        }
        return true;
    }

    const std::string& data_;
    std::size_t pos_ = 0;
    bool failed_ = false;
};

}  // namespace

Result<Ok> save_snapshot(const PropertyGraph& g, const std::string& path) {
    std::string out;
    out.append(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    out.push_back(g.inverses_materialized() ? 1 : 0);

    put_u32(out, static_cast<std::uint32_t>(g.inverse_hint().size()));
    for (const auto& [k, v] : g.inverse_hint()) {
        put_string(out, k);
        put_string(out, v);
    }

    put_u64(out, g.entities().size());
    for (const auto& e : g.entities()) {
        put_string(out, e.id);
        put_string(out, e.type);
        put_string(out, e.name);
        put_attrs(out, e.attrs);
    }

    put_u64(out, g.original_relation_count());
    for (std::size_t i = 0; i < g.original_relation_count(); ++i) {
        const Relation& r = g.relations()[i];
        put_u32(out, r.src);
        put_u32(out, r.dst);
        put_string(out, r.rel_type);
        put_attrs(out, r.attrs);
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) return Error{"cannot write snapshot " + path};
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    file.flush();
    if (!file) return Error{"short write to snapshot " + path};
    return Ok{};
}

Result<PropertyGraph> load_snapshot(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) return Error{"cannot read snapshot " + path};
    std::string data((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());

    if (data.size() < sizeof kMagic ||
        std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
        return Error{path + " is not a graph snapshot; re-ingest the source files"};
    }
    Cursor in(data);
    for (std::size_t i = 0; i < sizeof kMagic; ++i) in.u8();
    std::uint32_t version = in.u32();
    if (version != kVersion) {
        return Error{"snapshot " + path + " has unsupported version " +
                     std::to_string(version) + "; re-ingest the source files"};
    }
    bool materialized = in.u8() != 0;

    std::map<std::string, std::string> hint;
    std::uint32_t hint_count = in.u32();
    for (std::uint32_t i = 0; i < hint_count && !in.failed(); ++i) {
        std::string k = in.str();
        hint[k] = in.str();
    }

    PropertyGraph g;
    std::uint64_t entity_count = in.u64();
    for (std::uint64_t i = 0; i < entity_count && !in.failed(); ++i) {
        Entity e;
        e.id = in.str();
        e.type = in.str();
        e.name = in.str();
        e.attrs = in.attrs();
        g.add_entity(std::move(e));
    }

    std::uint64_t relation_count = in.u64();
    for (std::uint64_t i = 0; i < relation_count && !in.failed(); ++i) {
        Relation r;
        r.src = in.u32();
        r.dst = in.u32();
        r.rel_type = in.str();
        r.attrs = in.attrs();
        if (r.src >= entity_count || r.dst >= entity_count) {
            return Error{"snapshot " + path + ": relation " + std::to_string(i) +
                         " references an entity out of range"};
        }
        g.add_relation(std::move(r));
    }

    if (in.failed()) {
        return Error{"snapshot " + path + " is truncated or corrupt at byte " +
                     std::to_string(in.offset())};
    }

    g.set_inverse_hint(std::move(hint));
    g.rebuild_indexes();
    if (materialized) g = materialize_inverses(std::move(g));
    return g;
}

}  // namespace polyg::graph
