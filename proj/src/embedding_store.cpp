#include "distinct/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "distinct/error.hpp"
#include "distinct/rng.hpp"

namespace distinct {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'D', 'E'};
constexpr std::uint8_t kBinaryVersion = 1;

void check_record(const EmbeddingRecord& r, std::size_t dim, long row) {
    if (r.id.empty()) throw FormatError("empty id", row);
    if (r.group_label.empty()) throw FormatError("empty group label for id '" + r.id + "'", row);
    if (r.vector.size() != dim)
        throw FormatError("ragged row: expected " + std::to_string(dim) + " values, got " +
                              std::to_string(r.vector.size()),
                          row);
    for (std::size_t j = 0; j < r.vector.size(); ++j)
        if (!std::isfinite(r.vector[j]))
            throw FormatError("non-finite value in column d" + std::to_string(j), row);
}

// RFC-4180 record splitter. Returns false at end of input.
bool next_csv_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields) {
    fields.clear();
    if (pos >= text.size()) return false;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    while (pos < text.size()) {
        const char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    pos += 2;
                    continue;
                }
                quoted = false;
            } else {
                field.push_back(c);
            }
            ++pos;
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
            ++pos;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            field_started = false;
            ++pos;
        } else if (c == '\n' || c == '\r') {
            ++pos;
            if (c == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
            break;
        } else {
            field.push_back(c);
            field_started = true;
            ++pos;
        }
    }
    if (quoted) throw FormatError("unterminated quoted field");
    fields.push_back(std::move(field));
    return true;
}

bool needs_quotes(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_csv_field(std::string& out, const std::string& s) {
    if (!needs_quotes(s)) {
        out += s;
        return;
    }
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

float parse_float(std::string_view s, long row, std::size_t column) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    float value = 0.0F;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec == std::errc::invalid_argument || ptr != s.data() + s.size())
        throw FormatError("cannot parse value '" + std::string(s) + "' in column d" + std::to_string(column),
                          row);
    if (ec == std::errc::result_out_of_range)
        throw FormatError("non-finite value in column d" + std::to_string(column), row);
    if (!std::isfinite(value)) throw FormatError("non-finite value in column d" + std::to_string(column), row);
    return value;
}

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos, long row) {
    if (pos + sizeof(T) > in.size()) throw FormatError("truncated binary file", row);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i));
    pos += sizeof(T);
    return value;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim, std::vector<EmbeddingRecord> records, std::string source_tag)
    : dim_(dim), records_(std::move(records)), source_tag_(std::move(source_tag)) {
    validate();
}

void EmbeddingTable::validate() const {
    if (dim_ == 0) throw FormatError("dimension must be positive");
    std::unordered_set<std::string_view> ids;
    ids.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        check_record(records_[i], dim_, static_cast<long>(i));
        if (!ids.insert(records_[i].id).second)
            throw FormatError("duplicate id '" + records_[i].id + "'", static_cast<long>(i));
    }
}

PointSet EmbeddingTable::points(const std::vector<std::size_t>& indices) const {
    PointSet out(dim_);
    out.reserve(indices.size());
    std::vector<double> row(dim_);
    for (std::size_t i : indices) {
        const auto& v = records_.at(i).vector;
        std::copy(v.begin(), v.end(), row.begin());
        out.push_back(row);
    }
    return out;
}

PointSet EmbeddingTable::all_points() const {
    std::vector<std::size_t> all(records_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return points(all);
}

TableFormat format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".csv" ? TableFormat::csv : TableFormat::binary;
}

EmbeddingTable parse_csv(const std::string& text) {
    std::size_t pos = 0;
    std::vector<std::string> fields;
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;
    if (!next_csv_record(text, pos, fields)) throw FormatError("empty file: missing header");
    if (fields.size() < 3 || fields[0] != "id" || fields[1] != "label")
        throw FormatError("malformed header: expected id,label,d0,...");
    const std::size_t dim = fields.size() - 2;
    for (std::size_t j = 0; j < dim; ++j)
        if (fields[j + 2] != "d" + std::to_string(j))
            throw FormatError("malformed header: column " + std::to_string(j + 2) + " should be d" +
                              std::to_string(j));

    std::vector<EmbeddingRecord> records;
    std::unordered_set<std::string> ids;
    long row = 0;
    while (next_csv_record(text, pos, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != dim + 2)
            throw FormatError("ragged row: expected " + std::to_string(dim + 2) + " fields, got " +
                                  std::to_string(fields.size()),
                              row);
        EmbeddingRecord rec;
        rec.id = std::move(fields[0]);
        rec.group_label = std::move(fields[1]);
        rec.vector.reserve(dim);
        for (std::size_t j = 0; j < dim; ++j) rec.vector.push_back(parse_float(fields[j + 2], row, j));
        check_record(rec, dim, row);
        if (!ids.insert(rec.id).second) throw FormatError("duplicate id '" + rec.id + "'", row);
        records.push_back(std::move(rec));
        ++row;
    }
    return EmbeddingTable(dim, std::move(records));
}

std::string render_csv(const EmbeddingTable& table) {
    std::string out = "id,label";
    for (std::size_t j = 0; j < table.dim(); ++j) out += ",d" + std::to_string(j);
    out.push_back('\n');
    char buf[32];
    for (const auto& r : table.records()) {
        write_csv_field(out, r.id);
        out.push_back(',');
        write_csv_field(out, r.group_label);
        for (float v : r.vector) {
            auto res = std::to_chars(buf, buf + sizeof(buf), v);
            out.push_back(',');
            out.append(buf, res.ptr);
        }
        out.push_back('\n');
    }
    return out;
}

EmbeddingTable parse_binary(const std::string& bytes) {
    if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin()))
        throw FormatError("malformed header: bad magic (expected MMDE)");
    std::size_t pos = 4;
    const auto version = get_le<std::uint8_t>(bytes, pos, -1);
    if (version != kBinaryVersion)
        throw FormatError("malformed header: unsupported version " + std::to_string(version));
    const auto count = get_le<std::uint32_t>(bytes, pos, -1);
    const auto dim = get_le<std::uint32_t>(bytes, pos, -1);
    if (dim == 0) throw FormatError("malformed header: zero dimension");

    std::vector<EmbeddingRecord> records;
    records.reserve(std::min<std::size_t>(count, bytes.size()));
    std::unordered_set<std::string> ids;
    for (std::uint32_t i = 0; i < count; ++i) {
        const long row = static_cast<long>(i);
        EmbeddingRecord rec;
        const auto id_len = get_le<std::uint16_t>(bytes, pos, row);
        if (pos + id_len > bytes.size()) throw FormatError("truncated binary file", row);
        rec.id = bytes.substr(pos, id_len);
        pos += id_len;
        const auto label_len = get_le<std::uint16_t>(bytes, pos, row);
        if (pos + label_len > bytes.size()) throw FormatError("truncated binary file", row);
        rec.group_label = bytes.substr(pos, label_len);
        pos += label_len;
        rec.vector.resize(dim);
        for (std::uint32_t j = 0; j < dim; ++j)
            rec.vector[j] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos, row));
        check_record(rec, dim, row);
        if (!ids.insert(rec.id).second) throw FormatError("duplicate id '" + rec.id + "'", row);
        records.push_back(std::move(rec));
    }
    if (pos != bytes.size()) throw FormatError("trailing bytes after last record");
    return EmbeddingTable(dim, std::move(records));
}

std::string render_binary(const EmbeddingTable& table) {
    std::string out(kMagic, kMagic + 4);
    put_le<std::uint8_t>(out, kBinaryVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.dim()));
    for (const auto& r : table.records()) {
        if (r.id.size() > 0xFFFF || r.group_label.size() > 0xFFFF)
            throw Error("id or label longer than 65535 bytes cannot be stored in binary format");
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(r.id.size()));
        out += r.id;
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(r.group_label.size()));
        out += r.group_label;
        for (float v : r.vector) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

EmbeddingTable load_table(const std::filesystem::path& path, TableFormat format) {
    const std::string bytes = read_file(path);
    auto table = format == TableFormat::csv ? parse_csv(bytes) : parse_binary(bytes);
    table.set_source_tag(path.string());
    return table;
}

EmbeddingTable load_table(const std::filesystem::path& path) { return load_table(path, format_from_path(path)); }

void save_table(const EmbeddingTable& table, const std::filesystem::path& path, TableFormat format) {
    write_file(path, format == TableFormat::csv ? render_csv(table) : render_binary(table));
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path) {
    save_table(table, path, format_from_path(path));
}

GroupedDataset::GroupedDataset(EmbeddingTable table) : table_(std::move(table)) {
    for (std::size_t i = 0; i < table_.size(); ++i) groups_[table_[i].group_label].push_back(i);
}

std::vector<std::string> GroupedDataset::labels() const {
    std::vector<std::string> out;
    out.reserve(groups_.size());
    for (const auto& [label, _] : groups_) out.push_back(label);
    return out;
}

const std::vector<std::size_t>& GroupedDataset::group(const std::string& label) const {
    auto it = groups_.find(label);
    if (it == groups_.end()) throw InvalidArgument("unknown group label '" + label + "'");
    return it->second;
}

std::vector<std::size_t> subsample(const GroupedDataset& ds, const std::string& group, std::size_t k,
                                   std::uint64_t seed) {
    const auto& members = ds.group(group);
    if (k > members.size())
        throw InvalidArgument("subsample of " + std::to_string(k) + " exceeds size " +
                              std::to_string(members.size()) + " of group '" + group + "'");
    Rng rng(seed);
    return sample_without_replacement(members, k, rng);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_half(const GroupedDataset& ds,
                                                                         const std::string& group,
                                                                         std::uint64_t seed) {
    std::vector<std::size_t> members = ds.group(group);
    if (members.size() < 4)
        throw InvalidArgument("group '" + group + "' has " + std::to_string(members.size()) +
                              " items; split-half needs at least 4");
    Rng rng(seed);
    shuffle(std::span(members), rng);
    const std::size_t first = (members.size() + 1) / 2;
    std::vector<std::size_t> a(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(first));
    std::vector<std::size_t> b(members.begin() + static_cast<std::ptrdiff_t>(first), members.end());
    return {std::move(a), std::move(b)};
}

}  // namespace distinct
