#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "distinct/point_set.hpp"

namespace distinct {

struct EmbeddingRecord {
    std::string id;
    std::string group_label;
    std::vector<float> vector;

    friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

// Labeled embedding matrix. Vectors are stored as float32; every consumer
// widens to double before doing arithmetic.
//
// Invariants (checked by validate() and by every loader):
//   - every vector has length dim
//   - all entries finite
//   - ids unique, labels non-empty
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t dim, std::vector<EmbeddingRecord> records, std::string source_tag = {});

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
    [[nodiscard]] const EmbeddingRecord& operator[](std::size_t i) const { return records_.at(i); }
    [[nodiscard]] const std::string& source_tag() const noexcept { return source_tag_; }
    void set_source_tag(std::string tag) { source_tag_ = std::move(tag); }

    // Rows at `indices`, widened to double.
    [[nodiscard]] PointSet points(const std::vector<std::size_t>& indices) const;
    [[nodiscard]] PointSet all_points() const;

    // Throws FormatError naming the offending row.
    void validate() const;

    // Equal dims and records; source_tag is provenance only.
    friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
        return a.dim_ == b.dim_ && a.records_ == b.records_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<EmbeddingRecord> records_;
    std::string source_tag_;
};

enum class TableFormat { csv, binary };

// csv when the extension is .csv, binary otherwise.
TableFormat format_from_path(const std::filesystem::path& path);

EmbeddingTable load_table(const std::filesystem::path& path, TableFormat format);
EmbeddingTable load_table(const std::filesystem::path& path);
void save_table(const EmbeddingTable& table, const std::filesystem::path& path, TableFormat format);
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);

// In-memory codecs used by the file functions.
EmbeddingTable parse_csv(const std::string& text);
std::string render_csv(const EmbeddingTable& table);
EmbeddingTable parse_binary(const std::string& bytes);
std::string render_binary(const EmbeddingTable& table);

// A table partitioned by group label. Group index lists are ascending.
class GroupedDataset {
public:
    GroupedDataset() = default;
    explicit GroupedDataset(EmbeddingTable table);

    [[nodiscard]] const EmbeddingTable& table() const noexcept { return table_; }
    [[nodiscard]] const std::map<std::string, std::vector<std::size_t>>& groups() const noexcept {
        return groups_;
    }
    [[nodiscard]] std::vector<std::string> labels() const;
    [[nodiscard]] bool has_group(const std::string& label) const { return groups_.count(label) != 0; }
    // Throws InvalidArgument for unknown labels.
    [[nodiscard]] const std::vector<std::size_t>& group(const std::string& label) const;
    [[nodiscard]] PointSet points(const std::vector<std::size_t>& indices) const {
        return table_.points(indices);
    }
    [[nodiscard]] PointSet group_points(const std::string& label) const { return points(group(label)); }

private:
    EmbeddingTable table_;
    std::map<std::string, std::vector<std::size_t>> groups_;
};

// k distinct indices drawn uniformly without replacement from `group`.
std::vector<std::size_t> subsample(const GroupedDataset& ds, const std::string& group, std::size_t k,
                                   std::uint64_t seed);

// Random disjoint halves of a group; with odd size the first half is larger.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_half(const GroupedDataset& ds,
                                                                         const std::string& group,
                                                                         std::uint64_t seed);

}  // namespace distinct
