#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dqlids/matrix.hpp"

namespace dqlids {

inline constexpr std::size_t kNumFeatures = 41;
inline constexpr std::size_t kNumClasses = 5;

// Five-way attack categorization. Integer codes double as action indices,
// so they must stay stable.
enum class ClassLabel : int {
    Normal = 0,
    Dos = 1,
    Probe = 2,
    U2r = 3,
    R2l = 4,
};

const char* class_name(ClassLabel c);
std::optional<ClassLabel> class_from_name(const std::string& name);

// One connection record as it appears in the CSV. The three symbolic
// columns (protocol_type, service, flag) are kept as strings; their slots
// in `numeric` are unused and stay zero.
struct RawRecord {
    std::array<double, kNumFeatures> numeric{};
    std::string protocol_type; // F2
    std::string service;       // F3
    std::string flag;          // F4
    std::string label;         // attack name, lowercased
    std::optional<int> difficulty;
};

bool is_symbolic_feature(std::size_t index);
const char* feature_name(std::size_t index);

// Reads comma-separated records, one per line, 42 or 43 fields
// (41 features, label, optional difficulty). Empty lines are skipped.
// Throws ParseError naming the offending line / feature.
std::vector<RawRecord> parse_records(std::istream& in);
std::vector<RawRecord> parse_records_file(const std::string& path);

// Attack-name -> category table. A copy ships in data/attack_taxonomy.txt;
// the compiled-in table is identical (a test enforces this) so the library
// works without locating the file.
class Taxonomy {
public:
    static Taxonomy load(const std::string& path);
    static Taxonomy parse(std::istream& in);
    static const Taxonomy& builtin();

    // Throws ParseError on names absent from the table.
    ClassLabel map_attack_label(const std::string& name) const;

    const std::map<std::string, ClassLabel>& entries() const { return names_; }

private:
    std::map<std::string, ClassLabel> names_;
};

struct NormalizationStats {
    std::array<double, kNumFeatures> min{};
    std::array<double, kNumFeatures> max{};
    // sorted, duplicate-free category lists for F2/F3/F4
    std::vector<std::string> protocol_vocab;
    std::vector<std::string> service_vocab;
    std::vector<std::string> flag_vocab;

    const std::vector<std::string>& vocab(std::size_t feature) const;
    std::vector<std::string>& vocab(std::size_t feature);
};

enum class EncodingMode : std::uint8_t {
    Ordinal = 0, // symbolic -> index/(vocab-1); matrix width stays 41
    OneHot = 1,  // symbolic -> one indicator column per category
};

enum class UnknownCategoryPolicy {
    Strict,  // unseen category -> error
    Lenient, // ordinal -> 1.0, one-hot -> all-zero block; warning logged
};

struct EncodedDataset {
    Matrix matrix;
    std::vector<ClassLabel> labels;
    NormalizationStats stats;
    EncodingMode mode = EncodingMode::Ordinal;

    std::size_t size() const { return labels.size(); }
    std::size_t width() const { return matrix.cols; }
};

// Min/max over numeric features, sorted vocabularies over symbolic ones.
// Throws on an empty record list.
NormalizationStats fit_stats(const std::vector<RawRecord>& records);

std::size_t encoded_width(const NormalizationStats& stats, EncodingMode mode);

// Numeric features map to (x-min)/(max-min) clamped into [0,1]; constant
// features (min == max) map to 0. Labels map through the taxonomy.
// Unseen categories follow `policy`; warnings go to `warnings` when set.
EncodedDataset encode(const std::vector<RawRecord>& records,
                      const NormalizationStats& stats,
                      const Taxonomy& taxonomy,
                      EncodingMode mode = EncodingMode::Ordinal,
                      UnknownCategoryPolicy policy = UnknownCategoryPolicy::Strict,
                      std::ostream* warnings = nullptr);

// Binary snapshot round-trip (format: docs/FORMATS.md).
void save_snapshot(const EncodedDataset& ds, const std::string& path);
EncodedDataset load_snapshot(const std::string& path);

// Fisher-Yates permutation of rows and labels together.
void shuffle_dataset(EncodedDataset& ds, std::uint64_t seed);

std::array<std::size_t, kNumClasses> class_tallies(const std::vector<ClassLabel>& labels);

} // namespace dqlids
