#include "dqlids/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "dqlids/error.hpp"

namespace dqlids {

namespace {

const char* kFeatureNames[kNumFeatures] = {
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
};

// same table as data/attack_taxonomy.txt
const char kBuiltinTaxonomy[] =
    "normal,normal\n"
    "apache2,dos\n"
    "back,dos\n"
    "land,dos\n"
    "mailbomb,dos\n"
    "neptune,dos\n"
    "pod,dos\n"
    "processtable,dos\n"
    "smurf,dos\n"
    "teardrop,dos\n"
    "udpstorm,dos\n"
    "ipsweep,probe\n"
    "mscan,probe\n"
    "nmap,probe\n"
    "portsweep,probe\n"
    "saint,probe\n"
    "satan,probe\n"
    "buffer_overflow,u2r\n"
    "loadmodule,u2r\n"
    "perl,u2r\n"
    "ps,u2r\n"
    "rootkit,u2r\n"
    "sqlattack,u2r\n"
    "xterm,u2r\n"
    "ftp_write,r2l\n"
    "guess_passwd,r2l\n"
    "httptunnel,r2l\n"
    "imap,r2l\n"
    "multihop,r2l\n"
    "named,r2l\n"
    "phf,r2l\n"
    "sendmail,r2l\n"
    "snmpgetattack,r2l\n"
    "snmpguess,r2l\n"
    "spy,r2l\n"
    "warezclient,r2l\n"
    "warezmaster,r2l\n"
    "worm,r2l\n"
    "xlock,r2l\n"
    "xsnoop,r2l\n";

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double(const std::string& raw, std::size_t line_no, std::size_t feature) {
    std::string s = trim(raw);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "line " << line_no << ": feature F" << (feature + 1) << " ("
            << kFeatureNames[feature] << "): non-numeric value '" << s << "'";
        throw ParseError(msg.str());
    }
    return value;
}

} // namespace

const char* class_name(ClassLabel c) {
    switch (c) {
    case ClassLabel::Normal: return "normal";
    case ClassLabel::Dos: return "dos";
    case ClassLabel::Probe: return "probe";
    case ClassLabel::U2r: return "u2r";
    case ClassLabel::R2l: return "r2l";
    }
    return "?";
}

std::optional<ClassLabel> class_from_name(const std::string& name) {
    std::string n = to_lower(trim(name));
    if (n == "normal") return ClassLabel::Normal;
    if (n == "dos") return ClassLabel::Dos;
    if (n == "probe") return ClassLabel::Probe;
    if (n == "u2r") return ClassLabel::U2r;
    if (n == "r2l") return ClassLabel::R2l;
    return std::nullopt;
}

bool is_symbolic_feature(std::size_t index) {
    return index == 1 || index == 2 || index == 3;
}

const char* feature_name(std::size_t index) {
    return index < kNumFeatures ? kFeatureNames[index] : "?";
}

std::vector<RawRecord> parse_records(std::istream& in) {
    std::vector<RawRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        std::vector<std::string> fields = split_csv(line);
        if (fields.size() != kNumFeatures + 1 && fields.size() != kNumFeatures + 2) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected " << (kNumFeatures + 1) << " or "
                << (kNumFeatures + 2) << " fields, got " << fields.size();
            throw ParseError(msg.str());
        }
        RawRecord rec;
        for (std::size_t f = 0; f < kNumFeatures; ++f) {
            if (is_symbolic_feature(f)) {
                std::string v = trim(fields[f]);
                if (f == 1)
                    rec.protocol_type = v;
                else if (f == 2)
                    rec.service = v;
                else
                    rec.flag = v;
            } else {
                rec.numeric[f] = parse_double(fields[f], line_no, f);
            }
        }
        rec.label = to_lower(trim(fields[kNumFeatures]));
        if (fields.size() == kNumFeatures + 2) {
            std::string d = trim(fields[kNumFeatures + 1]);
            int value = 0;
            auto [ptr, ec] = std::from_chars(d.data(), d.data() + d.size(), value);
            if (ec != std::errc{} || ptr != d.data() + d.size()) {
                std::ostringstream msg;
                msg << "line " << line_no << ": difficulty column: non-integer value '" << d << "'";
                throw ParseError(msg.str());
            }
            rec.difficulty = value;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<RawRecord> parse_records_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open dataset file: " + path);
    try {
        return parse_records(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

Taxonomy Taxonomy::parse(std::istream& in) {
    Taxonomy tax;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        std::size_t comma = t.find(',');
        if (comma == std::string::npos) {
            std::ostringstream msg;
            msg << "taxonomy line " << line_no << ": expected 'attack_name,category', got '" << t << "'";
            throw ParseError(msg.str());
        }
        std::string name = to_lower(trim(t.substr(0, comma)));
        std::string cat = t.substr(comma + 1);
        auto label = class_from_name(cat);
        if (name.empty() || !label) {
            std::ostringstream msg;
            msg << "taxonomy line " << line_no << ": unknown category '" << trim(cat) << "'";
            throw ParseError(msg.str());
        }
        tax.names_[name] = *label;
    }
    return tax;
}

Taxonomy Taxonomy::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open taxonomy file: " + path);
    try {
        return parse(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

const Taxonomy& Taxonomy::builtin() {
    static const Taxonomy tax = [] {
        std::istringstream in(kBuiltinTaxonomy);
        return parse(in);
    }();
    return tax;
}

ClassLabel Taxonomy::map_attack_label(const std::string& name) const {
    auto it = names_.find(name);
    if (it == names_.end())
        throw ParseError("unknown attack name: '" + name + "'");
    return it->second;
}

const std::vector<std::string>& NormalizationStats::vocab(std::size_t feature) const {
    switch (feature) {
    case 1: return protocol_vocab;
    case 2: return service_vocab;
    case 3: return flag_vocab;
    default: throw Error("feature has no vocabulary: F" + std::to_string(feature + 1));
    }
}

std::vector<std::string>& NormalizationStats::vocab(std::size_t feature) {
    return const_cast<std::vector<std::string>&>(
        static_cast<const NormalizationStats&>(*this).vocab(feature));
}

NormalizationStats fit_stats(const std::vector<RawRecord>& records) {
    if (records.empty())
        throw Error("fit_stats: empty record list");

    NormalizationStats stats;
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
        stats.min[f] = records[0].numeric[f];
        stats.max[f] = records[0].numeric[f];
    }
    std::set<std::string> protocols, services, flags;
    for (const RawRecord& rec : records) {
        for (std::size_t f = 0; f < kNumFeatures; ++f) {
            if (is_symbolic_feature(f))
                continue;
            stats.min[f] = std::min(stats.min[f], rec.numeric[f]);
            stats.max[f] = std::max(stats.max[f], rec.numeric[f]);
        }
        protocols.insert(rec.protocol_type);
        services.insert(rec.service);
        flags.insert(rec.flag);
    }
    for (std::size_t f : {1, 2, 3})
        stats.min[f] = stats.max[f] = 0.0;
    stats.protocol_vocab.assign(protocols.begin(), protocols.end());
    stats.service_vocab.assign(services.begin(), services.end());
    stats.flag_vocab.assign(flags.begin(), flags.end());
    return stats;
}

std::size_t encoded_width(const NormalizationStats& stats, EncodingMode mode) {
    if (mode == EncodingMode::Ordinal)
        return kNumFeatures;
    return kNumFeatures - 3 + stats.protocol_vocab.size() + stats.service_vocab.size() +
           stats.flag_vocab.size();
}

namespace {

// index of `value` in the sorted vocab, or -1
int vocab_index(const std::vector<std::string>& vocab, const std::string& value) {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), value);
    if (it == vocab.end() || *it != value)
        return -1;
    return static_cast<int>(it - vocab.begin());
}

} // namespace

EncodedDataset encode(const std::vector<RawRecord>& records,
                      const NormalizationStats& stats,
                      const Taxonomy& taxonomy,
                      EncodingMode mode,
                      UnknownCategoryPolicy policy,
                      std::ostream* warnings) {
    EncodedDataset ds;
    ds.stats = stats;
    ds.mode = mode;
    const std::size_t width = encoded_width(stats, mode);
    ds.matrix = Matrix(records.size(), width);
    ds.labels.reserve(records.size());

    for (std::size_t r = 0; r < records.size(); ++r) {
        const RawRecord& rec = records[r];
        double* row = ds.matrix.row(r);
        std::size_t col = 0;
        for (std::size_t f = 0; f < kNumFeatures; ++f) {
            if (is_symbolic_feature(f)) {
                const std::string& value = f == 1   ? rec.protocol_type
                                           : f == 2 ? rec.service
                                                    : rec.flag;
                const std::vector<std::string>& voc = stats.vocab(f);
                int idx = vocab_index(voc, value);
                if (idx < 0 && policy == UnknownCategoryPolicy::Strict) {
                    std::ostringstream msg;
                    msg << "record " << (r + 1) << ": feature F" << (f + 1) << " ("
                        << kFeatureNames[f] << "): unknown category '" << value << "'";
                    throw ParseError(msg.str());
                }
                if (idx < 0 && warnings) {
                    *warnings << "warning: record " << (r + 1) << ": feature F" << (f + 1)
                              << " (" << kFeatureNames[f] << "): unknown category '" << value
                              << "'\n";
                }
                if (mode == EncodingMode::Ordinal) {
                    double v;
                    if (idx < 0)
                        v = 1.0;
                    else if (voc.size() <= 1)
                        v = 0.0;
                    else
                        v = static_cast<double>(idx) / static_cast<double>(voc.size() - 1);
                    row[col++] = v;
                } else {
                    if (idx >= 0)
                        row[col + static_cast<std::size_t>(idx)] = 1.0;
                    col += voc.size();
                }
            } else {
                const double lo = stats.min[f];
                const double hi = stats.max[f];
                double v = 0.0;
                if (hi > lo)
                    v = std::clamp((rec.numeric[f] - lo) / (hi - lo), 0.0, 1.0);
                row[col++] = v;
            }
        }
        ds.labels.push_back(taxonomy.map_attack_label(rec.label));
    }
    return ds;
}

namespace {

constexpr char kSnapshotMagic[8] = {'D', 'Q', 'L', 'S', 'N', 'A', 'P', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod(out, static_cast<std::uint64_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    std::uint64_t len = 0;
    read_pod(in, len);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    return s;
}

void write_vocab(std::ostream& out, const std::vector<std::string>& vocab) {
    write_pod(out, static_cast<std::uint64_t>(vocab.size()));
    for (const std::string& v : vocab)
        write_string(out, v);
}

std::vector<std::string> read_vocab(std::istream& in) {
    std::uint64_t count = 0;
    read_pod(in, count);
    std::vector<std::string> vocab;
    vocab.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        vocab.push_back(read_string(in));
    return vocab;
}

} // namespace

void save_snapshot(const EncodedDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write snapshot: " + path);
    out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
    write_pod(out, std::uint32_t{1});
    write_pod(out, static_cast<std::uint8_t>(ds.mode));
    write_pod(out, static_cast<std::uint64_t>(ds.matrix.rows));
    write_pod(out, static_cast<std::uint64_t>(ds.matrix.cols));
    for (double v : ds.stats.min)
        write_pod(out, v);
    for (double v : ds.stats.max)
        write_pod(out, v);
    write_vocab(out, ds.stats.protocol_vocab);
    write_vocab(out, ds.stats.service_vocab);
    write_vocab(out, ds.stats.flag_vocab);
    for (ClassLabel label : ds.labels)
        write_pod(out, static_cast<std::uint8_t>(label));
    out.write(reinterpret_cast<const char*>(ds.matrix.data.data()),
              static_cast<std::streamsize>(ds.matrix.data.size() * sizeof(double)));
    if (!out)
        throw Error("short write on snapshot: " + path);
}

EncodedDataset load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open snapshot: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0)
        throw Error("not a dataset snapshot: " + path);
    std::uint32_t version = 0;
    read_pod(in, version);
    if (version != 1)
        throw Error("unsupported snapshot version " + std::to_string(version) + ": " + path);

    EncodedDataset ds;
    std::uint8_t mode = 0;
    read_pod(in, mode);
    ds.mode = static_cast<EncodingMode>(mode);
    std::uint64_t rows = 0, cols = 0;
    read_pod(in, rows);
    read_pod(in, cols);
    for (double& v : ds.stats.min)
        read_pod(in, v);
    for (double& v : ds.stats.max)
        read_pod(in, v);
    ds.stats.protocol_vocab = read_vocab(in);
    ds.stats.service_vocab = read_vocab(in);
    ds.stats.flag_vocab = read_vocab(in);
    ds.labels.resize(rows);
    for (std::uint64_t i = 0; i < rows; ++i) {
        std::uint8_t raw = 0;
        read_pod(in, raw);
        if (raw >= kNumClasses)
            throw Error("corrupt snapshot (bad label byte): " + path);
        ds.labels[i] = static_cast<ClassLabel>(raw);
    }
    ds.matrix = Matrix(rows, cols);
    in.read(reinterpret_cast<char*>(ds.matrix.data.data()),
            static_cast<std::streamsize>(ds.matrix.data.size() * sizeof(double)));
    if (!in)
        throw Error("truncated snapshot: " + path);
    return ds;
}

void shuffle_dataset(EncodedDataset& ds, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = ds.size();
    std::vector<double> tmp(ds.matrix.cols);
    for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::size_t j = pick(rng);
        if (j == i - 1)
            continue;
        double* a = ds.matrix.row(i - 1);
        double* b = ds.matrix.row(j);
        std::copy(a, a + ds.matrix.cols, tmp.begin());
        std::copy(b, b + ds.matrix.cols, a);
        std::copy(tmp.begin(), tmp.end(), b);
        std::swap(ds.labels[i - 1], ds.labels[j]);
    }
}

std::array<std::size_t, kNumClasses> class_tallies(const std::vector<ClassLabel>& labels) {
    std::array<std::size_t, kNumClasses> tallies{};
    for (ClassLabel label : labels)
        ++tallies[static_cast<std::size_t>(label)];
    return tallies;
}

} // namespace dqlids
