#include "thyrotex/ingest.hpp"

#include "thyrotex/csv.hpp"
#include "thyrotex/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <unordered_set>

namespace thyrotex {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

std::string_view to_string(Diagnosis d) { return d == Diagnosis::Benign ? "benign" : "malignant"; }

std::string_view to_string(Tirads t) {
    switch (t) {
    case Tirads::T2: return "2";
    case Tirads::T3: return "3";
    case Tirads::T4a: return "4a";
    case Tirads::T4b: return "4b";
    case Tirads::T4c: return "4c";
    case Tirads::T5: return "5";
    case Tirads::Unknown: return "unknown";
    }
    return "unknown";
}

Diagnosis parse_diagnosis(std::string_view text) {
    const auto t = lower(csv::trim(text));
    if (t == "benign") return Diagnosis::Benign;
    if (t == "malignant") return Diagnosis::Malignant;
    throw Error("unknown diagnosis '" + std::string(text) + "'");
}

Tirads parse_tirads(std::string_view text) {
    const auto t = lower(csv::trim(text));
    if (t == "2") return Tirads::T2;
    if (t == "3") return Tirads::T3;
    if (t == "4a") return Tirads::T4a;
    if (t == "4b") return Tirads::T4b;
    if (t == "4c") return Tirads::T4c;
    if (t == "5") return Tirads::T5;
    if (t == "unknown" || t.empty()) return Tirads::Unknown;
    throw Error("unknown tirads '" + std::string(text) + "'");
}

bool consistent(Diagnosis d, Tirads t) {
    if (t == Tirads::Unknown) return true;
    const bool low = t == Tirads::T2 || t == Tirads::T3;
    return d == Diagnosis::Benign ? low : !low;
}

std::filesystem::path Manifest::resolve(const ManifestEntry& entry) const {
    const std::filesystem::path p(entry.image_path);
    return p.is_absolute() ? p : base_dir / p;
}

Manifest parse_manifest(std::istream& in, const std::string& source_name) {
    Manifest manifest;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t row = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (csv::is_ignorable(line)) continue;
        const auto where = source_name + " row " + std::to_string(row);
        std::vector<std::string> fields;
        try {
            fields = csv::split(line);
        } catch (const Error& e) {
            throw Error("malformed " + where + ": " + e.what());
        }
        if (!have_header) {
            if (fields.size() != 3 || lower(fields[0]) != "path" || lower(fields[1]) != "diagnosis" ||
                lower(fields[2]) != "tirads")
                throw Error("malformed " + where + ": expected header 'path,diagnosis,tirads'");
            have_header = true;
            continue;
        }
        if (fields.size() != 3)
            throw Error("malformed " + where + ": expected 3 columns, found " + std::to_string(fields.size()));
        if (fields[0].empty()) throw Error("malformed " + where + ": empty path");
        ManifestEntry entry;
        entry.image_path = fields[0];
        try {
            entry.diagnosis = parse_diagnosis(fields[1]);
            entry.tirads = parse_tirads(fields[2]);
        } catch (const Error& e) {
            throw Error("malformed " + where + ": " + e.what());
        }
        if (!consistent(entry.diagnosis, entry.tirads))
            throw Error("malformed " + where + ": inconsistent tirads for " +
                        std::string(to_string(entry.diagnosis)) + " (" + std::string(to_string(entry.tirads)) + ")");
        if (!seen.insert(entry.image_path).second)
            throw Error("malformed " + where + ": duplicate path '" + entry.image_path + "'");
        manifest.entries.push_back(std::move(entry));
    }
    if (!have_header) throw Error(source_name + ": missing header row");
    return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest " + path.string());
    auto manifest = parse_manifest(in, path.string());
    manifest.base_dir = path.parent_path();
    return manifest;
}

std::string_view to_string(Stage s) { return s == Stage::StageI ? "I" : "II"; }

Stage parse_stage(std::string_view text) {
    const auto t = lower(csv::trim(text));
    if (t == "1" || t == "i" || t == "stage1" || t == "stagei") return Stage::StageI;
    if (t == "2" || t == "ii" || t == "stage2" || t == "stageii") return Stage::StageII;
    throw Error("unknown stage '" + std::string(text) + "' (expected 1 or 2)");
}

StageLabelling stage_labels(const Manifest& manifest, Stage stage) {
    StageLabelling out;
    if (stage == Stage::StageI) {
        for (const auto& e : manifest.entries)
            out.samples.push_back({e.image_path, {stage, e.diagnosis == Diagnosis::Malignant ? 1 : 0}});
        return out;
    }
    const bool any_malignant = std::any_of(manifest.entries.begin(), manifest.entries.end(),
                                           [](const auto& e) { return e.diagnosis == Diagnosis::Malignant; });
    if (!any_malignant) throw Error("stage II requested on a manifest with no malignant entries");
    for (const auto& e : manifest.entries) {
        if (e.diagnosis != Diagnosis::Malignant) continue;
        if (e.tirads == Tirads::Unknown) {
            ++out.excluded_unknown;
            continue;
        }
        out.samples.push_back({e.image_path, {stage, e.tirads == Tirads::T5 ? 1 : 0}});
    }
    return out;
}

} // namespace thyrotex
