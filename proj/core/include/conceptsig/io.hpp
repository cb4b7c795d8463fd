#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conceptsig/algebra.hpp"
#include "conceptsig/generators.hpp"
#include "conceptsig/hierarchy.hpp"
#include "conceptsig/random_mlp.hpp"
#include "conceptsig/signature.hpp"
#include "conceptsig/stream.hpp"

namespace conceptsig {

// All readers throw InputError with the offending field (and file, when one
// is involved) in the message.

nlohmann::json basis_to_json(const MonomialBasis& basis);
MonomialBasis basis_from_json(const nlohmann::json& j);

nlohmann::json signature_to_json(const Signature& sig);
Signature signature_from_json(const nlohmann::json& j);

nlohmann::json spec_to_json(const ManifoldSpec& spec);
ManifoldSpec spec_from_json(const nlohmann::json& j);

nlohmann::json stream_config_to_json(const StreamConfig& config);
StreamConfig stream_config_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const LayerReport& report);
nlohmann::json calibration_to_json(const MlpCalibration& c);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

Signature read_signature(const std::filesystem::path& path);
void write_signature(const std::filesystem::path& path, const Signature& sig);

// Header x1,...,xd[,label]; one row per point.
PointCloud read_csv(const std::filesystem::path& path);
PointCloud parse_csv(const std::string& text, const std::string& source = "<string>");
void write_csv(const std::filesystem::path& path, const PointCloud& cloud);
std::string format_csv(const PointCloud& cloud);

// Writes entry_NNNN.json per dictionary entry and index.json with
// {id, hits, created_step, file} records.
void write_dictionary(const std::filesystem::path& dir, const std::vector<DictionaryEntry>& entries);
std::vector<DictionaryEntry> read_dictionary(const std::filesystem::path& dir);

// Default tolerances, optionally overridden by the CONCEPTSIG_TOLERANCES
// environment variable ("key=value,..."; keys: rel_tol, abs_tol, epsilon,
// intersect_tol, max_iter, dedup, subset_tol).
struct Tolerances {
  RankPolicy rank;
  double epsilon = 1e-6;
  IntersectOptions intersect;
  double dedup = 1e-3;
  double subset_tol = 1e-6;
};
Tolerances tolerances_from_string(const std::string& text);
Tolerances tolerances_from_env();

}  // namespace conceptsig
