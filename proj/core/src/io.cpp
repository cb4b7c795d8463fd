#include "conceptsig/io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "conceptsig/error.hpp"

namespace conceptsig {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw InputError("field '" + field + "': " + what);
}

const json& at(const json& j, const std::string& key) {
  if (!j.is_object()) bad(key, "parent is not an object");
  auto it = j.find(key);
  if (it == j.end()) bad(key, "missing");
  return *it;
}

double num(const json& j, const std::string& key) {
  const json& v = at(j, key);
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

double num_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? num(j, key) : fallback;
}

int integer(const json& j, const std::string& key) {
  const json& v = at(j, key);
  if (!v.is_number_integer()) bad(key, "expected an integer");
  return v.get<int>();
}

int integer_or(const json& j, const std::string& key, int fallback) {
  return j.contains(key) ? integer(j, key) : fallback;
}

std::uint64_t seed_of(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && ptr == s.data() + s.size()) return out;
  }
  bad(key, "expected a non-negative integer seed");
}

Eigen::VectorXd vec(const json& v, const std::string& key) {
  if (!v.is_array()) bad(key, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(key, "entry " + std::to_string(i) + " is not a number");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

Eigen::VectorXd vec_at(const json& j, const std::string& key) { return vec(at(j, key), key); }

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

// Row-major flat array of a square matrix.
json square_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Eigen::MatrixXd square_from(const json& j, const std::string& key, Eigen::Index n) {
  const Eigen::VectorXd flat = vec(at(j, key), key);
  if (flat.size() != n * n)
    bad(key, "expected " + std::to_string(n * n) + " entries, got " + std::to_string(flat.size()));
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < n; ++c) m(i, c) = flat(i * n + c);
  return m;
}

// List of equal-length vectors as matrix rows.
Eigen::MatrixXd rows_from(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) bad(key, "expected a non-empty array of arrays");
  const Eigen::VectorXd first = vec(v[0], key);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), first.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::VectorXd r = vec(v[i], key);
    if (r.size() != first.size()) bad(key, "rows differ in length");
    out.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return out;
}

json rows_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec_json(m.row(i).transpose()));
  return out;
}

std::pair<double, double> range_or(const json& j, const std::string& key, double lo, double hi) {
  if (!j.contains(key)) return {lo, hi};
  const Eigen::VectorXd r = vec(at(j, key), key);
  if (r.size() != 2) bad(key, "expected [lo, hi]");
  return {r(0), r(1)};
}

}  // namespace

json basis_to_json(const MonomialBasis& basis) {
  return {{"dim", basis.dim()},
          {"max_degree", basis.max_degree()},
          {"order", "grlex"},
          {"include_constant", basis.include_constant()}};
}

MonomialBasis basis_from_json(const json& j) {
  if (j.contains("order") && j.at("order") != "grlex") bad("basis.order", "only grlex is supported");
  bool constant = true;
  if (j.contains("include_constant")) {
    if (!j.at("include_constant").is_boolean()) bad("basis.include_constant", "expected a boolean");
    constant = j.at("include_constant").get<bool>();
  }
  const int dim = integer(j, "dim");
  const int degree = integer(j, "max_degree");
  if (dim < 1) bad("basis.dim", "must be >= 1");
  if (degree < 1) bad("basis.max_degree", "must be >= 1");
  return MonomialBasis(dim, degree, constant);
}

json signature_to_json(const Signature& sig) {
  json j;
  j["basis"] = basis_to_json(sig.basis);
  j["epsilon"] = sig.epsilon;
  j["singular_values"] = vec_json(sig.singular_values);
  j["null_rank"] = sig.null_rank;
  j["eps_rank"] = sig.eps_rank;
  j["T"] = square_json(sig.null_projector);
  j["T_eps"] = square_json(sig.eps_projector);
  j["moment"] = square_json(sig.moment);
  if (sig.projection)
    j["projection"] = {{"seed", sig.projection->seed},
                       {"in_dim", sig.projection->in_dim},
                       {"out_dim", sig.projection->out_dim}};
  else
    j["projection"] = nullptr;
  return j;
}

Signature signature_from_json(const json& j) {
  if (!j.is_object()) throw InputError("signature: expected a JSON object");
  MonomialBasis basis = basis_from_json(at(j, "basis"));
  const auto m = static_cast<Eigen::Index>(basis.size());
  Signature sig{basis,
                Eigen::MatrixXd(),
                vec_at(j, "singular_values"),
                square_from(j, "T", m),
                Eigen::MatrixXd(),
                num(j, "epsilon"),
                integer(j, "null_rank"),
                integer(j, "eps_rank"),
                std::nullopt};
  if (sig.singular_values.size() != m) bad("singular_values", "length must equal basis size");
  sig.eps_projector = j.contains("T_eps") ? square_from(j, "T_eps", m) : sig.null_projector;
  sig.moment = j.contains("moment") ? square_from(j, "moment", m) : Eigen::MatrixXd::Zero(m, m);
  if (j.contains("projection") && !j.at("projection").is_null()) {
    const json& p = j.at("projection");
    sig.projection = ProjectionRecord{seed_of(at(p, "seed"), "projection.seed"),
                                      integer(p, "in_dim"), integer(p, "out_dim")};
    if (sig.projection->out_dim != basis.dim())
      bad("projection.out_dim", "must equal basis.dim");
  }
  if (sig.null_rank < 0 || sig.null_rank > m) bad("null_rank", "out of range");
  return sig;
}

json spec_to_json(const ManifoldSpec& spec) {
  json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SubspaceSpec>) {
          j["type"] = "subspace";
          j["basis"] = rows_json(s.basis.transpose());
          j["offset"] = vec_json(s.offset);
          j["coef_range"] = {s.lo, s.hi};
        } else if constexpr (std::is_same_v<T, CircleSpec>) {
          j["type"] = "circle";
          j["center"] = vec_json(s.center);
          j["radius"] = s.radius;
          j["theta_range"] = {s.theta_lo, s.theta_hi};
        } else if constexpr (std::is_same_v<T, SphereSpec>) {
          j["type"] = "sphere";
          j["center"] = vec_json(s.center);
          j["radius"] = s.radius;
          j["cap_angle"] = s.cap_angle;
        } else if constexpr (std::is_same_v<T, PolyGeneratorSpec>) {
          j["type"] = "poly";
          j["k"] = s.k;
          j["r"] = s.r;
          j["coefficients"] = rows_json(s.coefficients);
          j["latent_range"] = {s.lo, s.hi};
        } else if constexpr (std::is_same_v<T, SegmentSpec>) {
          j["type"] = "segment";
          j["a"] = vec_json(s.a);
          j["b"] = vec_json(s.b);
        } else if constexpr (std::is_same_v<T, TrajectorySpec>) {
          j["type"] = "trajectory";
          j["start"] = vec_json(s.start);
          j["velocity"] = json::array();
          for (const auto& v : s.velocity) j["velocity"].push_back(vec_json(v));
          j["t_range"] = {s.t0, s.t1};
          j["append_one"] = s.append_one;
        } else if constexpr (std::is_same_v<T, UnionSpec>) {
          j["type"] = "union";
          j["parts"] = json::array();
          for (const auto& p : s.parts) j["parts"].push_back(spec_to_json(p));
        } else {
          j["type"] = "transform";
          j["base"] = spec_to_json(*s.base);
          j["family"] = s.family == TransformFamily::kRotation ? "rotation" : "translation";
          j["lo"] = vec_json(s.lo);
          j["hi"] = vec_json(s.hi);
        }
      },
      spec.shape);
  j["noise_sigma"] = spec.noise_sigma;
  j["sampling"] = spec.sampling == Sampling::kGrid ? "grid" : "uniform";
  if (!spec.name.empty()) j["name"] = spec.name;
  return j;
}

ManifoldSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw InputError("spec: expected a JSON object");
  const json& type_field = at(j, "type");
  if (!type_field.is_string()) bad("type", "expected a string");
  const std::string type = type_field.get<std::string>();

  ManifoldSpec spec;
  if (type == "rectangle") {
    const Eigen::VectorXd c = vec_at(j, "center");
    if (c.size() != 2) bad("center", "expected 2 coordinates");
    spec = rectangle(c, num(j, "width"), num(j, "height"));
  } else if (type == "stick_figure") {
    spec = stick_figure();
  } else if (type == "subspace") {
    const Eigen::MatrixXd cols = rows_from(at(j, "basis"), "basis");
    Eigen::VectorXd offset =
        j.contains("offset") ? vec_at(j, "offset") : Eigen::VectorXd::Zero(cols.cols());
    const auto [lo, hi] = range_or(j, "coef_range", -1.0, 1.0);
    spec.shape = SubspaceSpec{cols.transpose(), std::move(offset), lo, hi};
  } else if (type == "circle") {
    const Eigen::VectorXd c = j.contains("center") ? vec_at(j, "center") : Eigen::VectorXd::Zero(2);
    if (c.size() != 2) bad("center", "expected 2 coordinates");
    const auto [lo, hi] = range_or(j, "theta_range", 0.0, 2.0 * std::numbers::pi);
    spec.shape = CircleSpec{c, num_or(j, "radius", 1.0), lo, hi};
  } else if (type == "sphere") {
    spec.shape = SphereSpec{vec_at(j, "center"), num_or(j, "radius", 1.0),
                            num_or(j, "cap_angle", std::numbers::pi)};
  } else if (type == "poly") {
    const auto [lo, hi] = range_or(j, "latent_range", -1.0, 1.0);
    spec.shape = PolyGeneratorSpec{integer(j, "k"), integer(j, "r"),
                                   rows_from(at(j, "coefficients"), "coefficients"), lo, hi};
  } else if (type == "segment") {
    spec.shape = SegmentSpec{vec_at(j, "a"), vec_at(j, "b")};
  } else if (type == "trajectory") {
    TrajectorySpec t;
    t.start = vec_at(j, "start");
    const json& v = at(j, "velocity");
    if (!v.is_array()) bad("velocity", "expected an array of vectors");
    for (const auto& c : v) t.velocity.push_back(vec(c, "velocity"));
    std::tie(t.t0, t.t1) = range_or(j, "t_range", 0.0, 1.0);
    if (j.contains("append_one")) t.append_one = at(j, "append_one").get<bool>();
    spec.shape = std::move(t);
  } else if (type == "union") {
    UnionSpec u;
    const json& parts = at(j, "parts");
    if (!parts.is_array()) bad("parts", "expected an array");
    for (const auto& p : parts) u.parts.push_back(spec_from_json(p));
    spec.shape = std::move(u);
  } else if (type == "transform") {
    TransformSpec t;
    t.base = std::make_shared<const ManifoldSpec>(spec_from_json(at(j, "base")));
    const std::string family = at(j, "family").get<std::string>();
    if (family == "rotation")
      t.family = TransformFamily::kRotation;
    else if (family == "translation")
      t.family = TransformFamily::kTranslation;
    else
      bad("family", "expected 'rotation' or 'translation'");
    t.lo = vec_at(j, "lo");
    t.hi = vec_at(j, "hi");
    spec.shape = std::move(t);
  } else {
    bad("type", "unknown manifold type '" + type + "'");
  }

  if (j.contains("noise_sigma")) spec.noise_sigma = num(j, "noise_sigma");
  if (j.contains("sampling")) {
    const std::string mode = at(j, "sampling").get<std::string>();
    if (mode == "grid")
      spec.sampling = Sampling::kGrid;
    else if (mode == "uniform")
      spec.sampling = Sampling::kUniform;
    else
      bad("sampling", "expected 'uniform' or 'grid'");
  }
  if (j.contains("name")) spec.name = at(j, "name").get<std::string>();
  spec.validate();
  return spec;
}

json stream_config_to_json(const StreamConfig& c) {
  json heads = json::array();
  for (const auto& h : c.heads) heads.push_back({{"k", h.k}, {"granularity", h.granularity}});
  return {{"layers", c.layers},
          {"buffer_size", c.buffer_size},
          {"heads", heads},
          {"match_threshold", c.match_threshold},
          {"admit_threshold", c.admit_threshold},
          {"projection_dim", c.projection_dim},
          {"seed", c.seed}};
}

StreamConfig stream_config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("stream config: expected a JSON object");
  StreamConfig c;
  c.layers = integer_or(j, "layers", c.layers);
  c.buffer_size = integer_or(j, "buffer_size", c.buffer_size);
  if (j.contains("heads")) {
    const json& heads = at(j, "heads");
    if (!heads.is_array()) bad("heads", "expected an array");
    c.heads.clear();
    for (const auto& h : heads)
      c.heads.push_back(HeadConfig{integer_or(h, "k", 8), num_or(h, "granularity", 2.0)});
  }
  c.match_threshold = num_or(j, "match_threshold", c.match_threshold);
  c.admit_threshold = num_or(j, "admit_threshold", c.admit_threshold);
  c.projection_dim = integer_or(j, "projection_dim", c.projection_dim);
  if (j.contains("seed")) c.seed = seed_of(j.at("seed"), "seed");
  c.validate();
  return c;
}

json report_to_json(const LayerReport& r) {
  json heads = json::array();
  for (const auto& h : r.heads)
    heads.push_back({{"positions", h.positions}, {"steps", h.steps}, {"scores", h.scores}});
  json j = {{"step", r.step},
            {"layer", r.layer},
            {"grouped", r.grouped},
            {"heads", heads},
            {"group_rank", r.group_rank},
            {"match_score", r.match_score}};
  j["match_id"] = r.match_id ? json(*r.match_id) : json(nullptr);
  j["admitted_id"] = r.admitted_id ? json(*r.admitted_id) : json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

json calibration_to_json(const MlpCalibration& c) {
  return {{"d", c.d},
          {"a", {c.a1, c.a2}},
          {"b", {c.b1, c.b2, c.b3, c.b4}},
          {"stage1_residual", c.stage1_residual},
          {"stage2_residual", c.stage2_residual}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot write");
  out << j.dump(2) << '\n';
}

Signature read_signature(const std::filesystem::path& path) {
  try {
    return signature_from_json(read_json_file(path));
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw InputError(path.string() + ": " + what);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_signature(const std::filesystem::path& path, const Signature& sig) {
  write_json_file(path, signature_to_json(sig));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

PointCloud parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  const std::vector<std::string> header = split(line);
  if (header.empty()) throw InputError(source + ": empty header");
  const bool has_label = header.back() == "label";
  const std::size_t d = header.size() - (has_label ? 1 : 0);
  if (d == 0) throw InputError(source + ": no coordinate columns");
  for (std::size_t c = 0; c < d; ++c)
    if (header[c] != "x" + std::to_string(c + 1))
      throw InputError(source + ": header column " + std::to_string(c + 1) + " must be 'x" +
                       std::to_string(c + 1) + "', got '" + header[c] + "'");

  std::vector<double> values;
  std::vector<std::string> labels;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size())
      throw InputError(source + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(header.size()));
    for (std::size_t c = 0; c < d; ++c) {
      double v = 0.0;
      const std::string& s = cells[c];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw InputError(source + ": line " + std::to_string(line_no) + ", column x" +
                         std::to_string(c + 1) + ": not a number '" + s + "'");
      values.push_back(v);
    }
    if (has_label) labels.push_back(cells.back());
    ++row;
  }
  if (row == 0) throw InputError(source + ": no data rows");
  Eigen::MatrixXd points(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < row; ++i)
    for (std::size_t c = 0; c < d; ++c)
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = values[i * d + c];
  PointCloud cloud(std::move(points), std::move(labels));
  try {
    cloud.validate();
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
  return cloud;
}

PointCloud read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

std::string format_csv(const PointCloud& cloud) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (int c = 0; c < cloud.dim(); ++c) out << (c ? "," : "") << 'x' << c + 1;
  if (!cloud.labels.empty()) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < cloud.dim(); ++c) out << (c ? "," : "") << cloud.points(i, c);
    if (!cloud.labels.empty()) out << ',' << cloud.labels[static_cast<std::size_t>(i)];
    out << '\n';
  }
  return out.str();
}

void write_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot write");
  out << format_csv(cloud);
}

void write_dictionary(const std::filesystem::path& dir, const std::vector<DictionaryEntry>& entries) {
  std::filesystem::create_directories(dir);
  json index = json::array();
  for (const auto& e : entries) {
    std::ostringstream name;
    name << "entry_" << std::setw(4) << std::setfill('0') << e.id << ".json";
    json j = signature_to_json(e.signature);
    j["flat"] = vec_json(e.flat);
    write_json_file(dir / name.str(), j);
    index.push_back(
        {{"id", e.id}, {"hits", e.hits}, {"created_step", e.created_step}, {"file", name.str()}});
  }
  write_json_file(dir / "index.json", index);
}

std::vector<DictionaryEntry> read_dictionary(const std::filesystem::path& dir) {
  const json index = read_json_file(dir / "index.json");
  if (!index.is_array()) throw InputError((dir / "index.json").string() + ": expected an array");
  std::vector<DictionaryEntry> out;
  for (const auto& rec : index) {
    const std::string file = at(rec, "file").get<std::string>();
    const json j = read_json_file(dir / file);
    try {
      out.push_back(DictionaryEntry{integer(rec, "id"), vec_at(j, "flat"), signature_from_json(j),
                                    integer(rec, "hits"), at(rec, "created_step").get<std::int64_t>()});
    } catch (const InputError& e) {
      throw InputError((dir / file).string() + ": " + e.what());
    }
  }
  return out;
}

Tolerances tolerances_from_string(const std::string& text) {
  Tolerances t;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("tolerances: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !(v >= 0.0))
      throw InputError("tolerances: bad value for '" + key + "'");
    if (key == "rel_tol")
      t.rank.rel_tol = v;
    else if (key == "abs_tol")
      t.rank.abs_tol = v;
    else if (key == "epsilon")
      t.epsilon = v;
    else if (key == "intersect_tol")
      t.intersect.tol = v;
    else if (key == "max_iter")
      t.intersect.max_iter = static_cast<int>(v);
    else if (key == "dedup")
      t.dedup = v;
    else if (key == "subset_tol")
      t.subset_tol = v;
    else
      throw InputError("tolerances: unknown key '" + key + "'");
  }
  return t;
}

Tolerances tolerances_from_env() {
  const char* env = std::getenv("CONCEPTSIG_TOLERANCES");
  return env ? tolerances_from_string(env) : Tolerances{};
}

}  // namespace conceptsig
