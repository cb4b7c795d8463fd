#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "conceptsig/error.hpp"
#include "conceptsig/generators.hpp"
#include "conceptsig/io.hpp"
#include "conceptsig/rng.hpp"
#include "conceptsig/stream.hpp"

using namespace conceptsig;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "conceptsig_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Io, SignatureRoundTrip) {
  Rng rng(1);
  FitConfig cfg;
  cfg.degree = 2;
  cfg.epsilon = 1e-3;
  cfg.projection = ProjectionConfig{3, 99};
  const Signature sig = fit(PointCloud(rng.normal_matrix(20, 5)), cfg);
  const fs::path p = scratch("sig.json");
  write_signature(p, sig);
  const Signature back = read_signature(p);
  EXPECT_EQ(back.basis, sig.basis);
  EXPECT_EQ(back.null_projector, sig.null_projector);
  EXPECT_EQ(back.eps_projector, sig.eps_projector);
  EXPECT_EQ(back.moment, sig.moment);
  EXPECT_EQ(back.singular_values, sig.singular_values);
  EXPECT_EQ(back.null_rank, sig.null_rank);
  EXPECT_EQ(back.eps_rank, sig.eps_rank);
  EXPECT_EQ(back.epsilon, sig.epsilon);
  ASSERT_TRUE(back.projection.has_value());
  EXPECT_EQ(*back.projection, *sig.projection);
}

TEST(Io, BasisRoundTripKeepsOrder) {
  const MonomialBasis b(3, 3, false);
  const MonomialBasis back = basis_from_json(basis_to_json(b));
  EXPECT_EQ(back.indices(), b.indices());
  EXPECT_EQ(basis_to_json(b).at("order"), "grlex");
}

TEST(Io, SignatureErrorsNameTheField) {
  nlohmann::json j = signature_to_json(fit(PointCloud(Eigen::RowVector2d(1, 2)), FitConfig{1}));
  j.erase("T");
  EXPECT_NE(error_of([&] { signature_from_json(j); }).find("'T'"), std::string::npos);
  j = signature_to_json(fit(PointCloud(Eigen::RowVector2d(1, 2)), FitConfig{1}));
  j["null_rank"] = "two";
  EXPECT_NE(error_of([&] { signature_from_json(j); }).find("null_rank"), std::string::npos);
}

TEST(Io, SpecRoundTripAllTypes) {
  std::vector<ManifoldSpec> specs;
  SubspaceSpec sub;
  sub.basis = Eigen::MatrixXd::Identity(3, 2);
  sub.offset = Eigen::Vector3d(1, 2, 3);
  specs.push_back(ManifoldSpec{sub});
  specs.push_back(ManifoldSpec{CircleSpec{Eigen::Vector2d(1, -1), 2.0, 0.1, 0.9}});
  specs.push_back(ManifoldSpec{SphereSpec{Eigen::Vector3d(0, 0, 1), 1.5, 0.5}});
  PolyGeneratorSpec g;
  g.k = 1;
  g.r = 2;
  g.coefficients = Eigen::MatrixXd::Ones(2, 3);
  specs.push_back(ManifoldSpec{g});
  TrajectorySpec t;
  t.start = Eigen::Vector2d(0, 1);
  t.velocity = {Eigen::Vector2d(1, 0)};
  specs.push_back(ManifoldSpec{t});
  specs.push_back(rectangle(Eigen::Vector2d::Zero(), 2, 1));
  TransformSpec tr;
  tr.base = std::make_shared<ManifoldSpec>(ManifoldSpec{CircleSpec{}});
  tr.family = TransformFamily::kTranslation;
  tr.lo = Eigen::Vector2d(-1, -1);
  tr.hi = Eigen::Vector2d(1, 1);
  specs.push_back(ManifoldSpec{tr});
  specs.back().noise_sigma = 0.01;
  specs.back().sampling = Sampling::kGrid;
  specs.back().name = "moved";
  for (const auto& s : specs) {
    const ManifoldSpec back = spec_from_json(spec_to_json(s));
    EXPECT_EQ(spec_to_json(back), spec_to_json(s));
    EXPECT_EQ(sample(back, 12, 4).points, sample(s, 12, 4).points);
  }
}

TEST(Io, SpecErrors) {
  EXPECT_NE(error_of([] { spec_from_json({{"type", "blob"}}); }).find("blob"), std::string::npos);
  EXPECT_NE(error_of([] { spec_from_json({{"type", "circle"}, {"radius", "x"}}); }).find("radius"),
            std::string::npos);
}

TEST(Io, CsvRoundTripAndErrors) {
  Rng rng(2);
  PointCloud c(rng.normal_matrix(7, 3), {"a", "b", "c", "d", "e", "f", "g"});
  const PointCloud back = parse_csv(format_csv(c));
  EXPECT_EQ(back.points, c.points);
  EXPECT_EQ(back.labels, c.labels);

  EXPECT_NE(error_of([] { parse_csv("x1,x2\n1,2\n3\n", "pts.csv"); }).find("line 3"), std::string::npos);
  EXPECT_NE(error_of([] { parse_csv("x1,x2\n1,abc\n", "pts.csv"); }).find("x2"), std::string::npos);
  EXPECT_NE(error_of([] { parse_csv("a,b\n1,2\n", "pts.csv"); }).find("pts.csv"), std::string::npos);
  EXPECT_FALSE(error_of([] { parse_csv("x1\n", "pts.csv"); }).empty());
  EXPECT_FALSE(error_of([] { read_csv(scratch("missing.csv")); }).empty());
}

TEST(Io, StreamConfigRoundTrip) {
  StreamConfig c;
  c.layers = 3;
  c.heads = {HeadConfig{4, 0.5}, HeadConfig{6, 2.0}};
  c.seed = 12345678901234ull;
  const StreamConfig back = stream_config_from_json(stream_config_to_json(c));
  EXPECT_EQ(back.layers, 3);
  ASSERT_EQ(back.heads.size(), 2u);
  EXPECT_EQ(back.heads[1].k, 6);
  EXPECT_EQ(back.heads[0].granularity, 0.5);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_THROW(stream_config_from_json({{"buffer_size", 0}}), InputError);
}

TEST(Io, DictionaryRoundTrip) {
  StreamConfig c;
  c.buffer_size = 12;
  c.heads[0].k = 3;
  StreamArchitecture net(c);
  Rng rng(3);
  const Eigen::MatrixXd basis = rng.normal_matrix(6, 2);
  for (int i = 0; i < 60; ++i) net.step(basis * rng.normal_vector(2));
  const auto& dict = net.layers()[0].dictionary;
  ASSERT_FALSE(dict.empty());
  const fs::path dir = scratch("dict");
  fs::remove_all(dir);
  write_dictionary(dir, dict);
  const auto back = read_dictionary(dir);
  ASSERT_EQ(back.size(), dict.size());
  for (std::size_t i = 0; i < dict.size(); ++i) {
    EXPECT_EQ(back[i].id, dict[i].id);
    EXPECT_EQ(back[i].hits, dict[i].hits);
    EXPECT_EQ(back[i].created_step, dict[i].created_step);
    EXPECT_EQ(back[i].flat, dict[i].flat);
    EXPECT_EQ(back[i].signature.null_projector, dict[i].signature.null_projector);
  }
}

TEST(Io, Tolerances) {
  const Tolerances t = tolerances_from_string("rel_tol=1e-10,epsilon=0.01,max_iter=50,dedup=0.1");
  EXPECT_EQ(t.rank.rel_tol, 1e-10);
  EXPECT_EQ(t.epsilon, 0.01);
  EXPECT_EQ(t.intersect.max_iter, 50);
  EXPECT_EQ(t.dedup, 0.1);
  EXPECT_EQ(t.subset_tol, Tolerances{}.subset_tol);
  EXPECT_THROW(tolerances_from_string("bogus=1"), InputError);
  EXPECT_THROW(tolerances_from_string("epsilon"), InputError);
  EXPECT_THROW(tolerances_from_string("epsilon=-1"), InputError);

  setenv("CONCEPTSIG_TOLERANCES", "subset_tol=0.5", 1);
  EXPECT_EQ(tolerances_from_env().subset_tol, 0.5);
  unsetenv("CONCEPTSIG_TOLERANCES");
  EXPECT_EQ(tolerances_from_env().subset_tol, Tolerances{}.subset_tol);
}
