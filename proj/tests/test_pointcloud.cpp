#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "roomtherm/error.hpp"
#include "roomtherm/pointcloud.hpp"

using namespace roomtherm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "roomtherm_pointcloud_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const auto path = scratch(name);
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(LoadCloud, XyzTwoLines) {
  const auto path = write_text("two.xyz", "0 0 0\n1 0 0\n");
  const auto cloud = load_cloud(path, CloudFormat::Xyz);
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud[1], Point3(1, 0, 0));
}

TEST(LoadCloud, XyzSkipsCommentsAndBlankLines) {
  const auto path = write_text("comments.xyz", "# scan\n\n1 2 3\n# tail\n4 5 6\n");
  const auto cloud = load_cloud(path, CloudFormat::Xyz);
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud[0], Point3(1, 2, 3));
}

TEST(LoadCloud, XyzNonNumericNamesLine) {
  const auto path = write_text("bad.xyz", "0 0 0\n1 x 0\n");
  try {
    load_cloud(path, CloudFormat::Xyz);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadCloud, PlyCountMismatch) {
  const auto path = write_text("short.ply",
                               "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
                               "property float z\nend_header\n0 0 0\n1 1 1\n");
  EXPECT_THROW(load_cloud(path, CloudFormat::PlyAscii), ParseError);
}

TEST(LoadCloud, PlyExtraPropertiesIgnored) {
  const auto path = write_text("color.ply",
                               "ply\nformat ascii 1.0\ncomment from a scanner\nelement vertex 2\n"
                               "property uchar red\nproperty float x\nproperty uchar green\nproperty float y\n"
                               "property float z\nproperty uchar blue\nelement face 0\n"
                               "property list uchar int vertex_indices\nend_header\n"
                               "255 0.5 10 1.5 2.5 7\n0 -1 0 -2 -3 0\n");
  const auto cloud = load_cloud(path, CloudFormat::PlyAscii);
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud[0], Point3(0.5, 1.5, 2.5));
  EXPECT_EQ(cloud[1], Point3(-1, -2, -3));
}

TEST(LoadCloud, PlyBinaryRejected) {
  const auto path = write_text("binary.ply",
                               "ply\nformat binary_little_endian 1.0\nelement vertex 0\nproperty float x\n"
                               "property float y\nproperty float z\nend_header\n");
  EXPECT_THROW(load_cloud(path, CloudFormat::PlyAscii), ParseError);
}

TEST(LoadCloud, PlyMalformedHeader) {
  const auto path = write_text("header.ply", "plx\nformat ascii 1.0\nend_header\n");
  EXPECT_THROW(load_cloud(path, CloudFormat::PlyAscii), ParseError);
}

TEST(LoadCloud, MissingFile) {
  EXPECT_THROW(load_cloud(scratch("nope.xyz"), CloudFormat::Xyz), InputError);
}

TEST(SaveCloud, EmptyCloudRoundTrip) {
  const auto path = scratch("empty.ply");
  save_cloud(PointCloud{}, path, CloudFormat::PlyAscii);
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("element vertex 0"), std::string::npos);
  EXPECT_TRUE(load_cloud(path, CloudFormat::PlyAscii).empty());
}

TEST(SaveCloud, RandomRoundTripBothFormats) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  PointCloud cloud;
  for (int i = 0; i < 1000; ++i) cloud.points.emplace_back(u(rng), u(rng), u(rng));
  for (auto format : {CloudFormat::PlyAscii, CloudFormat::Xyz}) {
    const auto path = scratch(format == CloudFormat::Xyz ? "rt.xyz" : "rt.ply");
    save_cloud(cloud, path, format);
    const auto back = load_cloud(path, format);
    ASSERT_EQ(back.size(), cloud.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) worst = std::max(worst, (back[i] - cloud[i]).cwiseAbs().maxCoeff());
    EXPECT_LE(worst, 1e-6);
  }
}

TEST(SaveCloud, RefusesNaN) {
  PointCloud cloud;
  cloud.points.emplace_back(0, std::numeric_limits<double>::quiet_NaN(), 0);
  EXPECT_THROW(save_cloud(cloud, scratch("nan.ply"), CloudFormat::PlyAscii), InputError);
}

TEST(FormatFromExtension, KnownAndUnknown) {
  EXPECT_EQ(format_from_extension("a.ply"), CloudFormat::PlyAscii);
  EXPECT_EQ(format_from_extension("a.xyz"), CloudFormat::Xyz);
  EXPECT_THROW(format_from_extension("a.las"), InputError);
}

TEST(GenerateRoom, NoiselessPointsLieOnTheirSurface) {
  SyntheticRoomSpec spec;
  spec.seed = 11;
  const auto room = generate_room(spec);
  ASSERT_EQ(room.truth.surfaces.size(), 5u);
  for (const auto& p : room.cloud.points) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& s : room.truth.surfaces) nearest = std::min(nearest, s.plane.distance(p));
    ASSERT_EQ(nearest, 0.0) << p.transpose();
  }
}

TEST(GenerateRoom, DeterministicForSeed) {
  SyntheticRoomSpec spec;
  spec.noise_sigma = 0.005;
  spec.outlier_fraction = 0.1;
  spec.seed = 42;
  const auto a = generate_room(spec);
  const auto b = generate_room(spec);
  ASSERT_EQ(a.cloud.size(), b.cloud.size());
  for (std::size_t i = 0; i < a.cloud.size(); ++i) ASSERT_EQ(a.cloud[i], b.cloud[i]);
  spec.seed = 43;
  EXPECT_NE(generate_room(spec).cloud[0], a.cloud[0]);
}

TEST(GenerateRoom, PointCountFollowsArea) {
  SyntheticRoomSpec spec;
  spec.noise_sigma = 0.005;
  spec.outlier_fraction = 0.1;
  spec.density = 200;
  const auto room = generate_room(spec);
  const double area = 5.0 * 4.0 + 2 * (5.0 * 3.0) + 2 * (4.0 * 3.0);  // 74 m^2
  const double expected = std::ceil(area * 200.0) * 1.1;
  EXPECT_NEAR(static_cast<double>(room.cloud.size()), expected, 1.0);
  EXPECT_EQ(room.truth.surface_points + room.truth.outlier_points, room.cloud.size());
}

TEST(GenerateRoom, CeilingAddsASurface) {
  SyntheticRoomSpec spec;
  spec.include_ceiling = true;
  const auto room = generate_room(spec);
  ASSERT_EQ(room.truth.surfaces.size(), 6u);
  EXPECT_EQ(room.truth.surfaces.back().name, "ceiling");
  EXPECT_NEAR(room.truth.surfaces.back().plane.d, -3.0, 1e-12);
}

TEST(GenerateRoom, OpeningsAreEmpty) {
  SyntheticRoomSpec spec;
  spec.openings = {{0, {2.0, 1.0, 1.2, 1.5}}, {3, {0.5, 0.0, 0.9, 2.0}}};
  const auto room = generate_room(spec);
  std::size_t on_wall0 = 0;
  for (const auto& p : room.cloud.points) {
    if (p.y() == 0.0) {
      ++on_wall0;
      const bool inside = p.x() > 2.0 && p.x() < 3.2 && p.z() > 1.0 && p.z() < 2.5;
      ASSERT_FALSE(inside) << p.transpose();
    }
    if (p.x() == 0.0) {
      const bool inside = p.y() > 0.5 && p.y() < 1.4 && p.z() < 2.0;
      ASSERT_FALSE(inside) << p.transpose();
    }
  }
  // Net area drives the count: 15 - 1.8 m^2 at 200 per m^2.
  EXPECT_NEAR(static_cast<double>(on_wall0), 13.2 * 200.0, 2.0);
  EXPECT_NEAR(room.truth.surfaces[1].area, 13.2, 1e-12);
}

TEST(GenerateRoom, NoiseMovesPointsAlongNormals) {
  SyntheticRoomSpec spec;
  spec.noise_sigma = 0.01;
  spec.seed = 5;
  const auto room = generate_room(spec);
  double sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& p : room.cloud.points) {
    if (std::abs(p.z()) < 0.05 && p.x() > 0.1 && p.x() < 4.9 && p.y() > 0.1 && p.y() < 3.9) {
      sum2 += p.z() * p.z();
      ++n;
    }
  }
  ASSERT_GT(n, 3000u);
  EXPECT_NEAR(std::sqrt(sum2 / static_cast<double>(n)), 0.01, 0.001);
}

TEST(GenerateRoom, OutliersStayInBox) {
  SyntheticRoomSpec spec;
  spec.outlier_fraction = 0.5;
  const auto room = generate_room(spec);
  for (const auto& p : room.cloud.points) {
    ASSERT_TRUE(p.x() >= 0 && p.x() <= 5 && p.y() >= 0 && p.y() <= 4 && p.z() >= 0 && p.z() <= 3);
  }
}

TEST(SyntheticRoomSpec, Validation) {
  SyntheticRoomSpec spec;
  spec.height = 0;
  try {
    spec.validate();
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("height"), std::string::npos);
  }
  spec = {};
  spec.outlier_fraction = 1.0;
  EXPECT_THROW(spec.validate(), InputError);
  spec = {};
  spec.noise_sigma = -1;
  EXPECT_THROW(spec.validate(), InputError);
  spec = {};
  spec.openings = {{0, {4.5, 1.0, 1.0, 1.0}}};  // runs past the 5 m wall
  EXPECT_THROW(generate_room(spec), InputError);
  spec.openings = {{4, {0.5, 1.0, 1.0, 1.0}}};
  EXPECT_THROW(generate_room(spec), InputError);
  spec.openings = {{0, {0.5, 1.0, 1.0, 1.0}}, {0, {1.0, 1.5, 1.0, 1.0}}};
  EXPECT_THROW(generate_room(spec), InputError);
}

TEST(TransformCloud, AppliesPose) {
  PointCloud cloud;
  cloud.points = {Point3(1, 0, 0), Point3(0, 2, 3)};
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.rotate(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()));
  pose.pretranslate(Eigen::Vector3d(0, 0, 1));
  const auto moved = transform_cloud(cloud, pose);
  EXPECT_TRUE(moved[0].isApprox(Point3(0, 1, 1), 1e-12));
  EXPECT_TRUE(moved[1].isApprox(Point3(-2, 0, 4), 1e-12));
}

TEST(SyntheticWallFrame, MatchesGroundTruthPlanes) {
  SyntheticRoomSpec spec;
  const auto room = generate_room(spec);
  for (int i = 0; i < 4; ++i) {
    const auto frame = synthetic_wall_frame(spec, i);
    const auto& truth = room.truth.surfaces[static_cast<std::size_t>(i) + 1].plane;
    EXPECT_NEAR(truth.distance(frame.origin), 0.0, 1e-12);
    EXPECT_NEAR(truth.distance(frame.origin + frame.span * frame.u_axis), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(truth.normal.dot(frame.normal)), 1.0, 1e-12);
  }
}
