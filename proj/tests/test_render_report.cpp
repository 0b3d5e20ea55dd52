#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "deepchroma/render.hpp"
#include "deepchroma/report.hpp"

using namespace deepchroma;

namespace {

// Closed-form two-sided p-values of Student's t for small degrees of freedom.
double p_closed_form(double t, int dof) {
  const double a = std::abs(t);
  switch (dof) {
    case 1: return 1.0 - 2.0 / std::numbers::pi * std::atan(a);
    case 2: return 1.0 - a / std::sqrt(2.0 + a * a);
    case 3: {
      const double u = a / std::sqrt(3.0);
      return 1.0 - 2.0 / std::numbers::pi * (u / (1.0 + u * u) + std::atan(u));
    }
  }
  return -1.0;
}

EvalResult songs(std::string feature, std::vector<std::pair<std::string, double>> scores) {
  EvalResult r{std::move(feature), 0.1, {}};
  for (auto& [id, w] : scores) r.songs.push_back({id, 0, w * 10.0, 10.0});
  return r;
}

}  // namespace

TEST(RenderGrayscale, ConstantInputIsWhite) {
  const auto img = render_grayscale(RowMatrix::Constant(5, 12, 0.7));
  EXPECT_TRUE(std::all_of(img.pixels.begin(), img.pixels.end(), [](auto p) { return p == 255; }));
}

TEST(RenderGrayscale, LayoutAndRange) {
  RowMatrix chroma = RowMatrix::Zero(100, 12);
  chroma(3, 11) = 2.0;
  chroma(0, 0) = 1.0;
  const auto img = render_grayscale(chroma);
  EXPECT_EQ(img.width, 100);
  EXPECT_EQ(img.height, 12);
  EXPECT_EQ(img.at(3, 0), 0);      // largest value, highest feature on top
  EXPECT_EQ(img.at(0, 11), 128);   // half way
  EXPECT_EQ(img.at(50, 5), 255);
  const auto bytes = encode_netpbm(img);
  const std::string header = "P5\n100 12\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 1200);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())), header);
}

TEST(RenderSaliency, OnePositiveCell) {
  RowMatrix map = RowMatrix::Zero(15, 178);
  map(4, 100) = 0.3;
  const auto img = render_saliency(map);
  EXPECT_EQ(img.width, 15);
  EXPECT_EQ(img.height, 178);
  int coloured = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y, 0) != 255 || img.at(x, y, 1) != 255 || img.at(x, y, 2) != 255) {
        ++coloured;
        EXPECT_EQ(x, 4);
        EXPECT_EQ(y, 177 - 100);
        EXPECT_EQ(img.at(x, y, 0), 255);
        EXPECT_EQ(img.at(x, y, 1), 0);
        EXPECT_EQ(img.at(x, y, 2), 0);
      }
  EXPECT_EQ(coloured, 1);
  EXPECT_EQ(encode_netpbm(img).size(), std::string("P6\n15 178\n255\n").size() + 15u * 178u * 3u);
}

TEST(RenderSaliency, NegativeIsBlueAndZeroMapIsWhite) {
  RowMatrix map = RowMatrix::Zero(2, 2);
  map(0, 0) = -1.0;
  map(1, 1) = 0.5;
  const auto img = render_saliency(map);
  EXPECT_EQ(img.at(0, 1, 0), 0);
  EXPECT_EQ(img.at(0, 1, 1), 0);
  EXPECT_EQ(img.at(0, 1, 2), 255);
  EXPECT_EQ(img.at(1, 0, 0), 255);
  EXPECT_EQ(img.at(1, 0, 1), 128);
  const auto white = render_saliency(RowMatrix::Zero(3, 4));
  EXPECT_TRUE(std::all_of(white.pixels.begin(), white.pixels.end(), [](auto p) { return p == 255; }));
}

TEST(PairedTTest, MatchesClosedForms) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0}, zero(4, 0.0);
  const auto r = paired_t_test(a, zero);
  EXPECT_EQ(r.dof, 3u);
  EXPECT_NEAR(r.t, 2.5 / std::sqrt(5.0 / 3.0 / 4.0), 1e-12);
  EXPECT_NEAR(r.p, p_closed_form(r.t, 3), 1e-9);
  const std::vector<double> b{0.3, -0.1, 0.9}, c{0.1, 0.2, 0.0};
  const auto r2 = paired_t_test(b, c);
  EXPECT_NEAR(r2.p, p_closed_form(r2.t, 2), 1e-9);
  const std::vector<double> d{0.9, 0.4}, e{0.1, 0.2};
  const auto r1 = paired_t_test(d, e);
  EXPECT_NEAR(r1.p, p_closed_form(r1.t, 1), 1e-9);
  const auto flipped = paired_t_test(zero, a);
  EXPECT_NEAR(flipped.t, -r.t, 1e-12);
  EXPECT_NEAR(flipped.p, r.p, 1e-15);
}

TEST(PairedTTest, EdgeCases) {
  const std::vector<double> a{0.5, 0.75, 0.25};
  const auto same = paired_t_test(a, a);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);
  const std::vector<double> shifted{0.625, 0.875, 0.375};
  const auto constant = paired_t_test(shifted, a);
  EXPECT_EQ(constant.p, 0.0);
  EXPECT_THROW(paired_t_test(a, std::vector<double>{1.0}), UsageError);
  EXPECT_THROW(paired_t_test(std::vector<double>{1.0}, std::vector<double>{1.0}), UsageError);
}

TEST(Report, TableAndTests) {
  const auto x = songs("deep", {{"a", 0.8}, {"b", 0.9}, {"c", 0.7}});
  const auto y = songs("cwlog", {{"c", 0.6}, {"a", 0.7}, {"b", 0.75}});
  const auto text = report({x, y});
  EXPECT_NE(text.find("deep"), std::string::npos);
  EXPECT_NE(text.find("80.00"), std::string::npos);
  EXPECT_NE(text.find("deep       vs cwlog"), std::string::npos);
  EXPECT_NE(text.find("dof =   2"), std::string::npos);
}

TEST(Report, IdenticalSetsGivePOne) {
  const auto x = songs("c", {{"a", 0.8}, {"b", 0.9}});
  auto y = x;
  y.feature = "c2";
  EXPECT_NE(report({x, y}).find("p = 1"), std::string::npos);
}

TEST(Report, Errors) {
  const auto x = songs("c", {{"a", 0.8}, {"b", 0.9}});
  const auto y = songs("d", {{"a", 0.8}, {"z", 0.9}});
  EXPECT_THROW(report({x, y}), DataError);
  EXPECT_THROW(report({x}), UsageError);
  const auto dup = songs("e", {{"a", 0.8}, {"a", 0.9}});
  EXPECT_THROW(report({x, dup}), DataError);
}
