#include "extdep/angular_model.hpp"
#include "extdep/csv.hpp"
#include "extdep/error.hpp"
#include "extdep/optim.hpp"
#include "extdep/serialization.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace extdep;
namespace tsup = extdep::testing;

TEST(Csv, ParsesQuotedFieldsAndTrims) {
  std::istringstream in("date,\"pm10, ug\",no\n2001-01-01, 12.5 ,\"3\"\n\n2001-01-02,\"7\"\"\",4\n");
  const CsvTable t = parse_csv(in);
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.header[1], "pm10, ug");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "12.5");
  EXPECT_EQ(t.rows[1][1], "7\"");
  EXPECT_EQ(t.column("no"), 2u);
  EXPECT_THROW(t.column("so2"), DataError);
}

TEST(Csv, NumericColumnsRejectMissingValues) {
  std::istringstream in("a,b\n1,2\n3,\n");
  const CsvTable t = parse_csv(in);
  try {
    numeric_columns(t, {"b", "a"});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos);
    EXPECT_NE(msg.find("b"), std::string::npos);
  }
  std::istringstream ok("a,b\n1,2\n3,4e-1\n");
  const Eigen::MatrixXd m = numeric_columns(parse_csv(ok), {"b", "a"});
  EXPECT_EQ(m(1, 0), 0.4);
  EXPECT_EQ(m(1, 1), 3.0);
}

TEST(Csv, MalformedInput) {
  std::istringstream ragged("a,b\n1,2,3\n");
  EXPECT_THROW(parse_csv(ragged), DataError);
  std::istringstream open_quote("a,b\n\"1,2\n");
  EXPECT_THROW(parse_csv(open_quote), DataError);
  std::istringstream empty("");
  EXPECT_THROW(parse_csv(empty), DataError);
  EXPECT_THROW(read_csv("/nonexistent/extdep.csv"), DataError);
}

TEST(Csv, WriteRowQuotesWhenNeeded) {
  std::ostringstream out;
  write_csv_row(out, {"plain", "a,b", "say \"hi\""});
  EXPECT_EQ(out.str(), "plain,\"a,b\",\"say \"\"hi\"\"\"\n");
  std::istringstream back("x,y,z\n" + out.str());
  EXPECT_EQ(parse_csv(back).rows[0][2], "say \"hi\"");
}

TEST(FormatDouble, RoundTripsAndIsShort) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::ldexp(u(rng), static_cast<int>(u(rng) * 10));
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(KeyValues, ParseRules) {
  const auto kv = parse_key_values("# comment\nfamily = HR\n\n  d=3  \nname = a = b\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"family", "HR"}));
  EXPECT_EQ(kv[1].second, "3");
  EXPECT_EQ(kv[2].second, "a = b");
  EXPECT_THROW(parse_key_values("novalue\n"), DataError);
  EXPECT_THROW(parse_key_values("a = 1\na = 2\n"), DataError);
}

TEST(ModelText, RoundTripForEveryIllustration) {
  for (const auto& [label, m] : tsup::illustration_models()) {
    const std::string text = model_to_text(m);
    const AngularModel back = model_from_text(text);
    EXPECT_EQ(back.family(), m.family()) << label;
    EXPECT_EQ(back.dim(), m.dim()) << label;
    EXPECT_EQ(back.parameters(), m.parameters()) << label;
    EXPECT_EQ(model_to_text(back), text) << label;
  }
}

TEST(ModelText, FileRoundTripAndErrors) {
  tsup::TempDir dir("io");
  const AngularModel m = AngularModel::husler_reiss(std::vector<double>{0.7, 0.8, 0.9, 0.75, 0.85, 0.8}, 4);
  save_model(m, dir / "hr.txt");
  EXPECT_EQ(load_model(dir / "hr.txt").parameters(), m.parameters());
  EXPECT_NE(tsup::slurp(dir / "hr.txt").find("family = HR"), std::string::npos);
  EXPECT_THROW(model_from_text("family = XX\nd = 3\n"), Error);
  EXPECT_THROW(model_from_text("family = HR\nd = 3\n"), Error);
  EXPECT_THROW(load_model(dir / "missing.txt"), Error);
}

TEST(NelderMead, MinimizesRosenbrock) {
  auto f = [](const Eigen::VectorXd& x) { return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2); };
  NelderMeadOptions o;
  o.ftol = 1e-14;
  o.max_iterations = 20000;
  const auto r = nelder_mead(f, Eigen::Vector2d(-1.2, 1.0), o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-4);
  EXPECT_NEAR(r.x(1), 1.0, 1e-4);
  // non-finite values act as a barrier
  auto g = [](const Eigen::VectorXd& x) { return x(0) < 0.5 ? NAN : (x(0) - 0.2) * (x(0) - 0.2); };
  EXPECT_NEAR(nelder_mead(g, Eigen::VectorXd::Constant(1, 2.0), o).x(0), 0.5, 1e-3);
}
