#include "collcal/errors.hpp"
#include "collcal/formats.hpp"
#include "collcal/rng.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <limits>
#include <string>

using namespace collcal;

namespace {

Dataset sample_dataset(RecordLayout layout) {
  Dataset ds;
  ds.role = layout == RecordLayout::kPixel ? CameraRole::kReference : CameraRole::kTest;
  ds.layout = layout;
  ds.seed = 18446744073709551615ULL;
  ds.scenario_hash = "0123456789abcdef";
  ds.frame = FrameSize{1280, 1024};
  if (layout == RecordLayout::kPixel) ds.camera = ReferenceCamera{{5967.7, 5969.0, 1222.4, 1023.5}, {0.238, 2.0007}};
  Rng rng(4);
  for (FeatureId id = 0; id < 50; ++id)
    ds.records.push_back({id * 3, {rng.uniform(0, 1280), rng.uniform(0, 1024)},
                          {rng.normal(), rng.normal(), layout == RecordLayout::kSpatial ? rng.uniform(1, 9) : 0.0}});
  return ds;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST(Numbers, ShortestDecimalRoundTripsBitExactly) {
  Rng rng(1);
  for (int i = 0; i < 20000; ++i) {
    std::uint64_t bits = 0;
    double v = 0.0;
    do {
      bits = static_cast<std::uint64_t>(rng.uniform() * 0x1.0p53) << 11 ^ static_cast<std::uint64_t>(i);
      std::memcpy(&v, &bits, sizeof v);
    } while (!std::isfinite(v));
    const double back = parse_double(format_double(v), "test");
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back), bits);
  }
  for (double v : {0.1, -0.0, 5e-324, std::numeric_limits<double>::max(), 2677.9})
    EXPECT_EQ(std::bit_cast<std::uint64_t>(parse_double(format_double(v), "t")), std::bit_cast<std::uint64_t>(v));
  EXPECT_EQ(format_double(2677.9), "2677.9");
}

TEST(Numbers, RejectMalformed) {
  EXPECT_THROW((void)parse_double("1.5x", "ctx"), DatasetInvalid);
  EXPECT_THROW((void)parse_double("nan", "ctx"), DatasetInvalid);
  EXPECT_THROW((void)parse_double("inf", "ctx"), DatasetInvalid);
  EXPECT_THROW((void)parse_double("", "ctx"), DatasetInvalid);
  EXPECT_THROW((void)parse_int("3.0", "ctx"), DatasetInvalid);
  EXPECT_THROW((void)parse_u64("-1", "ctx"), DatasetInvalid);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Dataset, RoundTripIsLossless) {
  for (auto layout : {RecordLayout::kPixel, RecordLayout::kPlanar, RecordLayout::kSpatial}) {
    const Dataset ds = sample_dataset(layout);
    const std::string text = write_dataset(ds);
    const Dataset back = parse_dataset(text);
    EXPECT_EQ(back.role, ds.role);
    EXPECT_EQ(back.layout, ds.layout);
    EXPECT_EQ(back.seed, ds.seed);
    EXPECT_EQ(back.scenario_hash, ds.scenario_hash);
    ASSERT_TRUE(back.frame.has_value());
    EXPECT_EQ(back.frame->width, 1280);
    EXPECT_EQ(back.camera.has_value(), ds.camera.has_value());
    ASSERT_EQ(back.records.size(), ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      EXPECT_EQ(back.records[i].id, ds.records[i].id);
      EXPECT_EQ(back.records[i].pixel, ds.records[i].pixel);
      if (layout == RecordLayout::kSpatial) EXPECT_EQ(back.records[i].coords, ds.records[i].coords);
      if (layout == RecordLayout::kPlanar)
        EXPECT_EQ(back.records[i].coords.head<2>(), ds.records[i].coords.head<2>());
    }
    EXPECT_EQ(write_dataset(back), text);
  }
}

TEST(Dataset, CommentsAndBlankLinesAreIgnored) {
  const std::string text =
      "# produced by hand\ncollcal-dataset 1\n\nrole test\nunits pixel meter\nfields id u v\n"
      "point 4 1.5 2.5   # trailing comment\nend\n";
  const Dataset ds = parse_dataset(text);
  ASSERT_EQ(ds.records.size(), 1u);
  EXPECT_EQ(ds.records[0].id, 4);
  EXPECT_FALSE(ds.frame.has_value());
  EXPECT_THROW((void)ds.planar(), DatasetInvalid);
}

TEST(Dataset, SchemaErrors) {
  const std::string good = write_dataset(sample_dataset(RecordLayout::kPlanar));
  EXPECT_NO_THROW((void)parse_dataset(good));
  EXPECT_THROW((void)parse_dataset(replace(good, "collcal-dataset 1", "collcal-dataset 2")), DatasetInvalid);
  EXPECT_THROW((void)parse_dataset(replace(good, "collcal-dataset 1", "something 1")), DatasetInvalid);
  EXPECT_THROW((void)parse_dataset(good.substr(0, good.size() / 2)), DatasetInvalid);
  EXPECT_THROW((void)parse_dataset(replace(good, "units pixel meter", "units pixel mm")), DatasetInvalid);
  EXPECT_THROW((void)parse_dataset(replace(good, "role test", "role other")), DatasetInvalid);
  EXPECT_THROW((void)parse_dataset(replace(good, "point 3 ", "point 0 ")), DuplicateId);
  EXPECT_THROW((void)parse_dataset(replace(good, "point 3 ", "point 3 1 ")), DatasetInvalid);
  EXPECT_THROW((void)parse_dataset(replace(good, "fields id u v Xt Yt", "fields id u v Q")), DatasetInvalid);
  EXPECT_THROW((void)parse_dataset(replace(good, "meta seed", "meta colour")), DatasetInvalid);
  try {
    (void)parse_dataset(replace(good, "point 3 ", "point 3 abc "));
    FAIL();
  } catch (const DatasetInvalid& e) {
    EXPECT_NE(std::string(e.what()).find("line "), std::string::npos);
  }
}

TEST(Report, RoundTripAndTimestampIsolation) {
  Report r;
  r.kind = "camera-report";
  r.add("tool", std::vector<std::string>{"collcal", "0.1.0"});
  r.add("intrinsics", {1.0, 2.5, 3.25, -4.0});
  r.add("residual", std::vector<std::string>{"1", "0.5", "0.25"});
  r.add("residual", std::vector<std::string>{"2", "0.5", "0.25"});
  Report a = r, b = r;
  a.lines.insert(a.lines.begin() + 1, {"timestamp", {"2026-01-01T00:00:00Z"}});
  b.lines.insert(b.lines.begin() + 1, {"timestamp", {"2027-06-30T12:00:00Z"}});
  const std::string ta = write_report(a);
  const std::string tb = write_report(b);
  EXPECT_NE(ta, tb);
  EXPECT_EQ(strip_timestamp(ta), strip_timestamp(tb));
  EXPECT_EQ(strip_timestamp(ta), write_report(r));

  const Report back = parse_report(ta);
  EXPECT_EQ(back.kind, "camera-report");
  EXPECT_EQ(back.numbers("intrinsics", 4), (std::vector<double>{1.0, 2.5, 3.25, -4.0}));
  EXPECT_THROW((void)back.numbers("distortion", 2), DatasetInvalid);
  EXPECT_THROW((void)back.numbers("intrinsics", 5), DatasetInvalid);
}

TEST(Truth, RoundTrip) {
  Truth t;
  t.test = {{2677.9, 2678.5, 634.66, 524.12}, {-0.2011, 0.1989},
            {euler_xyz_to_matrix({-1.5324, -0.0632, -0.4851}), Vec3(1e-3, 0.013, 0.4998)}};
  t.frame = {1280, 1024};
  t.reference = {{5967.7, 5969.0, 1222.4, 1023.5}, {0.238, 2.0007}};
  t.reference_rotation = rotation_z_deg(0.25);
  t.R_r = t.test.pose.rotation;
  t.euler = {-1.5324, -0.0632, -0.4851};
  const std::string text = write_truth(t);
  const Truth back = parse_truth(text);
  EXPECT_EQ(back.test.intrinsics, t.test.intrinsics);
  EXPECT_EQ(back.test.pose.rotation, t.test.pose.rotation);
  EXPECT_EQ(back.reference_rotation, t.reference_rotation);
  EXPECT_EQ(back.euler.theta_y, t.euler.theta_y);
  EXPECT_EQ(write_truth(back), text);
  EXPECT_THROW((void)parse_truth(write_report(Report{"field", {}})), DatasetInvalid);
}

TEST(Field, RoundTrip) {
  FieldScenario f;
  f.seed = 9;
  f.target_m = {1749.8, 19.3, 3671.8};
  f.nominal = {2666.6666666666665, 2666.6666666666665, 640, 512};
  f.samples = {{0, {25.4, -0.3}, {600.25, 500.5}}, {1, {25.5, -0.2}, {700.0, 410.125}}};
  const std::string text = write_field(f);
  const FieldScenario back = parse_field(text);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.target_m, f.target_m);
  ASSERT_EQ(back.samples.size(), 2u);
  EXPECT_EQ(back.samples[1].pixel, f.samples[1].pixel);
  EXPECT_EQ(back.samples[1].truth.yaw_deg, 25.5);
  EXPECT_EQ(write_field(back), text);
}

TEST(Config, ParsesKeyValueLines) {
  const Config c = parse_config("# comment\nreticle.rows = 11\n\n  test.euler_deg = 1 2 3   # trailing\n");
  EXPECT_EQ(c.values.at("reticle.rows"), "11");
  EXPECT_EQ(c.values.at("test.euler_deg"), "1 2 3");
  EXPECT_EQ(c.line_of.at("test.euler_deg"), 4);
  const SimulationConfig s = simulation_config(c);
  EXPECT_EQ(s.reticle.rows, 11);
  EXPECT_EQ(s.test_euler_deg.theta_z, 3.0);
  EXPECT_EQ(s.test.intrinsics.fx, 2677.9);
}

TEST(Config, DefaultsAreValid) {
  EXPECT_NO_THROW(SimulationConfig{}.validate());
  EXPECT_NO_THROW((void)simulation_config(parse_config("")));
}

TEST(Config, DiagnosticsNameLineAndField) {
  auto message = [](const std::string& text) -> std::string {
    try {
      (void)simulation_config(parse_config(text));
    } catch (const ConfigInvalid& e) {
      return e.what();
    }
    return "";
  };
  const std::string neg = message("reticle.rows = 15\nreticle.pitch_m = -0.01\n");
  EXPECT_NE(neg.find("reticle.pitch_m"), std::string::npos) << neg;
  EXPECT_NE(neg.find("line 2"), std::string::npos) << neg;
  const std::string unknown = message("colour = blue\n");
  EXPECT_NE(unknown.find("colour"), std::string::npos);
  EXPECT_NE(unknown.find("line 1"), std::string::npos);
  EXPECT_NE(message("test.fx = fast\n").find("test.fx"), std::string::npos);
  EXPECT_NE(message("test.euler_deg = 1 2\n").find("three"), std::string::npos);
  EXPECT_NE(message("depth.min_m = 10\ndepth.max_m = 5\n").find("depth.max_m"), std::string::npos);
  EXPECT_NE(message("out_of_frame = maybe\n").find("out_of_frame"), std::string::npos);
  EXPECT_THROW((void)parse_config("no equals sign\n"), ConfigInvalid);
  EXPECT_THROW((void)parse_config("a = 1\na = 2\n"), ConfigInvalid);
}
