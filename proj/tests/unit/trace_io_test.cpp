// Copyright 2026 The ringsqz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ringsqz/trace_io.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <fstream>
#include <limits>

#include "ringsqz/errors.hpp"

namespace ringsqz {
namespace {

namespace fs = std::filesystem;

class TraceIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ringsqz_trace_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write_raw(const std::string& name, const std::string& bytes) const {
    std::ofstream out(path(name), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  // Hand-assembled binary file, independent of the writer under test.
  static std::string binary_image(std::uint32_t pulses, std::uint32_t samples, double period,
                                  const std::vector<float>& data, const char* magic = "TES1") {
    std::string b(magic, 4);
    auto put = [&b](const void* p, std::size_t n) { b.append(static_cast<const char*>(p), n); };
    put(&pulses, 4);
    put(&samples, 4);
    put(&period, 8);
    put(data.data(), data.size() * sizeof(float));
    return b;
  }

  static TraceSet sample_set() {
    TraceSet t;
    t.num_pulses = 3;
    t.num_samples = 8;
    t.sample_period = 2.5e-8;
    for (std::size_t i = 0; i < 24; ++i) t.samples.push_back(0.125f * static_cast<float>(i) - 1.0f / 3.0f);
    return t;
  }

  static std::int64_t offset_of(const std::function<void()>& f) {
    try {
      f();
    } catch (const FormatError& e) {
      return e.byte_offset();
    }
    ADD_FAILURE() << "expected FormatError";
    return -2;
  }

  fs::path dir_;
};

TEST_F(TraceIoTest, BinaryRoundTripIsExact) {
  const TraceSet t = sample_set();
  write_traces_binary(path("a.tes"), t);
  const TraceSet r = read_traces_binary(path("a.tes"));
  EXPECT_EQ(r.num_pulses, 3u);
  EXPECT_EQ(r.num_samples, 8u);
  EXPECT_DOUBLE_EQ(r.sample_period, 2.5e-8);
  EXPECT_EQ(r.samples, t.samples);
}

TEST_F(TraceIoTest, WriterMatchesHandAssembledLayout) {
  const TraceSet t = sample_set();
  write_traces_binary(path("a.tes"), t);
  std::ifstream in(path("a.tes"), std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(bytes, binary_image(3, 8, 2.5e-8, t.samples));
}

TEST_F(TraceIoTest, CsvRoundTripPreservesFloats) {
  const TraceSet t = sample_set();
  write_traces_csv(path("a.csv"), t);
  const TraceSet r = read_traces_csv(path("a.csv"), t.sample_period);
  EXPECT_EQ(r.num_pulses, 3u);
  EXPECT_EQ(r.samples, t.samples);
}

TEST_F(TraceIoTest, AutoDetectPicksReader) {
  const TraceSet t = sample_set();
  write_traces_binary(path("a.tes"), t);
  write_traces_csv(path("a.csv"), t);
  EXPECT_EQ(read_traces(path("a.tes"), 1.0).samples, read_traces(path("a.csv"), 1.0).samples);
  EXPECT_DOUBLE_EQ(read_traces(path("a.tes"), 1.0).sample_period, 2.5e-8);
  EXPECT_DOUBLE_EQ(read_traces(path("a.csv"), 1.0).sample_period, 1.0);
}

TEST_F(TraceIoTest, CsvSkipsCommentsAndBlankLines) {
  write_raw("c.csv", "# header\n\n1,2,3,4,5,6,7,8\r\n# mid\n 8 , 7,6,5,4,3,2,1\n");
  const TraceSet r = read_traces_csv(path("c.csv"), 1e-8);
  EXPECT_EQ(r.num_pulses, 2u);
  EXPECT_EQ(r.samples[8], 8.0f);
  EXPECT_EQ(r.samples[15], 1.0f);
}

TEST_F(TraceIoTest, MissingMagicAtOffsetZero) {
  write_raw("m.tes", binary_image(1, 8, 1e-8, std::vector<float>(8, 0.0f), "TES2"));
  EXPECT_EQ(offset_of([&] { read_traces_binary(path("m.tes")); }), 0);
}

TEST_F(TraceIoTest, TruncatedHeader) {
  write_raw("h.tes", std::string("TES1\x01\x00", 6));
  EXPECT_EQ(offset_of([&] { read_traces_binary(path("h.tes")); }), 6);
}

TEST_F(TraceIoTest, EmptyFileIsFormatError) {
  write_raw("e.tes", "");
  EXPECT_THROW(read_traces_binary(path("e.tes")), FormatError);
  EXPECT_THROW(read_traces(path("e.tes"), 1e-8), FormatError);
}

TEST_F(TraceIoTest, ZeroPulsesAtOffsetFour) {
  write_raw("z.tes", binary_image(0, 8, 1e-8, {}));
  EXPECT_EQ(offset_of([&] { read_traces_binary(path("z.tes")); }), 4);
}

TEST_F(TraceIoTest, TooFewSamplesAtOffsetEight) {
  write_raw("s.tes", binary_image(1, 7, 1e-8, std::vector<float>(7, 0.0f)));
  EXPECT_EQ(offset_of([&] { read_traces_binary(path("s.tes")); }), 8);
}

TEST_F(TraceIoTest, BadPeriodAtOffsetTwelve) {
  write_raw("p.tes", binary_image(1, 8, -1.0, std::vector<float>(8, 0.0f)));
  EXPECT_EQ(offset_of([&] { read_traces_binary(path("p.tes")); }), 12);
}

TEST_F(TraceIoTest, TruncatedPayloadReportsFileEnd) {
  const std::string img = binary_image(2, 8, 1e-8, std::vector<float>(15, 0.0f));
  write_raw("t.tes", img);
  EXPECT_EQ(offset_of([&] { read_traces_binary(path("t.tes")); }), static_cast<std::int64_t>(img.size()));
}

TEST_F(TraceIoTest, TrailingBytesReportPayloadEnd) {
  write_raw("x.tes", binary_image(1, 8, 1e-8, std::vector<float>(9, 0.0f)));
  EXPECT_EQ(offset_of([&] { read_traces_binary(path("x.tes")); }), 20 + 32);
}

TEST_F(TraceIoTest, NonFiniteSampleReportsItsOffset) {
  std::vector<float> data(8, 0.0f);
  data[5] = std::numeric_limits<float>::quiet_NaN();
  write_raw("n.tes", binary_image(1, 8, 1e-8, data));
  EXPECT_EQ(offset_of([&] { read_traces_binary(path("n.tes")); }), 20 + 5 * 4);
}

TEST_F(TraceIoTest, CsvRaggedRowReportsLineStart) {
  const std::string first = "1,2,3,4,5,6,7,8\n";
  write_raw("r.csv", first + "1,2,3\n");
  EXPECT_EQ(offset_of([&] { read_traces_csv(path("r.csv"), 1e-8); }), static_cast<std::int64_t>(first.size()));
}

TEST_F(TraceIoTest, CsvBadNumberReportsItsOffset) {
  write_raw("b.csv", "1,2,3,abc,5,6,7,8\n");
  EXPECT_EQ(offset_of([&] { read_traces_csv(path("b.csv"), 1e-8); }), 6);
}

TEST_F(TraceIoTest, CsvShortFirstRowAndEmptyFile) {
  write_raw("s.csv", "1,2,3\n");
  EXPECT_EQ(offset_of([&] { read_traces_csv(path("s.csv"), 1e-8); }), 0);
  write_raw("e.csv", "# nothing\n");
  EXPECT_THROW(read_traces_csv(path("e.csv"), 1e-8), FormatError);
}

TEST_F(TraceIoTest, MissingFileIsFormatError) {
  EXPECT_THROW(read_traces(path("absent.tes"), 1e-8), FormatError);
}

}  // namespace
}  // namespace ringsqz
