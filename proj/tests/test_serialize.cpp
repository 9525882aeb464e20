#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "hop/rng.hpp"
#include "hop/serialize.hpp"

using namespace hop;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  fs::path dir = fs::temp_directory_path() / "hop_serialize_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("tensor container round-trips exact bits") {
  Rng rng(41);
  Tensor a = randn({3, 5}, rng, 1.0);
  Tensor b = randn({7}, rng, 0.001);
  b.at(0) = 1.0 / 3.0;
  b.at(1) = 1e-300;
  fs::path p = temp_file("roundtrip.tns");
  save_tensors(p.string(), {{"a", a}, {"b", b}});

  auto loaded = load_tensors(p.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].first == "a");
  CHECK(loaded[1].first == "b");
  REQUIRE(loaded[0].second.shape == a.shape);
  REQUIRE(loaded[1].second.shape == b.shape);
  for (size_t i = 0; i < a.numel(); i++) CHECK((*loaded[0].second.data)[i] == (*a.data)[i]);
  for (size_t i = 0; i < b.numel(); i++) CHECK((*loaded[1].second.data)[i] == (*b.data)[i]);

  // same content, same bytes
  fs::path p2 = temp_file("roundtrip2.tns");
  save_tensors(p2.string(), loaded);
  CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("container rejects garbage") {
  fs::path p = temp_file("bad.tns");
  std::ofstream(p, std::ios::binary) << "not a container";
  CHECK_THROWS(load_tensors(p.string()));
  CHECK_THROWS(load_tensors((temp_file("missing_dir") / "nope.tns").string()));
}

TEST_CASE("checkpoints copy values in place by name") {
  Rng rng(42);
  Tensor w = randn({4, 4}, rng, 1.0);
  Tensor bcur = randn({4}, rng, 1.0);
  fs::path p = temp_file("ckpt.tns");
  Params saved = {{"w", w}, {"b", bcur}};
  save_checkpoint(p.string(), saved);

  Tensor w2 = zeros({4, 4});
  Tensor b2 = zeros({4});
  Tensor w2_alias = w2;  // shares storage, must see loaded values
  Params target = {{"w", w2}, {"b", b2}};
  load_checkpoint(p.string(), target);
  for (size_t i = 0; i < w.numel(); i++) CHECK((*w2_alias.data)[i] == (*w.data)[i]);
  for (size_t i = 0; i < bcur.numel(); i++) CHECK((*b2.data)[i] == (*bcur.data)[i]);

  Params wrong_shape = {{"w", zeros({2, 2})}, {"b", zeros({4})}};
  CHECK_THROWS(load_checkpoint(p.string(), wrong_shape));
  Params wrong_name = {{"w", zeros({4, 4})}, {"bias", zeros({4})}};
  CHECK_THROWS(load_checkpoint(p.string(), wrong_name));
  Params missing = {{"w", zeros({4, 4})}};
  CHECK_THROWS(load_checkpoint(p.string(), missing));
}

TEST_CASE("ppm writer emits a valid P6 header and payload") {
  Tensor rgb = zeros({6, 3});
  for (int i = 0; i < 6; i++) {
    rgb.at(i, 0) = 1.0;             // full red
    rgb.at(i, 1) = i / 5.0;         // green ramp
    rgb.at(i, 2) = 0.0;
  }
  fs::path p = temp_file("img.ppm");
  write_ppm(p.string(), rgb, 2, 3);
  std::string bytes = slurp(p);
  CHECK(bytes.substr(0, 11) == "P6\n3 2\n255\n");
  REQUIRE(bytes.size() == 11 + 6 * 3);
  CHECK(static_cast<unsigned char>(bytes[11]) == 255);   // r of pixel 0
  CHECK(static_cast<unsigned char>(bytes[12]) == 0);     // g of pixel 0
  CHECK(static_cast<unsigned char>(bytes[11 + 5 * 3 + 1]) == 255);  // g of pixel 5

  CHECK_THROWS(write_ppm(p.string(), rgb, 2, 4));  // rows*cols mismatch
}

TEST_CASE("fmt_double round-trips exactly") {
  const double values[] = {0.0,   1.0,        -1.5,        1.0 / 3.0, 2.2250738585072014e-308,
                           1e300, 0.1 + 0.2,  -12345.6789, 6.02214076e23};
  for (double v : values) {
    std::string s = fmt_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
    CHECK(s.find(',') == std::string::npos);
  }
  CHECK(fmt_double(1.0) == "1");
}
